#pragma once

#include "pathctl/path.hpp"

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace pathctl {

/// A continuously differentiable weight phi on [0, T] together with its
/// exact derivative.
///
/// knots lists interior points where phi' changes behaviour sharply (for
/// instance the ends of a cutoff's transition window); quadrature splits there.
/// A weight flagged constant has phi' == 0 and skips quadrature entirely;
/// otherwise phi' vanishes outside [support_lo, support_hi].
struct Weight {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
    std::vector<double> knots;
    bool constant = false;
    double support_lo = -std::numeric_limits<double>::infinity();
    double support_hi = std::numeric_limits<double>::infinity();

    static Weight one();
    static Weight constant_value(double c);
    /// phi(s) = s
    static Weight identity();
    /// phi(s) = exp(rate * s)
    static Weight exponential(double rate);
    /// phi(s) = cos(freq * s)
    static Weight cosine(double freq = 1.0);
};

struct QuadratureOptions {
    /// Composite Simpson panels per elementary interval (must be even).
    int subdivisions = 64;
};

/// Forward integral over [0, t] by integration by parts:
/// phi(t) x(t) - int_0^t x(s) phi'(s) ds.
Vector integrate_ibp(const Weight& phi, const Path& path, double t, QuadratureOptions opts = {});

/// Regularized forward integral
/// int_0^t phi(s) (x(t ^ (s + eps)) - x(s)) / eps ds + phi(0) x(0).
/// The boundary term keeps the closed-interval convention, so the result
/// converges to integrate_ibp as eps -> 0.
Vector integrate_regularized(const Weight& phi, const Path& path, double t, double epsilon,
                             QuadratureOptions opts = {});

/// Concatenated forward integrals, one block of size d per weight.
Vector lifted_coordinates(std::span<const Weight> weights, const Path& path, double t,
                          QuadratureOptions opts = {});

/// Lifted coordinates at every grid node of path, computed in one sweep.
/// Column k holds lifted_coordinates(weights, path, t_k).
Matrix lifted_coordinates_along(std::span<const Weight> weights, const Path& path, QuadratureOptions opts = {});

/// (d m) x d matrix stacking phi_j(t) I_d.
Matrix stacking_matrix(std::span<const Weight> weights, double t, std::size_t dim);

}  // namespace pathctl
