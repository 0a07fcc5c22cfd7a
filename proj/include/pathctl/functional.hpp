#pragma once

#include "pathctl/forward_integral.hpp"
#include "pathctl/path.hpp"

#include <functional>
#include <vector>

namespace pathctl {

/// Real functional u(t, x) on [0, T] x paths.
struct PathFunctional {
    std::function<double(double, const Path&)> eval;
    /// Declares u(t, x) = u(t, x(. ^ t)).
    bool non_anticipative = true;

    double operator()(double t, const Path& x) const { return eval(t, x); }
};

/// |u(t, x) - u(t, x(. ^ t))|; zero for a non-anticipative functional.
double anticipation_defect(const PathFunctional& u, double t, const Path& x);

/// Finite-dimensional core c(t, y), y in R^k, with analytic partials.
struct Core {
    std::function<double(double, const Vector&)> value;
    std::function<double(double, const Vector&)> dt;
    std::function<Vector(double, const Vector&)> dy;
    std::function<Matrix(double, const Vector&)> dyy;
};

/// Finite-difference partials of a value-only core: central steps h_t, h_y,
/// one-sided in t within h_t of 0 or of the horizon.
Core finite_difference_core(std::function<double(double, const Vector&)> value, double horizon, double h_t = 1e-5,
                            double h_y = 1e-4);

/// Pathwise derivatives at one point.
struct PathDerivatives {
    double horizontal = 0.0;
    Vector vertical1;
    Matrix vertical2;
};

/// u(t, x) = core(t, y^{t,x}) with y^{t,x} the stacked forward integrals of
/// x against the weights. Non-anticipative by construction.
class CylindricalFunctional {
public:
    CylindricalFunctional(Core core, std::vector<Weight> weights, std::size_t dim);

    const Core& core() const noexcept { return core_; }
    const std::vector<Weight>& weights() const noexcept { return weights_; }
    std::size_t dim() const noexcept { return dim_; }
    /// Size of the lifted coordinate vector, d m.
    std::size_t lifted_dim() const noexcept { return dim_ * weights_.size(); }

    Vector lift(double t, const Path& x) const;
    double operator()(double t, const Path& x) const;
    PathFunctional as_functional() const;

    /// Analytic pathwise derivatives via the stacking matrix:
    /// dH = dt core, dV = Phi^T dy core, dVV = Phi^T dyy core Phi.
    PathDerivatives derivatives(double t, const Path& x) const;
    /// Same as derivatives() with the lifted coordinates already known.
    PathDerivatives derivatives_at(double t, const Vector& y) const;

private:
    Core core_;
    std::vector<Weight> weights_;
    std::size_t dim_;
};

struct HorizontalResult {
    double value;
    /// Step actually used; smaller than requested when t + delta > T.
    double step;
    /// True at t = T, where the left-limit clause is used.
    bool left_limit;
};

/// (u(t + delta, x(. ^ t)) - u(t, x(. ^ t))) / delta. At t = T the
/// derivative is the left limit, approximated at T - delta.
HorizontalResult horizontal_derivative(const PathFunctional& u, const GaugePoint& p, double delta);

/// x + shift 1_{[t,T]} on the continuous representation: t is inserted and
/// an anchor node at t - tau keeps the unbumped value, so the bump is a jump
/// of width tau. At t = 0 the whole path is shifted.
Path vertical_bump(const Path& x, double t, const Vector& shift);

/// Central finite differences over vertically bumped paths.
Vector vertical_gradient(const PathFunctional& u, const GaugePoint& p, double h);
Matrix vertical_hessian(const PathFunctional& u, const GaugePoint& p, double h);

/// A discrete semimartingale: the path and, for every grid step k -> k+1,
/// the quadratic-variation increment (d x d).
struct DiscreteSemimartingale {
    Path path;
    std::vector<Matrix> quadratic_variation;
};

/// |u(T, X) - u(t0, X) - sum_k [dH u dt + <dV u, dX> + 1/2 tr(dVV u d<X>)]|
/// with left-point sums over the grid steps starting at t0 (a grid node).
double ito_residual(const CylindricalFunctional& u, const DiscreteSemimartingale& x, double t0);

}  // namespace pathctl
