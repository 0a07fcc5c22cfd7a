#pragma once

#include "pathctl/control.hpp"
#include "pathctl/execution.hpp"
#include "pathctl/functional.hpp"
#include "pathctl/lifted_hjb.hpp"

#include <iosfwd>
#include <span>
#include <vector>

namespace pathctl {

/// Smooth test functions are cylindrical functionals, so their pathwise
/// derivatives exist in closed form.
using TestFunction = CylindricalFunctional;

/// -d_H phi + F(t, x, d_V phi, d_VV phi) with F = -sup_a {<b, p> + 1/2 tr(sigma sigma^T M) + f}
/// taken from hamiltonian(). A subsolution needs this <= 0 wherever u - phi
/// has a one-sided maximum. F does not depend on u here; u_value is carried
/// for the general form. Throws std::domain_error unless p.t < T.
double subsolution_lhs(const ControlProblem& problem, double u_value, const TestFunction& test, const GaugePoint& p);

/// Orientation of the returned inequality. natural: the supersolution needs
/// the result >= 0; reversed: the negated value, to be read as <= 0.
enum class Convention { natural, reversed };

/// The same left-hand side evaluated for the supersolution test (>= 0 at
/// one-sided minima of u - phi).
double supersolution_lhs(const ControlProblem& problem, double u_value, const TestFunction& test, const GaugePoint& p,
                         Convention convention = Convention::natural);

enum class Touching { from_above, from_below };

struct TouchingReport {
    double reference = 0.0;        // (u - phi)(p)
    double worst_violation = 0.0;  // max over probes of the signed excess, <= 0 when p is extremal
    std::size_t worst_index = 0;   // probe attaining it; probes.size() when there are none
    bool touching = true;
};

/// Checks that u - phi has a maximum (from_above) or minimum (from_below) at
/// p over the probes, all of which must satisfy q.t >= p.t.
TouchingReport touching_report(const PathFunctional& u, const TestFunction& test, const GaugePoint& p,
                               std::span<const GaugePoint> probes, Touching side = Touching::from_above,
                               double tol = 0.0, Execution exec = Execution::serial);

struct ResidualSample {
    double t;
    Vector y;
};

struct ResidualRow {
    double t;
    Vector y;
    /// d_t u + sup_a {...} + 1/2 eps^2 tr D^2 u with grid differences.
    double residual;
    /// -d_t u + F, the viscosity left-hand side without the eps term.
    double lhs;
    /// 1/2 eps^2 tr D^2 u; for an exact classical solution lhs equals it.
    double eps_term;
    /// Truncation estimate 1/2 sum |b_i| h_i sup|D_ii u| + 1/2 dt sup|u_tt|, sups
    /// over the neighbouring nodes and levels.
    double tolerance;
};

struct ResidualTable {
    std::vector<ResidualRow> rows;
    double max_residual = 0.0;
};

/// Stored-level nodes at least margin nodes from every face and at times
/// t <= t_max, every stride-th node per axis.
std::vector<ResidualSample> interior_samples(const GridSolution& solution, std::size_t margin, std::size_t stride,
                                             double t_max);

/// Pointwise residual of the regularized equation at the samples, with
/// derivatives taken through the cylindrical functional built on the grid.
ResidualTable classical_residual(const GridSolution& solution, const LiftedProblem& problem,
                                 std::span<const ResidualSample> samples, Execution exec = Execution::serial);

/// CSV `t,y1..,residual`.
void write_csv(std::ostream& out, const ResidualTable& table);

}  // namespace pathctl
