#pragma once

#include "pathctl/control.hpp"
#include "pathctl/execution.hpp"
#include "pathctl/forward_integral.hpp"
#include "pathctl/functional.hpp"
#include "pathctl/path.hpp"

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace pathctl {

using LiftedDrift = std::function<Vector(double, const Vector&, double)>;
using LiftedDiffusion = std::function<Matrix(double, const Vector&, double)>;
using LiftedRunning = std::function<double(double, const Vector&, double)>;
using LiftedTerminal = std::function<double(const Vector&)>;

/// One cylindrical coefficient: core(t, y, a) with y the lifted coordinates
/// against weights, and a declared sup bound on |core| (Frobenius norm for
/// matrices).
template <typename Core>
struct Cylindrical {
    std::vector<Weight> weights;
    Core core;
    double bound = std::numeric_limits<double>::infinity();
};

/// Finite-dimensional control problem on y in R^{d m}, m = number of weights:
/// b_phi = Phi(t) b, sigma_phi = Phi(t) sigma with Phi the stacking matrix.
struct LiftedProblem {
    std::size_t dim = 1;        // d, the path dimension
    std::size_t noise_dim = 1;  // columns of sigma
    std::vector<Weight> weights;
    LiftedDrift drift;
    LiftedDiffusion diffusion;
    LiftedRunning running;  // empty means f == 0
    LiftedTerminal terminal;
    std::vector<double> actions;
    double horizon = 1.0;
    double drift_bound = std::numeric_limits<double>::infinity();
    double diffusion_bound = std::numeric_limits<double>::infinity();
    double running_bound = 0.0;

    std::size_t lifted_dim() const noexcept { return dim * weights.size(); }
    Matrix stacking(double t) const;
    Vector drift_phi(double t, const Vector& y, double a) const;
    Matrix diffusion_phi(double t, const Vector& y, double a) const;
    double running_cost(double t, const Vector& y, double a) const { return running ? running(t, y, a) : 0.0; }
};

/// Weight lists agree when names, knots and values at a few probe times match.
bool same_weights(std::span<const Weight> a, std::span<const Weight> b, double horizon);

/// Assemble the lifted problem. Throws std::invalid_argument unless all four
/// coefficients share one weight list.
LiftedProblem build_lifted(const Cylindrical<LiftedDrift>& drift, const Cylindrical<LiftedDiffusion>& diffusion,
                           const Cylindrical<LiftedRunning>& running, const Cylindrical<LiftedTerminal>& terminal,
                           std::size_t dim, std::size_t noise_dim, std::vector<double> actions, double horizon);

/// The path-level problem behind a lifted one: b(t, x, a) = b(t, y^{t, x}, a)
/// and likewise for sigma, f and g (the terminal reward at y^{T, x}).
ControlProblem path_problem(const LiftedProblem& problem);

/// Largest lifted dimension accepted by the grid solver.
inline constexpr std::size_t max_grid_dim = 3;

struct GridConfig {
    std::size_t points = 201;       // nodes per axis
    std::size_t time_levels = 200;  // stored levels after t = 0
    double margin = 0.25;
    /// Explicit box; otherwise derived from the reachable-set bound around
    /// the centers.
    std::optional<Vector> lo, hi;
    std::vector<Vector> centers;
    /// Fraction of the explicit stability limit used per substep.
    double cfl = 0.9;
    Execution exec = Execution::serial;
};

struct SolveReport {
    std::size_t substeps = 1;  // explicit substeps per stored level
    bool refined = false;      // substeps > 1 was needed
    double max_rate = 0.0;     // largest sum |b_i|/h_i + a_ii/h_i^2 seen
    double courant = 0.0;      // substep length times max_rate
    bool monotone = true;      // diagonal dominance of the cross stencil
};

struct Interpolated {
    double value;
    bool extrapolated;
};

/// Nodal values of the lifted value function on [0, T] x box.
class GridSolution {
public:
    GridSolution(Vector lo, Vector hi, std::size_t points, std::vector<double> times, double epsilon);

    std::size_t dim() const noexcept { return static_cast<std::size_t>(lo_.size()); }
    std::size_t points() const noexcept { return points_; }
    std::size_t nodes() const noexcept { return nodes_; }
    const Vector& lo() const noexcept { return lo_; }
    const Vector& hi() const noexcept { return hi_; }
    const Vector& spacing() const noexcept { return h_; }
    const std::vector<double>& times() const noexcept { return times_; }
    double epsilon() const noexcept { return epsilon_; }

    std::vector<double>& level(std::size_t n) { return values_[n]; }
    const std::vector<double>& level(std::size_t n) const { return values_[n]; }
    /// Multi-index of a flat node index; axis 0 varies fastest.
    std::vector<std::size_t> multi_index(std::size_t flat) const;
    std::size_t flat_index(std::span<const std::size_t> idx) const;
    Vector node(std::size_t flat) const;

    /// Nodal value with linear extrapolation for indices one step outside.
    double at(std::size_t level, std::span<const std::ptrdiff_t> idx) const { return at(values_[level], idx); }
    /// Same rule on an arbitrary nodal vector of this grid's shape.
    double at(const std::vector<double>& u, std::span<const std::ptrdiff_t> idx) const;

    /// Linear in t between levels, multilinear in y; outside the box the edge
    /// cell is extended linearly and the flag is set.
    Interpolated value(double t, const Vector& y) const;

    /// Core whose partials are central differences of the interpolant with
    /// the grid steps (one-sided in t at the first and last level).
    Core core() const;

    SolveReport report;

private:
    Vector lo_, hi_, h_;
    std::size_t points_;
    std::size_t nodes_;
    std::vector<double> times_;
    double epsilon_;
    std::vector<std::vector<double>> values_;
};

/// Box from the reachable-set bound |y - y0| <= (|b_phi| + 3 |sigma_phi| sqrt T) T
/// around every center, widened by the margin.
std::pair<Vector, Vector> reachable_box(const LiftedProblem& problem, const GridConfig& cfg);

/// Backward explicit monotone upwind solve of
/// d_t u + sup_a { <b_phi, D u> + 1/2 tr((eps^2 I + sigma_phi sigma_phi^T) D^2 u) + f } = 0,
/// u(T) = g. Substeps per stored level are raised until the explicit
/// stability limit holds; the report records the refinement.
GridSolution solve(const LiftedProblem& problem, double epsilon, const GridConfig& cfg);

/// v_eps(t, x) = u(t, y^{t, x}) by interpolation.
Interpolated reconstruct(const GridSolution& solution, const LiftedProblem& problem, const GaugePoint& p);

/// u(t, x) = u_grid(t, y^{t, x}) as a cylindrical functional.
CylindricalFunctional as_cylindrical(const GridSolution& solution, const LiftedProblem& problem);

struct BoundsReport {
    /// Fitted C with min second difference >= -C e^{C (T - t)} (1 + |y|)^{3q}
    /// on the fitting levels (t >= fit_from); holds reports the check on the
    /// remaining levels.
    double semiconcavity_constant = 0.0;
    bool semiconcavity_holds = true;
    double fit_from = 0.0;
    /// max |Phi(t)^T D u| over nodes and levels.
    double vertical_bound = 0.0;
};

/// q is the polynomial growth exponent of the coefficients (0 when bounded).
/// Fitting uses levels with t >= fit_fraction T.
BoundsReport verify_bounds(const GridSolution& solution, const LiftedProblem& problem, double q = 0.0,
                           double fit_fraction = 0.75);

/// Smallest C >= 0 with errors[i] <= eps[i] C e^{C T} for every i.
double fit_exponential_constant(std::span<const double> eps, std::span<const double> errors, double horizon);

/// CSV `t,y1..,value`, one row per node and level.
void write_csv(std::ostream& out, const GridSolution& solution);

}  // namespace pathctl
