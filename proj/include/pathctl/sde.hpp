#pragma once

#include "pathctl/execution.hpp"
#include "pathctl/functional.hpp"
#include "pathctl/mollification.hpp"
#include "pathctl/path.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

namespace pathctl {

/// Piecewise-constant control: action index[i] on [grid[i], grid[i+1]),
/// the last interval closed at grid.back().
struct PiecewiseConstantControl {
    std::vector<double> grid;
    std::vector<std::size_t> index;

    /// Uniform switching grid of m intervals on [t, T], all on action a.
    static PiecewiseConstantControl uniform(double t, double horizon, std::size_t m, std::size_t a = 0);
    static PiecewiseConstantControl constant(double t, double horizon, std::size_t a);

    std::size_t intervals() const noexcept { return index.size(); }
    /// Action index in force at s; throws std::domain_error outside the grid.
    std::size_t index_at(double s) const;
    /// Throws std::invalid_argument unless the grid is increasing and every
    /// index is below action_count.
    void validate(std::size_t action_count) const;
};

/// dX = b(s, X, a) ds + sigma(s, X, a) dB with X in R^d, B in R^m and
/// coefficients reading the path only up to s.
struct ControlledSDE {
    std::size_t dim = 1;
    std::size_t noise_dim = 1;
    std::function<Vector(double, const Path&, double)> drift;
    std::function<Matrix(double, const Path&, double)> diffusion;
    std::vector<double> actions;
    /// Declared Lipschitz constant in ||.||_t and sup bound of |b|, |sigma|_F.
    double lipschitz = 0.0;
    double bound = std::numeric_limits<double>::infinity();

    /// d = m = 1 from two scalar coefficients.
    static ControlledSDE scalar(const CoefficientSpec& b, const CoefficientSpec& sigma, std::vector<double> actions);
};

void validate(const ControlledSDE& sde);

/// Largest observed violations of the declared constants of b and sigma
/// over the given paths, all actions and random times.
CoefficientAudit audit(const ControlledSDE& sde, std::span<const Path> paths, std::uint64_t seed);

struct SimConfig {
    double steps_per_unit = 64.0;
    std::size_t trajectories = 256;
    std::uint64_t seed = 0;
    /// Each Euler increment is the sum of this many finer Gaussian
    /// increments, so runs with steps * substeps fixed share one Brownian path.
    std::size_t noise_substeps = 1;
    Execution exec = Execution::serial;
};

/// Simulated trajectories. Every path lives on [0, T]: the nodes of x below
/// t, then t, then the Euler nodes. quadratic_variation has one entry per
/// grid step and is zero before t.
struct Batch {
    std::vector<DiscreteSemimartingale> trajectories;
    /// Index of the node at the start time t.
    std::size_t start = 0;
    /// Index of the last Euler node; later nodes hold the value (stop time < T).
    std::size_t stop = 0;
    std::vector<std::size_t> actions;  // action index per Euler step

    std::size_t size() const noexcept { return trajectories.size(); }
    const Path& path(std::size_t k) const { return trajectories.at(k).path; }
};

/// Euler-Maruyama from (t, x) up to stop_at (default T), the path held
/// constant after stop_at. The Euler grid is uniform with ceil(steps_per_unit
/// (stop_at - t)) steps, refined so every switching time of the control is
/// a node. Step k uses b, sigma at the path frozen at its left node and
/// the action in force there; the increment for (trajectory, step,
/// component) is keyed by the seed alone.
Batch simulate(const ControlledSDE& sde, double t, const Path& x, const PiecewiseConstantControl& control,
               const SimConfig& cfg, double stop_at = std::numeric_limits<double>::quiet_NaN());

struct ContinuityRow {
    double r;
    double value;      // max over actions of E[sup_s |X(s ^ r) - x(s ^ t)|^2]
    double std_error;  // of the maximizing action
    std::size_t action;
};

/// One row per r in r_values (each in [t, T]), maximizing over constant
/// controls drawn from the action indices given.
std::vector<ContinuityRow> continuity_diagnostic(const ControlledSDE& sde, double t, const Path& x,
                                                 std::span<const std::size_t> actions, std::span<const double> r_values,
                                                 const SimConfig& cfg);

/// (mean over the batch of ||X||_T^p)^{1/p}.
double sup_moment(const Batch& batch, double p);

/// Long format, header traj,s,x1..xd.
void write_csv(std::ostream& out, const Batch& batch);

}  // namespace pathctl
