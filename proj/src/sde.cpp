#include "pathctl/sde.hpp"

#include "pathctl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <string>

namespace pathctl {

namespace {

double tolerance(double horizon) { return 1e-13 * std::max(1.0, horizon); }

// Sorted, deduplicated within tol, endpoints pinned.
std::vector<double> euler_times(double t, double stop, double steps_per_unit, std::span<const double> extra, double tol) {
    std::vector<double> e{t};
    if (stop - t > tol) {
        const auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(steps_per_unit * (stop - t) - 1e-9)));
        for (std::size_t j = 1; j < n; ++j) e.push_back(t + (stop - t) * static_cast<double>(j) / static_cast<double>(n));
        for (double s : extra)
            if (s > t + tol && s < stop - tol) e.push_back(s);
        e.push_back(stop);
    }
    std::sort(e.begin(), e.end());
    std::vector<double> out;
    for (double s : e)
        if (out.empty() || s - out.back() > tol) out.push_back(s);
    if (stop - t > tol) out.back() = stop;
    return out;
}

}  // namespace

PiecewiseConstantControl PiecewiseConstantControl::uniform(double t, double horizon, std::size_t m, std::size_t a) {
    if (m == 0) throw std::invalid_argument("PiecewiseConstantControl: need at least one interval");
    PiecewiseConstantControl c;
    for (std::size_t i = 0; i <= m; ++i) c.grid.push_back(t + (horizon - t) * static_cast<double>(i) / static_cast<double>(m));
    c.grid.back() = horizon;
    c.index.assign(m, a);
    return c;
}

PiecewiseConstantControl PiecewiseConstantControl::constant(double t, double horizon, std::size_t a) {
    return uniform(t, horizon, 1, a);
}

std::size_t PiecewiseConstantControl::index_at(double s) const {
    const double tol = tolerance(grid.empty() ? 1.0 : grid.back());
    if (index.empty() || s < grid.front() - tol || s > grid.back() + tol)
        throw std::domain_error("control undefined at s = " + std::to_string(s));
    // right-continuous: a switching time belongs to the interval it opens
    const auto it = std::upper_bound(grid.begin() + 1, grid.end() - 1, s + tol);
    return index[static_cast<std::size_t>(it - grid.begin()) - 1];
}

void PiecewiseConstantControl::validate(std::size_t action_count) const {
    if (grid.size() != index.size() + 1 || index.empty())
        throw std::invalid_argument("PiecewiseConstantControl: grid must have one more node than intervals");
    for (std::size_t i = 0; i + 1 < grid.size(); ++i)
        if (!(grid[i + 1] > grid[i])) throw std::invalid_argument("PiecewiseConstantControl: grid must increase");
    for (std::size_t a : index)
        if (a >= action_count) throw std::invalid_argument("PiecewiseConstantControl: action index out of range");
}

ControlledSDE ControlledSDE::scalar(const CoefficientSpec& b, const CoefficientSpec& sigma, std::vector<double> actions) {
    ControlledSDE s;
    s.drift = [f = b.eval](double t, const Path& x, double a) { return Vector::Constant(1, f(t, x, a)); };
    s.diffusion = [f = sigma.eval](double t, const Path& x, double a) { return Matrix::Constant(1, 1, f(t, x, a)); };
    s.actions = std::move(actions);
    s.lipschitz = std::max(b.lipschitz, sigma.lipschitz);
    if (b.growth == Growth::bounded && sigma.growth == Growth::bounded) s.bound = s.lipschitz;
    return s;
}

void validate(const ControlledSDE& sde) {
    if (sde.dim == 0 || sde.noise_dim == 0) throw std::invalid_argument("ControlledSDE: dimensions must be positive");
    if (!sde.drift || !sde.diffusion) throw std::invalid_argument("ControlledSDE: drift and diffusion are required");
    if (sde.actions.empty()) throw std::invalid_argument("ControlledSDE: empty action set");
    if (!(sde.lipschitz >= 0.0) || !std::isfinite(sde.lipschitz))
        throw std::invalid_argument("ControlledSDE: Lipschitz constant must be finite and nonnegative");
    if (!(sde.bound >= 0.0)) throw std::invalid_argument("ControlledSDE: bound must be nonnegative");
}

CoefficientAudit audit(const ControlledSDE& sde, std::span<const Path> paths, std::uint64_t seed) {
    validate(sde);
    const CounterRng rng(seed);
    CoefficientAudit r;
    for (std::size_t i = 0; i + 1 < paths.size(); ++i) {
        const Path& x = paths[i];
        const Path& y = paths[i + 1];
        const double t = x.horizon() * rng.uniform(i, 0, 0);
        const double dist = seminorm(combine(1.0, x, -1.0, y), t);
        const Path xs = stop(x, t);
        for (double a : sde.actions) {
            const Vector bx = sde.drift(t, x, a), by = sde.drift(t, y, a);
            const Matrix sx = sde.diffusion(t, x, a), sy = sde.diffusion(t, y, a);
            r.lipschitz_excess = std::max({r.lipschitz_excess, (bx - by).norm() - sde.lipschitz * dist,
                                           (sx - sy).norm() - sde.lipschitz * dist});
            if (std::isfinite(sde.bound))
                r.growth_excess = std::max({r.growth_excess, bx.norm() - sde.bound, sx.norm() - sde.bound});
            r.anticipation = std::max({r.anticipation, (bx - sde.drift(t, xs, a)).norm(),
                                       (sx - sde.diffusion(t, xs, a)).norm()});
            ++r.samples;
        }
    }
    return r;
}

Batch simulate(const ControlledSDE& sde, double t, const Path& x, const PiecewiseConstantControl& control,
               const SimConfig& cfg, double stop_at) {
    validate(sde);
    const double T = x.horizon();
    const double tol = tolerance(T);
    if (std::isnan(stop_at)) stop_at = T;
    if (!(t >= 0.0 && t <= stop_at && stop_at <= T)) throw std::domain_error("simulate: need 0 <= t <= stop <= T");
    if (x.dim() != sde.dim) throw std::invalid_argument("simulate: path dimension does not match the SDE");
    if (!(cfg.steps_per_unit > 0.0) || cfg.trajectories == 0 || cfg.noise_substeps == 0)
        throw std::invalid_argument("SimConfig: counts must be positive");
    control.validate(sde.actions.size());

    std::vector<double> times;
    for (std::size_t k = 0; k < x.size() && x.time(k) < t - tol; ++k) times.push_back(x.time(k));
    Batch batch;
    batch.start = times.size();
    const auto euler = euler_times(t, stop_at, cfg.steps_per_unit, control.grid, tol);
    times.insert(times.end(), euler.begin(), euler.end());
    times.front() = 0.0;
    batch.stop = times.size() - 1;
    if (stop_at < T - tol) times.push_back(T);
    times.back() = T;
    const TimeGrid grid(times);

    const std::size_t steps = batch.stop - batch.start;
    for (std::size_t k = 0; k < steps; ++k) batch.actions.push_back(control.index_at(grid[batch.start + k]));

    Matrix init(static_cast<Eigen::Index>(sde.dim), static_cast<Eigen::Index>(grid.size()));
    for (std::size_t k = 0; k < batch.start; ++k) init.col(static_cast<Eigen::Index>(k)) = x.node(k);
    const Vector xt = x.at(t);
    for (std::size_t k = batch.start; k < grid.size(); ++k) init.col(static_cast<Eigen::Index>(k)) = xt;
    const Path initial(grid, std::move(init));

    const CounterRng rng(cfg.seed);
    const auto d = static_cast<Eigen::Index>(sde.dim);
    const auto m = static_cast<Eigen::Index>(sde.noise_dim);
    batch.trajectories.resize(cfg.trajectories, {initial, {}});
    for_each_index(cfg.exec, cfg.trajectories, [&](std::size_t traj) {
        Path p = initial;
        std::vector<Matrix> qv(grid.size() - 1, Matrix::Zero(d, d));
        Vector dB(m);
        for (std::size_t k = 0; k < steps; ++k) {
            const std::size_t j = batch.start + k;
            const double tk = grid[j];
            const double dt = grid[j + 1] - tk;
            const double a = sde.actions[batch.actions[k]];
            const Vector b = sde.drift(tk, p, a);
            const Matrix s = sde.diffusion(tk, p, a);
            if (b.size() != d || s.rows() != d || s.cols() != m)
                throw std::invalid_argument("simulate: coefficient shape does not match the SDE");
            const double scale = std::sqrt(dt / static_cast<double>(cfg.noise_substeps));
            for (Eigen::Index c = 0; c < m; ++c) {
                double acc = 0.0;
                for (std::size_t q = 0; q < cfg.noise_substeps; ++q)
                    acc += rng.normal(traj, k * cfg.noise_substeps + q, static_cast<std::uint64_t>(c));
                dB(c) = scale * acc;
            }
            p.hold_from(j + 1, p.node(j) + b * dt + s * dB);
            qv[j] = s * s.transpose() * dt;
        }
        batch.trajectories[traj] = {std::move(p), std::move(qv)};
    });
    return batch;
}

std::vector<ContinuityRow> continuity_diagnostic(const ControlledSDE& sde, double t, const Path& x,
                                                 std::span<const std::size_t> actions, std::span<const double> r_values,
                                                 const SimConfig& cfg) {
    const double T = x.horizon();
    for (double r : r_values)
        if (!(r >= t && r <= T)) throw std::domain_error("continuity_diagnostic: r must lie in [t, T]");
    if (actions.empty()) throw std::invalid_argument("continuity_diagnostic: no actions");
    std::vector<ContinuityRow> rows;
    for (double r : r_values) rows.push_back({r, -1.0, 0.0, 0});
    const Vector xt = x.at(t);
    for (std::size_t a : actions) {
        const Batch batch = simulate(sde, t, x, PiecewiseConstantControl::constant(t, T, a), cfg);
        for (auto& row : rows) {
            std::vector<double> v(batch.size());
            for (std::size_t i = 0; i < batch.size(); ++i) {
                const Path& p = batch.path(i);
                // |X(s) - x(t)|^2 is convex on each segment: nodes in [t, r] and r itself suffice
                double best = (p.at(row.r) - xt).squaredNorm();
                for (std::size_t k = batch.start; k < p.size() && p.time(k) <= row.r; ++k)
                    best = std::max(best, (p.node(k) - xt).squaredNorm());
                v[i] = best;
            }
            const Estimate e = summarize(v);
            if (e.mean > row.value) row = {row.r, e.mean, e.std_error, a};
        }
    }
    return rows;
}

double sup_moment(const Batch& batch, double p) {
    if (batch.size() == 0) throw std::domain_error("sup_moment: empty batch");
    if (!(p >= 1.0)) throw std::domain_error("sup_moment: order must be at least 1");
    double acc = 0.0;
    for (const auto& tr : batch.trajectories) acc += std::pow(sup_norm(tr.path), p);
    return std::pow(acc / static_cast<double>(batch.size()), 1.0 / p);
}

void write_csv(std::ostream& out, const Batch& batch) {
    const std::size_t d = batch.size() ? batch.path(0).dim() : 0;
    out << "traj,s";
    for (std::size_t i = 1; i <= d; ++i) out << ",x" << i;
    out << '\n';
    out.precision(17);
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const Path& p = batch.path(k);
        for (std::size_t j = 0; j < p.size(); ++j) {
            out << k << ',' << p.time(j);
            for (Eigen::Index i = 0; i < p.values().rows(); ++i) out << ',' << p.node(j)(i);
            out << '\n';
        }
    }
}

}  // namespace pathctl
