#include "pathctl/control.hpp"

#include "pathctl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pathctl {

namespace {

double tolerance(double horizon) { return 1e-13 * std::max(1.0, horizon); }

void require_path(const ControlProblem& problem, double t, const Path& x) {
    if (std::abs(x.horizon() - problem.horizon) > tolerance(problem.horizon))
        throw std::invalid_argument("path horizon does not match the problem horizon");
    if (!(t >= 0.0 && t <= problem.horizon)) throw std::domain_error("t must lie in [0, T]");
}

// One reward sample per trajectory: running cost over the Euler steps plus
// terminal(X held after stop_at).
template <typename Terminal>
std::vector<double> leg_samples(const ControlProblem& problem, double t, const Path& x,
                                const PiecewiseConstantControl& control, const SimConfig& cfg, double stop_at,
                                Terminal&& terminal) {
    const Batch batch = simulate(problem.sde, t, x, control, cfg, stop_at);
    std::vector<double> out(batch.size());
    for_each_index(cfg.exec, batch.size(), [&](std::size_t i) {
        const Path& p = batch.path(i);
        double acc = 0.0;
        if (problem.running.eval)
            for (std::size_t j = batch.start; j < batch.stop; ++j) {
                const double a = problem.sde.actions[batch.actions[j - batch.start]];
                acc += problem.running_cost(p.time(j), p, a) * (p.time(j + 1) - p.time(j));
            }
        out[i] = acc + terminal(i, p);
    });
    return out;
}

std::size_t checked_power(std::size_t base, std::size_t exp, std::size_t limit) {
    std::size_t n = 1;
    for (std::size_t i = 0; i < exp; ++i) {
        if (n > limit / base) throw std::length_error("exhaustive search over more than " + std::to_string(limit) +
                                                      " candidates (|A|^m = " + std::to_string(base) + "^" +
                                                      std::to_string(exp) + ")");
        n *= base;
    }
    return n;
}

// Lexicographic: the first interval is the most significant digit.
void decode(std::size_t code, std::size_t base, std::vector<std::size_t>& index) {
    for (std::size_t i = index.size(); i-- > 0;) {
        index[i] = code % base;
        code /= base;
    }
}

struct Candidate {
    PiecewiseConstantControl control;
    Estimate estimate;
};

// Exhaustive best-of over one switching grid; scorer maps a control to an estimate.
template <typename Scorer>
Candidate best_of(const PiecewiseConstantControl& shape, std::size_t actions, std::size_t limit, Execution exec,
                  Scorer&& score) {
    const std::size_t count = checked_power(actions, shape.intervals(), limit);
    std::vector<Estimate> est(count);
    for_each_index(exec, count, [&](std::size_t c) {
        PiecewiseConstantControl u = shape;
        decode(c, actions, u.index);
        est[c] = score(u);
    });
    std::size_t best = 0;
    for (std::size_t c = 1; c < count; ++c)
        if (est[c].mean > est[best].mean) best = c;
    Candidate out{shape, est[best]};
    decode(best, actions, out.control.index);
    return out;
}

template <typename Scorer>
Candidate greedy(const PiecewiseConstantControl& shape, std::size_t actions, Execution exec, Scorer&& score) {
    Candidate cur{shape, score(shape)};
    for (std::size_t sweep = 0; sweep < 2 * shape.intervals() + 2; ++sweep) {
        bool improved = false;
        for (std::size_t i = 0; i < shape.intervals(); ++i) {
            std::vector<Estimate> est(actions);
            for_each_index(exec, actions, [&](std::size_t a) {
                PiecewiseConstantControl u = cur.control;
                u.index[i] = a;
                est[a] = score(u);
            });
            for (std::size_t a = 0; a < actions; ++a)
                if (est[a].mean > cur.estimate.mean) {
                    cur.control.index[i] = a;
                    cur.estimate = est[a];
                    improved = true;
                }
        }
        if (!improved) break;
    }
    return cur;
}

template <typename Scorer>
Candidate search(const PiecewiseConstantControl& shape, std::size_t actions, const ValueConfig& cfg, Scorer&& score) {
    return cfg.search == Search::exhaustive ? best_of(shape, actions, cfg.max_candidates, cfg.candidates, score)
                                            : greedy(shape, actions, cfg.candidates, score);
}

}  // namespace

void validate(const ControlProblem& problem) {
    validate(problem.sde);
    if (!problem.terminal.eval) throw std::invalid_argument("ControlProblem: terminal reward is required");
    if (!(problem.horizon > 0.0) || !std::isfinite(problem.horizon))
        throw std::invalid_argument("ControlProblem: horizon must be positive");
}

ValueEstimate reward(const ControlProblem& problem, double t, const Path& x, const PiecewiseConstantControl& control,
                     const SimConfig& cfg) {
    validate(problem);
    require_path(problem, t, x);
    const auto v = leg_samples(problem, t, x, control, cfg, problem.horizon,
                               [&](std::size_t, const Path& p) { return problem.terminal(p); });
    const Estimate e = summarize(v);
    return {e.mean, e.std_error, control};
}

ValueEstimate value(const ControlProblem& problem, double t, const Path& x, std::size_t m, const ValueConfig& cfg) {
    validate(problem);
    require_path(problem, t, x);
    const double T = problem.horizon;
    if (T - t <= tolerance(T)) return {problem.terminal(stop(x, T)), 0.0, {}};
    const auto score = [&](const PiecewiseConstantControl& u) {
        return summarize(leg_samples(problem, t, x, u, cfg.sim, T,
                                     [&](std::size_t, const Path& p) { return problem.terminal(p); }));
    };
    const Candidate best = search(PiecewiseConstantControl::uniform(t, T, m), problem.sde.actions.size(), cfg, score);
    return {best.estimate.mean, best.estimate.std_error, best.control};
}

DppResult dpp_residual(const ControlProblem& problem, double t, double s, const Path& x, std::size_t m,
                       const ValueConfig& cfg) {
    validate(problem);
    require_path(problem, t, x);
    const double T = problem.horizon;
    const double tol = tolerance(T);
    if (!(s >= t && s <= T)) throw std::domain_error("dpp_residual: need t <= s <= T");
    if (m == 0) throw std::invalid_argument("dpp_residual: need at least one interval");
    const ValueEstimate v = value(problem, t, x, m, cfg);
    if (s - t <= tol) return {0.0, 0.0, v.mean, v.mean};

    const bool full = T - s <= tol;
    std::size_t m1 = m;
    if (!full) {
        const auto share = static_cast<std::size_t>(std::llround(static_cast<double>(m) * (s - t) / (T - t)));
        m1 = std::clamp<std::size_t>(share, 1, m > 1 ? m - 1 : 1);
    }
    const std::size_t m2 = m > m1 ? m - m1 : 1;
    const CounterRng parent(cfg.sim.seed);
    const auto score = [&](const PiecewiseConstantControl& u) {
        return summarize(leg_samples(problem, t, x, u, cfg.sim, full ? T : s, [&](std::size_t k, const Path& p) {
            if (full) return problem.terminal(p);
            ValueConfig inner = cfg;
            inner.sim.seed = parent.child(k).seed();
            return value(problem, s, p, m2, inner).mean;
        }));
    };
    const Candidate best =
        search(PiecewiseConstantControl::uniform(t, full ? T : s, m1), problem.sde.actions.size(), cfg, score);
    return {std::abs(v.mean - best.estimate.mean), std::hypot(v.std_error, best.estimate.std_error), v.mean,
            best.estimate.mean};
}

HamiltonianValue hamiltonian(const ControlProblem& problem, double t, const Path& x, const Vector& p, const Matrix& M) {
    validate(problem);
    const auto d = static_cast<Eigen::Index>(problem.sde.dim);
    if (p.size() != d || M.rows() != d || M.cols() != d) throw std::invalid_argument("hamiltonian: shape mismatch");
    if ((M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12 * (1.0 + M.cwiseAbs().maxCoeff()))
        throw std::invalid_argument("hamiltonian: M must be symmetric");
    HamiltonianValue best{0.0, 0};
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < problem.sde.actions.size(); ++i) {
        const double a = problem.sde.actions[i];
        const Matrix s = problem.sde.diffusion(t, x, a);
        const double h = problem.sde.drift(t, x, a).dot(p) + 0.5 * (s * s.transpose() * M).trace() +
                         problem.running_cost(t, x, a);
        if (h > top) {
            top = h;
            best.action = i;
        }
    }
    best.value = -top;
    return best;
}

ValueEstimate fixed_control_value(const ControlProblem& problem, double s0, std::size_t a0,
                                  const std::function<double(const Path&)>& terminal, double t, const Path& x,
                                  const SimConfig& cfg) {
    validate(problem);
    require_path(problem, t, x);
    if (!(s0 >= t && s0 <= problem.horizon)) throw std::domain_error("fixed_control_value: need t <= s0 <= T");
    if (a0 >= problem.sde.actions.size()) throw std::invalid_argument("fixed_control_value: action out of range");
    if (s0 - t <= tolerance(problem.horizon)) return {terminal(stop(x, t)), 0.0, {}};
    const auto u = PiecewiseConstantControl::constant(t, s0, a0);
    const Estimate e = summarize(leg_samples(problem, t, x, u, cfg, s0, [&](std::size_t, const Path& p) { return terminal(p); }));
    return {e.mean, e.std_error, u};
}

}  // namespace pathctl
