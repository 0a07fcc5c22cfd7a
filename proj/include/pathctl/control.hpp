#pragma once

#include "pathctl/mollification.hpp"
#include "pathctl/sde.hpp"

#include <functional>
#include <limits>
#include <string>

namespace pathctl {

/// Terminal reward g(x) with declared constants.
struct TerminalCost {
    std::function<double(const Path&)> eval;
    double lipschitz = 0.0;
    double bound = std::numeric_limits<double>::infinity();

    double operator()(const Path& x) const { return eval(x); }
};

/// Maximize E[int_t^T f(s, X, a_s) ds + g(X)] over controls with values in
/// the SDE's action set. An empty running cost means f = 0.
struct ControlProblem {
    std::string id;
    ControlledSDE sde;
    CoefficientSpec running;
    TerminalCost terminal;
    double horizon = 1.0;

    double running_cost(double t, const Path& x, double a) const { return running.eval ? running.eval(t, x, a) : 0.0; }
};

void validate(const ControlProblem& problem);

struct ValueEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    /// The maximizing control; no intervals when t = T.
    PiecewiseConstantControl control;
};

enum class Search { exhaustive, greedy };

struct ValueConfig {
    SimConfig sim;
    Search search = Search::exhaustive;
    /// Exhaustive search refuses more candidates than this.
    std::size_t max_candidates = 100000;
    /// How candidate controls are distributed; trajectories follow sim.exec.
    Execution candidates = Execution::serial;
};

/// Monte Carlo reward with a left-point sum for the running cost.
ValueEstimate reward(const ControlProblem& problem, double t, const Path& x, const PiecewiseConstantControl& control,
                     const SimConfig& cfg);

/// Best reward over piecewise-constant controls on the uniform m-interval
/// grid of [t, T], all candidates on common random numbers. Exhaustive
/// search enumerates |A|^m candidates in lexicographic order (ties keep the
/// first) and throws std::length_error past max_candidates; greedy search
/// does coordinate sweeps from the all-first-action control.
ValueEstimate value(const ControlProblem& problem, double t, const Path& x, std::size_t m, const ValueConfig& cfg);

struct DppResult {
    double residual = 0.0;
    double std_error = 0.0;
    double value = 0.0;      // v(t, x)
    double recursion = 0.0;  // sup over first legs of E[int_t^s f + v(s, X)]
};

/// |v(t,x) - sup_{first leg} E[int_t^s f + v(s, X)]|. The first leg uses
/// round(m (s - t) / (T - t)) intervals on [t, s] and the sim seed of the
/// outer estimate; the inner value for trajectory k uses the remaining
/// intervals and the child seed (k). Exactly zero at s = t and s = T.
DppResult dpp_residual(const ControlProblem& problem, double t, double s, const Path& x, std::size_t m,
                       const ValueConfig& cfg);

struct HamiltonianValue {
    double value;        // F = -max_a {<b, p> + 1/2 tr(sigma sigma^T M) + f}
    std::size_t action;  // first maximizer
};

HamiltonianValue hamiltonian(const ControlProblem& problem, double t, const Path& x, const Vector& p, const Matrix& M);

/// E[int_t^{s0} f(r, X, a0) dr + terminal(X(. ^ s0))] under the constant
/// action a0 (an index into the action set).
ValueEstimate fixed_control_value(const ControlProblem& problem, double s0, std::size_t a0,
                                  const std::function<double(const Path&)>& terminal, double t, const Path& x,
                                  const SimConfig& cfg);

}  // namespace pathctl
