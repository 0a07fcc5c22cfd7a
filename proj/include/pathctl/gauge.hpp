#pragma once

#include "pathctl/execution.hpp"
#include "pathctl/functional.hpp"
#include "pathctl/path.hpp"

#include <functional>
#include <span>
#include <vector>

namespace pathctl {

/// Nonnegative value or a tagged +infinity. Arithmetic never touches the
/// infinite case, so no float infinities or NaNs leak into G - delta phi.
struct GaugeValue {
    double value = 0.0;
    bool infinite = false;

    static GaugeValue finite(double v) { return {v, false}; }
    static GaugeValue infinity() { return {0.0, true}; }

    friend bool operator<=(const GaugeValue& a, double bound) { return !a.infinite && a.value <= bound; }
};

/// With M = ||x(. ^ t) - x'(. ^ t')||_T and e = |x(t) - x'(t')| <= M:
/// (M^2 - e^2)^3 / M^4 + 3 e^2, and 0 when M = 0. Lies in [M^2, 3 M^2].
double kappa_infinity(const GaugePoint& a, const GaugePoint& b);

/// |t - t'|^2 + kappa / (1 + kappa) for t >= t', +infinity for t < t'.
GaugeValue rho_infinity(const GaugePoint& a, const GaugePoint& b);

/// kappa / (1 + kappa) against a fixed anchor; in [0, 1).
double chi_infinity(const GaugePoint& p, const GaugePoint& anchor);

struct ComparisonWeight {
    double value;
    double derivative;
};

/// (2 / pi) arctan(t^13) + 1 and its derivative.
ComparisonWeight phi_comparison(double t);

/// Finite-difference pathwise derivatives of (t, x) -> kappa((t, x), center):
/// forward horizontal step h, central vertical steps h. Throws
/// std::domain_error when a.t < center.t.
PathDerivatives kappa_derivatives(const GaugePoint& a, const GaugePoint& center, double h);

/// phi = sum_i 2^{-i} rho(., c_i) over the centers c_0 (the start point),
/// c_1, ..., c_j, plus the tail sum_{i>j} 2^{-i} rho(., bar) = 2^{-j} rho(., bar)
/// of the sequence that stays at the limit point bar.
struct PerturbationPhi {
    std::vector<GaugePoint> centers;
    GaugePoint limit;

    GaugeValue operator()(const GaugePoint& p) const;
};

struct VariationalStep {
    std::size_t center;      // candidate index chosen as c_{j+1}
    double objective;        // G - delta sum_{k<=j} 2^{-k} rho(., c_k) at it
    std::size_t admissible;  // size of the nested admissible set
};

struct VariationalResult {
    std::size_t start;  // index of (t_delta, x_delta)
    std::size_t bar;    // index of the strict maximizer of G - delta phi
    PerturbationPhi phi;
    std::vector<std::size_t> center_indices;
    std::vector<VariationalStep> trace;
    bool converged;
};

/// Borwein-Preiss iteration with gauge rho over a finite candidate set.
/// F_j = G - delta sum_{k<=j} 2^{-k} rho(., c_k); the admissible sets
/// S_j = {x in S_{j-1} : F_j(x) >= F_j(c_j)} are nested and c_{j+1} is the
/// maximizer of F_j on S_j, ties going to c_j and then to the lowest index.
/// Stops when the maximizer repeats or after max_iterations. The start is
/// the first candidate with G >= max G - delta^2 unless given.
VariationalResult borwein_preiss(std::span<const double> G, std::span<const GaugePoint> candidates, double delta,
                                 std::size_t max_iterations = 64, std::ptrdiff_t start = -1,
                                 Execution exec = Execution::serial);

/// Items of the variational principle checked over the whole candidate set:
/// i) rho(bar, c_i) <= delta / 2^i (i >= 1) and rho(bar, c_0) <= delta;
/// ii) G(c_0) <= G(bar) - delta phi(bar); iii) G - delta phi < its value at
/// bar at every candidate at positive d_infinity from bar; iv) every center
/// time is at most t_bar.
struct VariationalCheck {
    bool localization = false;
    bool improvement = false;
    bool strict_maximum = false;
    bool time_order = false;
    /// Smallest gap (G - delta phi)(bar) - (G - delta phi)(x) over finite
    /// competitors; +inf when there are none.
    double strict_gap = 0.0;

    bool all() const noexcept { return localization && improvement && strict_maximum && time_order; }
};

VariationalCheck verify_variational(const VariationalResult& r, std::span<const double> G,
                                    std::span<const GaugePoint> candidates, double delta);

/// Evaluate G on every candidate, then run borwein_preiss.
VariationalResult borwein_preiss(const std::function<double(const GaugePoint&)>& G,
                                 std::span<const GaugePoint> candidates, double delta, std::size_t max_iterations = 64,
                                 Execution exec = Execution::serial);

}  // namespace pathctl
