#include "pathctl/gauge.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace pathctl {

double kappa_infinity(const GaugePoint& a, const GaugePoint& b) {
    const double M = stopped_distance(a, b);
    if (M == 0.0) return 0.0;
    const double e = std::min((a.path.at(a.t) - b.path.at(b.t)).norm(), M);
    const double M2 = M * M, e2 = e * e;
    const double gap = M2 - e2;
    return gap * gap * gap / (M2 * M2) + 3.0 * e2;
}

GaugeValue rho_infinity(const GaugePoint& a, const GaugePoint& b) {
    if (a.t < b.t) return GaugeValue::infinity();
    const double k = kappa_infinity(a, b);
    return GaugeValue::finite((a.t - b.t) * (a.t - b.t) + k / (1.0 + k));
}

double chi_infinity(const GaugePoint& p, const GaugePoint& anchor) {
    const double k = kappa_infinity(p, anchor);
    return k / (1.0 + k);
}

ComparisonWeight phi_comparison(double t) {
    const double t12 = std::pow(t, 12);
    const double t13 = t12 * t;
    return {2.0 / std::numbers::pi * std::atan(t13) + 1.0, 2.0 / std::numbers::pi * 13.0 * t12 / (1.0 + t13 * t13)};
}

PathDerivatives kappa_derivatives(const GaugePoint& a, const GaugePoint& center, double h) {
    if (a.t < center.t) throw std::domain_error("kappa_derivatives: t must not precede the center time");
    const PathFunctional k{[center](double t, const Path& x) { return kappa_infinity({t, x}, center); }, true};
    return {horizontal_derivative(k, a, h).value, vertical_gradient(k, a, h), vertical_hessian(k, a, h)};
}

GaugeValue PerturbationPhi::operator()(const GaugePoint& p) const {
    double acc = 0.0;
    double w = 1.0;
    for (const auto& c : centers) {
        const GaugeValue r = rho_infinity(p, c);
        if (r.infinite) return GaugeValue::infinity();
        acc += w * r.value;
        w *= 0.5;
    }
    // the remaining weights sum to the last one used, 2^{-j}
    const GaugeValue r = rho_infinity(p, limit);
    if (r.infinite) return GaugeValue::infinity();
    return GaugeValue::finite(acc + 2.0 * w * r.value);
}

VariationalResult borwein_preiss(std::span<const double> G, std::span<const GaugePoint> candidates, double delta,
                                 std::size_t max_iterations, std::ptrdiff_t start, Execution exec) {
    const std::size_t n = candidates.size();
    if (n == 0) throw std::domain_error("borwein_preiss: empty candidate set");
    if (G.size() != n) throw std::invalid_argument("borwein_preiss: one G value per candidate");
    if (!(delta > 0.0 && delta < 1.0)) throw std::domain_error("borwein_preiss: delta must lie in (0, 1)");
    for (double g : G)
        if (!std::isfinite(g)) throw std::domain_error("borwein_preiss: G must be finite on the candidates");

    const double top = *std::max_element(G.begin(), G.end());
    std::size_t s0 = 0;
    if (start < 0) {
        while (G[s0] < top - delta * delta) ++s0;
    } else {
        s0 = static_cast<std::size_t>(start);
        if (s0 >= n || G[s0] < top - delta * delta)
            throw std::domain_error("borwein_preiss: start must satisfy G >= max G - delta^2");
    }

    // F holds F_j on the admissible set; excluded candidates are marked.
    std::vector<double> F(G.begin(), G.end());
    std::vector<char> admissible(n, 1);
    VariationalResult out{s0, s0, {{}, candidates[s0]}, {s0}, {}, false};
    std::size_t current = s0;
    double weight = delta;
    for (std::size_t j = 0; j < max_iterations; ++j) {
        // F_j = F_{j-1} - delta 2^{-j} rho(., c_j), then S_j = {F_j >= F_j(c_j)}
        const GaugePoint& c = candidates[current];
        for_each_index(exec, n, [&](std::size_t i) {
            if (!admissible[i]) return;
            const GaugeValue r = rho_infinity(candidates[i], c);
            if (r.infinite)
                admissible[i] = 0;
            else
                F[i] -= weight * r.value;
        });
        const double floor = F[current];
        std::size_t count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (admissible[i] && F[i] < floor) admissible[i] = 0;
            count += admissible[i];
        }
        std::size_t best = current;
        for (std::size_t i = 0; i < n; ++i)
            if (admissible[i] && F[i] > F[best]) best = i;
        out.trace.push_back({best, F[best], count});
        if (best == current) {
            out.converged = true;
            break;
        }
        current = best;
        out.center_indices.push_back(current);
        weight *= 0.5;
    }
    out.bar = current;
    for (std::size_t i : out.center_indices) out.phi.centers.push_back(candidates[i]);
    out.phi.limit = candidates[current];
    return out;
}

VariationalCheck verify_variational(const VariationalResult& r, std::span<const double> G,
                                    std::span<const GaugePoint> candidates, double delta) {
    VariationalCheck out;
    const GaugePoint& bar = candidates[r.bar];
    out.localization = rho_infinity(bar, candidates[r.start]) <= delta;
    double bound = delta;
    for (std::size_t i = 1; i < r.phi.centers.size(); ++i) {
        bound *= 0.5;
        out.localization = out.localization && rho_infinity(bar, r.phi.centers[i]) <= bound;
    }
    const GaugeValue phi_bar = r.phi(bar);
    if (phi_bar.infinite) return out;
    const double top = G[r.bar] - delta * phi_bar.value;
    out.improvement = G[r.start] <= top;
    out.strict_gap = std::numeric_limits<double>::infinity();
    out.strict_maximum = true;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (i == r.bar || d_infinity(candidates[i], bar) == 0.0) continue;
        const GaugeValue p = r.phi(candidates[i]);
        if (p.infinite) continue;
        const double gap = top - (G[i] - delta * p.value);
        out.strict_gap = std::min(out.strict_gap, gap);
        if (!(gap > 0.0)) out.strict_maximum = false;
    }
    out.time_order = candidates[r.start].t <= bar.t;
    for (const auto& c : r.phi.centers) out.time_order = out.time_order && c.t <= bar.t;
    return out;
}

VariationalResult borwein_preiss(const std::function<double(const GaugePoint&)>& G,
                                 std::span<const GaugePoint> candidates, double delta, std::size_t max_iterations,
                                 Execution exec) {
    std::vector<double> g(candidates.size());
    for_each_index(exec, candidates.size(), [&](std::size_t i) { g[i] = G(candidates[i]); });
    return borwein_preiss(g, candidates, delta, max_iterations, -1, exec);
}

}  // namespace pathctl
