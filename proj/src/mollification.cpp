#include "pathctl/mollification.hpp"

#include <boost/math/special_functions/legendre.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace pathctl {

Estimate summarize(std::span<const double> samples) {
    if (samples.empty()) throw std::domain_error("summarize: empty sample");
    const auto n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double v : samples) mean += v;
    mean /= n;
    if (samples.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : samples) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

void validate(const CoefficientSpec& h) {
    if (!h.eval) throw std::invalid_argument("coefficient '" + h.name + "': no evaluator");
    if (h.dim == 0) throw std::invalid_argument("coefficient '" + h.name + "': dimension must be positive");
    if (!std::isfinite(h.lipschitz) || h.lipschitz < 0.0)
        throw std::invalid_argument("coefficient '" + h.name + "': Lipschitz constant must be finite and >= 0, got " +
                                    std::to_string(h.lipschitz));
}

CoefficientAudit audit(const CoefficientSpec& h, std::span<const double> actions, std::span<const Path> paths,
                       std::uint64_t seed) {
    validate(h);
    const CounterRng rng(seed);
    CoefficientAudit out;
    const double K = h.lipschitz;
    for (std::size_t i = 0; i < paths.size(); ++i) {
        const Path& x = paths[i];
        const Path& xp = paths[(i + 1) % paths.size()];
        const double t = x.horizon() * rng.uniform(i, 0, 0);
        for (double a : actions) {
            const double hx = h(t, x, a), hxp = h(t, xp, a);
            const double dist = seminorm(combine(1.0, x, -1.0, xp), t);
            out.lipschitz_excess = std::max(out.lipschitz_excess, std::abs(hx - hxp) - K * dist);
            const double cap = h.growth == Growth::bounded ? K : K * (1.0 + seminorm(x, t));
            out.growth_excess = std::max(out.growth_excess, std::abs(hx) - cap);
            out.anticipation = std::max(out.anticipation, std::abs(hx - h(t, stop(x, t), a)));
            ++out.samples;
        }
    }
    return out;
}

double chi(double r) {
    if (r <= 0.0) return 0.0;
    if (r >= 1.0) return 1.0;
    const double arg = std::clamp(1.0 / r - 1.0 / (1.0 - r), -700.0, 700.0);
    return 1.0 / (1.0 + std::exp(arg));
}

double chi_derivative(double r) {
    if (r <= 0.0 || r >= 1.0) return 0.0;
    const double s = chi(r);
    return s * (1.0 - s) * (1.0 / (r * r) + 1.0 / ((1.0 - r) * (1.0 - r)));
}

namespace {

double node_time(int n, int j, double horizon) { return horizon * static_cast<double>(j) / std::ldexp(1.0, n); }

void check_cutoff(int n, int j) {
    if (n < 0 || n > 20) throw std::domain_error("cutoff: level out of range");
    if (j < 0 || j > (1 << n)) throw std::domain_error("cutoff: index out of range");
}

}  // namespace

double cutoff_value(int n, int j, double horizon, double r) {
    check_cutoff(n, j);
    const double tj = node_time(n, j, horizon);
    return r < tj ? 1.0 : 1.0 - chi(std::ldexp(r - tj, 2 * n));
}

double cutoff_derivative(int n, int j, double horizon, double r) {
    check_cutoff(n, j);
    const double tj = node_time(n, j, horizon);
    return r < tj ? 0.0 : -std::ldexp(1.0, 2 * n) * chi_derivative(std::ldexp(r - tj, 2 * n));
}

Weight cutoff(int n, int j, double horizon) {
    check_cutoff(n, j);
    const double tj = node_time(n, j, horizon);
    const double end = tj + std::ldexp(1.0, -2 * n);
    Weight w;
    w.name = "cutoff(" + std::to_string(n) + "," + std::to_string(j) + ")";
    w.value = [n, j, horizon](double r) { return cutoff_value(n, j, horizon, r); };
    w.derivative = [n, j, horizon](double r) { return cutoff_derivative(n, j, horizon, r); };
    w.knots = {tj, end};
    w.support_lo = tj;
    w.support_hi = end;
    return w;
}

std::vector<Weight> cutoffs(int n, double horizon) {
    std::vector<Weight> out;
    for (int j = 0; j <= (1 << n); ++j) out.push_back(cutoff(n, j, horizon));
    return out;
}

double eta(int n, double s) {
    return 2.0 * n / std::sqrt(2.0 * std::numbers::pi) * std::exp(-0.5 * n * n * s * s);
}

const GaussRule& gauss_legendre(unsigned points) {
    if (points < 1 || points > 256) throw std::invalid_argument("gauss_legendre: 1..256 points supported");
    static std::mutex lock;
    static std::map<unsigned, GaussRule> cache;
    std::lock_guard guard(lock);
    auto it = cache.find(points);
    if (it != cache.end()) return it->second;
    GaussRule rule;
    for (double x : boost::math::legendre_p_zeros<double>(static_cast<int>(points))) {
        const double p = boost::math::legendre_p_prime(static_cast<int>(points), x);
        const double w = 2.0 / ((1.0 - x * x) * p * p);
        rule.nodes.push_back(x);
        rule.weights.push_back(w);
        if (x != 0.0) {
            rule.nodes.push_back(-x);
            rule.weights.push_back(w);
        }
    }
    return cache.emplace(points, std::move(rule)).first->second;
}

namespace {

constexpr double kHalfNormal = 2.0 / 2.5066282746310002;  // 2 / sqrt(2 pi)
constexpr double kTailCut = 12.0;  // erfc(12 / sqrt 2) ~ 2e-33

// int_0^inf 2/sqrt(2 pi) e^{-r^2/2} g(r) dr where g(r) = g(rstar) for r >= rstar.
// The discrete kernel is renormalized to unit mass, so constants are exact.
template <typename G>
double half_normal_integral(const GaussRule& rule, double rstar, G&& g) {
    if (!(rstar > 0.0)) return g(0.0);
    const double upper = std::min(rstar, kTailCut);
    const double tail = std::erfc(upper / std::numbers::sqrt2);
    double acc = 0.0, mass = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const double r = 0.5 * upper * (rule.nodes[i] + 1.0);
        const double w = 0.5 * upper * rule.weights[i] * kHalfNormal * std::exp(-0.5 * r * r);
        acc += w * g(r);
        mass += w;
    }
    return (acc + g(rstar) * tail) / (mass + tail);
}

}  // namespace

MollifiedCoefficient::MollifiedCoefficient(CoefficientSpec h, MollifierConfig cfg, double horizon)
    : h_(std::move(h)), cfg_(cfg), horizon_(horizon), mesh_(TimeGrid::dyadic(horizon, std::max(cfg.n, 0))) {
    validate(h_);
    if (cfg_.n < 0 || cfg_.n > 12) throw std::domain_error("MollifierConfig: n must be in [0, 12]");
    if (cfg_.mc_samples < 1) throw std::domain_error("MollifierConfig: mc_samples must be >= 1");
    gauss_legendre(cfg_.time_quadrature_nodes);
    weights_ = cutoffs(cfg_.n, horizon_);
}

double MollifiedCoefficient::z_scale() const noexcept { return 1.0 / static_cast<double>(lifted_dim()); }

Vector MollifiedCoefficient::lift(double t, const Path& x) const {
    if (x.dim() != h_.dim) throw std::invalid_argument("MollifiedCoefficient: path dimension mismatch");
    return lifted_coordinates(weights_, x, t);
}

double MollifiedCoefficient::time_integral(double t, const Path& pol, double a) const {
    const int n = cfg_.n;
    if (n == 0) return h_(horizon_, pol, a);
    const double rstar = n * (horizon_ - t);
    return half_normal_integral(gauss_legendre(cfg_.time_quadrature_nodes), rstar,
                                [&](double r) { return h_(std::min(t + r / n, horizon_), pol, a); });
}

std::vector<double> MollifiedCoefficient::samples(double t, const Vector& y, double a) const {
    if (static_cast<std::size_t>(y.size()) != lifted_dim())
        throw std::invalid_argument("MollifiedCoefficient: lifted coordinate size mismatch");
    const auto d = static_cast<Eigen::Index>(h_.dim);
    const auto cols = static_cast<Eigen::Index>(weights_.size());
    const CounterRng rng(cfg_.seed);
    const double scale = z_scale();
    std::vector<double> out(cfg_.mc_samples);
    for_each_index(cfg_.exec, cfg_.mc_samples, [&](std::size_t k) {
        Matrix nodes(d, cols);
        for (Eigen::Index j = 0; j < cols; ++j)
            for (Eigen::Index i = 0; i < d; ++i) {
                const auto c = static_cast<std::uint64_t>(j * d + i);
                nodes(i, j) = y(j * d + i) + scale * rng.normal(k, c, 0);
            }
        out[k] = time_integral(t, Path(mesh_, std::move(nodes)), a);
    });
    return out;
}

Estimate MollifiedCoefficient::core(double t, const Vector& y, double a) const { return summarize(samples(t, y, a)); }

Estimate MollifiedCoefficient::operator()(double t, const Path& x, double a) const { return core(t, lift(t, x), a); }

CylindricalFunctional MollifiedCoefficient::as_cylindrical(double a) const {
    auto self = std::make_shared<const MollifiedCoefficient>(*this);
    Core c = finite_difference_core([self, a](double t, const Vector& y) { return self->core(t, y, a).mean; }, horizon_,
                                    1e-5 * horizon_, 1e-4);
    return CylindricalFunctional(std::move(c), weights_, h_.dim);
}

double error_bound_rhs(const CoefficientSpec& h, int n, const GaugePoint& p) {
    validate(h);
    if (n < 0) throw std::domain_error("error_bound_rhs: n must be >= 0");
    const double K = h.lipschitz;
    const double T = p.path.horizon();
    const double delta = std::max(T * std::ldexp(1.0, -n), std::ldexp(1.0, -2 * n));
    const double dn = static_cast<double>(h.dim) * (std::ldexp(1.0, n) + 1.0);
    double time_term = 0.0;
    if (h.time_modulus) {
        const double rem = T - p.t;
        time_term = n == 0 ? h.modulus(rem)
                           : half_normal_integral(gauss_legendre(32), n * rem,
                                                  [&](double r) { return h.modulus(std::min(r / n, rem)); });
    }
    return 3.0 * K * oscillation(p.path, p.t, delta) + 2.0 * K / std::sqrt(dn) + time_term;
}

RegularityReport regularity_check(const CylindricalFunctional& hbar, int q, double horizon, std::size_t samples,
                                  double radius, std::uint64_t seed) {
    if (q != 0 && q != 1) throw std::invalid_argument("regularity_check: q must be 0 or 1");
    const CounterRng rng(seed);
    const auto k = static_cast<Eigen::Index>(hbar.lifted_dim());
    const Core& c = hbar.core();
    auto magnitude = [&](double t, const Vector& y) {
        return std::abs(c.dt(t, y)) + c.dy(t, y).norm() + c.dyy(t, y).norm();
    };
    auto draw = [&](std::size_t i, double lo, double hi) {
        Vector dir(k);
        for (Eigen::Index j = 0; j < k; ++j) dir(j) = rng.normal(i, static_cast<std::uint64_t>(j), 1);
        const double r = lo + (hi - lo) * rng.uniform(i, 0, 2);
        return Vector(dir.normalized() * r);
    };
    RegularityReport rep;
    rep.q = q;
    rep.all_zero = true;
    const std::size_t fit = samples / 2;
    for (std::size_t i = 0; i < samples; ++i) {
        const bool fitting = i < fit;
        const double t = horizon * rng.uniform(i, 0, 3);
        const Vector y = fitting ? draw(i, 0.0, radius) : draw(i, radius, 4.0 * radius);
        const double m = magnitude(t, y);
        if (m > 1e-12) rep.all_zero = false;
        const double ratio = m / std::pow(1.0 + y.norm(), q);
        if (fitting)
            rep.fitted_constant = std::max(rep.fitted_constant, ratio);
        else
            rep.validation_ratio = std::max(rep.validation_ratio, ratio);
        ++rep.samples;
    }
    if (rep.fitted_constant > 0.0) rep.validation_ratio /= rep.fitted_constant;
    rep.envelope_holds = rep.all_zero || rep.validation_ratio <= 1.5;
    rep.fitted_constant = std::max(rep.fitted_constant, rep.validation_ratio * rep.fitted_constant);
    return rep;
}

}  // namespace pathctl
