#pragma once

#include "pathctl/execution.hpp"
#include "pathctl/forward_integral.hpp"
#include "pathctl/functional.hpp"
#include "pathctl/path.hpp"
#include "pathctl/rng.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace pathctl {

/// Monte Carlo mean and its standard error.
struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Mean and standard error of a sample, in index order.
Estimate summarize(std::span<const double> samples);

/// Growth class of a scalar coefficient: |h| <= K everywhere, or
/// |h(t, 0, a)| <= K (linear growth through the Lipschitz bound).
enum class Growth { bounded, linear };

/// Non-anticipative scalar coefficient h(t, x, a) with declared constants.
struct CoefficientSpec {
    std::string name;
    std::size_t dim = 1;
    std::function<double(double, const Path&, double)> eval;
    /// |h(t,x,a) - h(t,x',a)| <= K ||x - x'||_t, and the growth bound.
    double lipschitz = 0.0;
    Growth growth = Growth::bounded;
    /// Time modulus w: |h(t, x(. ^ t), a) - h(s, x(. ^ t), a)| <= w(|t - s|)
    /// for s >= t. Empty means w == 0.
    std::function<double(double)> time_modulus;

    double operator()(double t, const Path& x, double a) const { return eval(t, x, a); }
    double modulus(double delta) const { return time_modulus ? time_modulus(delta) : 0.0; }
};

/// Throws std::invalid_argument when the declared constants are unusable.
void validate(const CoefficientSpec& h);

/// Largest observed violations of the declared constants.
struct CoefficientAudit {
    double lipschitz_excess = 0.0;   // max of |dh| - K ||dx||_t
    double growth_excess = 0.0;      // max of |h| - K (bounded) or |h| - K (1 + ||x||_t)
    double anticipation = 0.0;       // max of |h(t,x,a) - h(t,x(. ^ t),a)|
    std::size_t samples = 0;
};

CoefficientAudit audit(const CoefficientSpec& h, std::span<const double> actions, std::span<const Path> paths,
                       std::uint64_t seed);

/// Smooth step: 0 for r <= 0, 1 for r >= 1, 1 / (1 + e^{1/r} / e^{1/(1-r)})
/// in between.
double chi(double r);
double chi_derivative(double r);

/// phi_{n,j}(r) = 1 for r < t_j, 1 - chi(4^n (r - t_j)) after, t_j = j T / 2^n.
double cutoff_value(int n, int j, double horizon, double r);
double cutoff_derivative(int n, int j, double horizon, double r);
Weight cutoff(int n, int j, double horizon);
/// The 2^n + 1 cutoffs phi_{n,0..2^n}.
std::vector<Weight> cutoffs(int n, double horizon);

/// Time mollifier eta_n(s) = 2n / sqrt(2 pi) exp(-n^2 s^2 / 2).
double eta(int n, double s);

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};
const GaussRule& gauss_legendre(unsigned points);

struct MollifierConfig {
    int n = 2;
    std::size_t mc_samples = 256;
    unsigned time_quadrature_nodes = 32;
    std::uint64_t seed = 0;
    Execution exec = Execution::serial;
};

/// The smoothed coefficient
/// hbar_n(t, y, a) = int_0^inf int eta_n(s) zeta_n(z) h((t+s) ^ T, x^pol_{n, y+z}, a) ds dz
/// and h_n(t, x, a) = hbar_n(t, y_n^{t,x}, a) with y_n the cutoff coordinates.
///
/// The s-integral is Gauss-Legendre after r = n s, split at r = n (T - t)
/// with the Gaussian tail in closed form; at n = 0 the kernel degenerates
/// and the s-integral is evaluation at T. The z-integral is Monte Carlo with
/// z ~ N(0, (d (2^n + 1))^{-2} I), sample k keyed by (seed, k), shared across
/// all (t, y, a) so differences use common random numbers.
class MollifiedCoefficient {
public:
    MollifiedCoefficient(CoefficientSpec h, MollifierConfig cfg, double horizon);

    const CoefficientSpec& coefficient() const noexcept { return h_; }
    const MollifierConfig& config() const noexcept { return cfg_; }
    const std::vector<Weight>& weights() const noexcept { return weights_; }
    double horizon() const noexcept { return horizon_; }
    std::size_t lifted_dim() const noexcept { return h_.dim * weights_.size(); }
    /// Standard deviation of each coordinate of z.
    double z_scale() const noexcept;

    Vector lift(double t, const Path& x) const;
    /// Per-sample values of the s-integral, one per z draw.
    std::vector<double> samples(double t, const Vector& y, double a) const;
    Estimate core(double t, const Vector& y, double a) const;
    Estimate operator()(double t, const Path& x, double a) const;

    /// hbar_n(., ., a) as a cylindrical functional; core partials by central
    /// finite differences on the common-random-number mean.
    CylindricalFunctional as_cylindrical(double a) const;

private:
    double time_integral(double t, const Path& pol, double a) const;

    CoefficientSpec h_;
    MollifierConfig cfg_;
    double horizon_;
    std::vector<Weight> weights_;
    TimeGrid mesh_;
};

/// 3K osc(x, t, delta_n) + 2K / sqrt(d (2^n + 1))
///   + int_0^inf 2/sqrt(2 pi) e^{-r^2/2} w((t + r/n) ^ T - t) dr
/// with delta_n = max(T 2^{-n}, 4^{-n}), the mesh width of the polygonal
/// approximation or the cutoff transition, whichever is larger.
double error_bound_rhs(const CoefficientSpec& h, int n, const GaugePoint& p);

/// Fitted envelope |dt c| + |dy c| + |dyy c| <= K_n (1 + |y|)^q.
struct RegularityReport {
    int q = 0;
    double fitted_constant = 0.0;
    /// Worst ratio on the validation samples (drawn farther out than the fit).
    double validation_ratio = 0.0;
    bool envelope_holds = false;
    bool all_zero = false;
    std::size_t samples = 0;
};

/// Samples t in [0, horizon], fits K_n on |y| <= radius and validates on
/// radius < |y| <= 4 radius; the envelope holds when the validation ratio
/// stays below 1.5.
RegularityReport regularity_check(const CylindricalFunctional& hbar, int q, double horizon, std::size_t samples,
                                  double radius, std::uint64_t seed);

}  // namespace pathctl
