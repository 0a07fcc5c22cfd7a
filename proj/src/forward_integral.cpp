#include "pathctl/forward_integral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pathctl {

Weight Weight::one() { return constant_value(1.0); }

Weight Weight::constant_value(double c) {
    return Weight{"const(" + std::to_string(c) + ")", [c](double) { return c; }, [](double) { return 0.0; }, {}, true};
}

Weight Weight::identity() {
    return Weight{"s", [](double s) { return s; }, [](double) { return 1.0; }, {}, false};
}

Weight Weight::exponential(double rate) {
    return Weight{"exp(" + std::to_string(rate) + "s)", [rate](double s) { return std::exp(rate * s); },
                  [rate](double s) { return rate * std::exp(rate * s); }, {}, false};
}

Weight Weight::cosine(double freq) {
    return Weight{"cos(" + std::to_string(freq) + "s)", [freq](double s) { return std::cos(freq * s); },
                  [freq](double s) { return -freq * std::sin(freq * s); }, {}, false};
}

namespace {

void check_options(const QuadratureOptions& opts) {
    if (opts.subdivisions < 2 || opts.subdivisions % 2 != 0)
        throw std::invalid_argument("QuadratureOptions: subdivisions must be even and >= 2");
}

// Sorted breakpoints in [0, t]: the path nodes, the weight knots and any
// extra points, deduplicated.
std::vector<double> breakpoints(const Path& path, const Weight& phi, double t, std::span<const double> extra = {}) {
    std::vector<double> pts{0.0, t};
    for (double s : path.grid().times())
        if (s > 0.0 && s < t) pts.push_back(s);
    for (double s : phi.knots)
        if (s > 0.0 && s < t) pts.push_back(s);
    for (double s : extra)
        if (s > 0.0 && s < t) pts.push_back(s);
    std::sort(pts.begin(), pts.end());
    const double tol = 1e-15 * std::max(1.0, t);
    std::vector<double> out;
    for (double s : pts)
        if (out.empty() || s - out.back() > tol) out.push_back(s);
    if (out.size() == 1) out.push_back(t);
    return out;
}

// Simpson rule for int_a^b (1 - l) phi'(s) ds and int_a^b l phi'(s) ds with
// l = (s - a) / (b - a); the path is linear on [a, b].
std::pair<double, double> linear_moments(const Weight& phi, double a, double b, int panels) {
    if (b <= phi.support_lo || a >= phi.support_hi) return {0.0, 0.0};
    const double h = (b - a) / panels;
    double i0 = 0.0, i1 = 0.0;
    for (int k = 0; k <= panels; ++k) {
        const double w = (k == 0 || k == panels) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
        const double l = static_cast<double>(k) / panels;
        const double d = phi.derivative(a + k * h);
        i0 += w * (1.0 - l) * d;
        i1 += w * l * d;
    }
    return {i0 * h / 3.0, i1 * h / 3.0};
}

void require_horizon(const Path& path, double t, const char* what) {
    if (!(t >= 0.0 && t <= path.horizon() * (1.0 + 1e-14)))
        throw std::domain_error(std::string(what) + ": t outside [0, T]");
}

}  // namespace

Vector integrate_ibp(const Weight& phi, const Path& path, double t, QuadratureOptions opts) {
    check_options(opts);
    require_horizon(path, t, "integrate_ibp");
    t = std::min(t, path.horizon());
    Vector result = phi.value(t) * path.at(t);
    if (phi.constant || t <= 0.0) return result;
    const auto pts = breakpoints(path, phi, t);
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double a = pts[k], b = pts[k + 1];
        const auto [i0, i1] = linear_moments(phi, a, b, opts.subdivisions);
        result -= i0 * path.at(a) + i1 * path.at(b);
    }
    return result;
}

Vector integrate_regularized(const Weight& phi, const Path& path, double t, double epsilon, QuadratureOptions opts) {
    check_options(opts);
    require_horizon(path, t, "integrate_regularized");
    if (!(epsilon > 0.0)) throw std::domain_error("integrate_regularized: epsilon must be positive");
    t = std::min(t, path.horizon());
    Vector result = phi.value(0.0) * path.at(0.0);
    if (t <= 0.0) return result;
    // The integrand has kinks where s + eps crosses a node or reaches t.
    std::vector<double> shifted{t - epsilon};
    for (double s : path.grid().times()) shifted.push_back(s - epsilon);
    const auto pts = breakpoints(path, phi, t, shifted);
    const int panels = opts.subdivisions;
    for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
        const double a = pts[k], b = pts[k + 1];
        const double h = (b - a) / panels;
        Vector acc = Vector::Zero(static_cast<Eigen::Index>(path.dim()));
        for (int j = 0; j <= panels; ++j) {
            const double s = a + j * h;
            const double w = (j == 0 || j == panels) ? 1.0 : (j % 2 == 1 ? 4.0 : 2.0);
            acc += (w * phi.value(s)) * (path.at(std::min(t, s + epsilon)) - path.at(s));
        }
        result += acc * (h / (3.0 * epsilon));
    }
    return result;
}

Vector lifted_coordinates(std::span<const Weight> weights, const Path& path, double t, QuadratureOptions opts) {
    const auto d = static_cast<Eigen::Index>(path.dim());
    Vector y(d * static_cast<Eigen::Index>(weights.size()));
    for (std::size_t j = 0; j < weights.size(); ++j)
        y.segment(static_cast<Eigen::Index>(j) * d, d) = integrate_ibp(weights[j], path, t, opts);
    return y;
}

Matrix lifted_coordinates_along(std::span<const Weight> weights, const Path& path, QuadratureOptions opts) {
    check_options(opts);
    const auto d = static_cast<Eigen::Index>(path.dim());
    const auto n = static_cast<Eigen::Index>(path.size());
    Matrix out(d * static_cast<Eigen::Index>(weights.size()), n);
    for (std::size_t j = 0; j < weights.size(); ++j) {
        const Weight& phi = weights[j];
        const auto row = static_cast<Eigen::Index>(j) * d;
        Vector running = Vector::Zero(d);  // int_0^{t_k} x phi' ds
        out.block(row, 0, d, 1) = phi.value(0.0) * path.node(0);
        for (std::size_t k = 0; k + 1 < path.size(); ++k) {
            const double a = path.time(k), b = path.time(k + 1);
            if (!phi.constant) {
                std::vector<double> pts{a};
                for (double s : phi.knots)
                    if (s > a && s < b) pts.push_back(s);
                pts.push_back(b);
                std::sort(pts.begin(), pts.end());
                for (std::size_t q = 0; q + 1 < pts.size(); ++q) {
                    const auto [i0, i1] = linear_moments(phi, pts[q], pts[q + 1], opts.subdivisions);
                    running += i0 * path.at(pts[q]) + i1 * path.at(pts[q + 1]);
                }
            }
            out.block(row, static_cast<Eigen::Index>(k) + 1, d, 1) = phi.value(b) * path.node(k + 1) - running;
        }
    }
    return out;
}

Matrix stacking_matrix(std::span<const Weight> weights, double t, std::size_t dim) {
    const auto d = static_cast<Eigen::Index>(dim);
    Matrix phi = Matrix::Zero(d * static_cast<Eigen::Index>(weights.size()), d);
    for (std::size_t j = 0; j < weights.size(); ++j)
        phi.block(static_cast<Eigen::Index>(j) * d, 0, d, d) = weights[j].value(t) * Matrix::Identity(d, d);
    return phi;
}

}  // namespace pathctl
