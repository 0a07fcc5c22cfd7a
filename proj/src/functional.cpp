#include "pathctl/functional.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pathctl {

double anticipation_defect(const PathFunctional& u, double t, const Path& x) {
    return std::abs(u(t, x) - u(t, stop(x, t)));
}

Core finite_difference_core(std::function<double(double, const Vector&)> value, double horizon, double h_t,
                            double h_y) {
    Core c;
    c.value = value;
    c.dt = [value, h_t, horizon](double t, const Vector& y) {
        const double lo = std::max(0.0, t - h_t), hi = std::min(horizon, t + h_t);
        return (value(hi, y) - value(lo, y)) / (hi - lo);
    };
    c.dy = [value, h_y](double t, const Vector& y) {
        Vector g(y.size());
        Vector yp = y, ym = y;
        for (Eigen::Index i = 0; i < y.size(); ++i) {
            yp(i) += h_y;
            ym(i) -= h_y;
            g(i) = (value(t, yp) - value(t, ym)) / (2.0 * h_y);
            yp(i) = ym(i) = y(i);
        }
        return g;
    };
    c.dyy = [value, h_y](double t, const Vector& y) {
        const auto k = y.size();
        Matrix H(k, k);
        const double f0 = value(t, y);
        Vector z = y;
        for (Eigen::Index i = 0; i < k; ++i) {
            z(i) = y(i) + h_y;
            const double fp = value(t, z);
            z(i) = y(i) - h_y;
            const double fm = value(t, z);
            z(i) = y(i);
            H(i, i) = (fp - 2.0 * f0 + fm) / (h_y * h_y);
            for (Eigen::Index j = 0; j < i; ++j) {
                double acc = 0.0;
                for (int si : {1, -1})
                    for (int sj : {1, -1}) {
                        z(i) = y(i) + si * h_y;
                        z(j) = y(j) + sj * h_y;
                        acc += si * sj * value(t, z);
                    }
                z(i) = y(i);
                z(j) = y(j);
                H(i, j) = H(j, i) = acc / (4.0 * h_y * h_y);
            }
        }
        return H;
    };
    return c;
}

CylindricalFunctional::CylindricalFunctional(Core core, std::vector<Weight> weights, std::size_t dim)
    : core_(std::move(core)), weights_(std::move(weights)), dim_(dim) {
    if (weights_.empty()) throw std::invalid_argument("CylindricalFunctional: need at least one weight");
    if (dim_ == 0) throw std::invalid_argument("CylindricalFunctional: dimension must be positive");
    if (!core_.value) throw std::invalid_argument("CylindricalFunctional: core value missing");
}

Vector CylindricalFunctional::lift(double t, const Path& x) const {
    if (x.dim() != dim_) throw std::invalid_argument("CylindricalFunctional: path dimension mismatch");
    return lifted_coordinates(weights_, x, t);
}

double CylindricalFunctional::operator()(double t, const Path& x) const { return core_.value(t, lift(t, x)); }

PathFunctional CylindricalFunctional::as_functional() const {
    return PathFunctional{[self = *this](double t, const Path& x) { return self(t, x); }, true};
}

PathDerivatives CylindricalFunctional::derivatives(double t, const Path& x) const { return derivatives_at(t, lift(t, x)); }

PathDerivatives CylindricalFunctional::derivatives_at(double t, const Vector& y) const {
    if (!core_.dt || !core_.dy || !core_.dyy) throw std::logic_error("CylindricalFunctional: core partials missing");
    const Matrix phi = stacking_matrix(weights_, t, dim_);
    PathDerivatives d;
    d.horizontal = core_.dt(t, y);
    d.vertical1 = phi.transpose() * core_.dy(t, y);
    d.vertical2 = phi.transpose() * core_.dyy(t, y) * phi;
    return d;
}

HorizontalResult horizontal_derivative(const PathFunctional& u, const GaugePoint& p, double delta) {
    if (!(delta > 0.0)) throw std::domain_error("horizontal_derivative: delta must be positive");
    const double T = p.path.horizon();
    if (!(p.t >= 0.0 && p.t <= T)) throw std::domain_error("horizontal_derivative: t outside [0, T]");
    if (p.t >= T) {
        const double s = std::max(0.0, T - delta);
        const Path xs = stop(p.path, s);
        return {(u(T, xs) - u(s, xs)) / (T - s), T - s, true};
    }
    const double step = std::min(delta, T - p.t);
    const Path xs = stop(p.path, p.t);
    return {(u(p.t + step, xs) - u(p.t, xs)) / step, step, false};
}

Path vertical_bump(const Path& x, double t, const Vector& shift) {
    if (static_cast<std::size_t>(shift.size()) != x.dim()) throw std::invalid_argument("vertical_bump: shift dimension");
    const double T = x.horizon();
    if (!(t >= 0.0 && t <= T)) throw std::domain_error("vertical_bump: t outside [0, T]");
    if (t <= 0.0) return Path(x.grid(), x.values().colwise() + shift);
    const double tau = std::min(1e-10 * std::max(1.0, T), 0.5 * t);
    const double anchor = t - tau;
    const double pts[2] = {anchor, t};
    const Path y = x.with_nodes(pts);
    Matrix v = y.values();
    const std::size_t k = std::min(y.grid().find(t), y.size() - 1);
    for (std::size_t j = k; j < y.size(); ++j) v.col(static_cast<Eigen::Index>(j)) += shift;
    return Path(y.grid(), std::move(v));
}

Vector vertical_gradient(const PathFunctional& u, const GaugePoint& p, double h) {
    if (!(h > 0.0)) throw std::domain_error("vertical_gradient: h must be positive");
    const auto d = static_cast<Eigen::Index>(p.path.dim());
    Vector g(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        const Vector e = Vector::Unit(d, i) * h;
        g(i) = (u(p.t, vertical_bump(p.path, p.t, e)) - u(p.t, vertical_bump(p.path, p.t, -e))) / (2.0 * h);
    }
    return g;
}

Matrix vertical_hessian(const PathFunctional& u, const GaugePoint& p, double h) {
    if (!(h > 0.0)) throw std::domain_error("vertical_hessian: h must be positive");
    const auto d = static_cast<Eigen::Index>(p.path.dim());
    Matrix H(d, d);
    auto at = [&](const Vector& shift) { return u(p.t, vertical_bump(p.path, p.t, shift)); };
    // the unbumped value is taken on the bumped grid so every evaluation
    // shares the same quadrature nodes
    const double u0 = at(Vector::Zero(d));
    for (Eigen::Index i = 0; i < d; ++i) {
        const Vector ei = Vector::Unit(d, i) * h;
        H(i, i) = (at(ei) - 2.0 * u0 + at(-ei)) / (h * h);
        for (Eigen::Index j = 0; j < i; ++j) {
            const Vector ej = Vector::Unit(d, j) * h;
            H(i, j) = H(j, i) = (at(ei + ej) - at(ei - ej) - at(ej - ei) + at(-ei - ej)) / (4.0 * h * h);
        }
    }
    return H;
}

double ito_residual(const CylindricalFunctional& u, const DiscreteSemimartingale& x, double t0) {
    const Path& X = x.path;
    if (x.quadratic_variation.size() + 1 != X.size())
        throw std::invalid_argument("ito_residual: one quadratic-variation increment per grid step required");
    const std::size_t k0 = X.grid().find(t0);
    if (k0 == X.size()) throw std::domain_error("ito_residual: t0 must be a grid node");
    const Matrix Y = lifted_coordinates_along(u.weights(), X);
    const std::size_t last = X.size() - 1;
    double rhs = 0.0;
    for (std::size_t k = k0; k < last; ++k) {
        const double tk = X.time(k);
        const PathDerivatives d = u.derivatives_at(tk, Y.col(static_cast<Eigen::Index>(k)));
        const Vector dX = X.node(k + 1) - X.node(k);
        rhs += d.horizontal * (X.time(k + 1) - tk) + d.vertical1.dot(dX) +
               0.5 * (d.vertical2 * x.quadratic_variation[k]).trace();
    }
    const double lhs = u.core().value(X.time(last), Y.col(static_cast<Eigen::Index>(last))) -
                       u.core().value(t0, Y.col(static_cast<Eigen::Index>(k0)));
    return std::abs(lhs - rhs);
}

}  // namespace pathctl
