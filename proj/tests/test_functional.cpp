#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cylindrical_family.hpp"
#include "oracles.hpp"
#include "pathctl/functional.hpp"

#include <cmath>
#include <random>

using namespace pathctl;

namespace {

Core linear_core(std::function<double(double, const Vector&)> v, std::function<double(double, const Vector&)> dt,
                 std::function<Vector(double, const Vector&)> dy, std::size_t k) {
    return Core{std::move(v), std::move(dt), std::move(dy),
                [k](double, const Vector&) { return Matrix(Matrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k))); }};
}

DiscreteSemimartingale brownian(std::mt19937_64& rng, double T, std::size_t steps) {
    std::normal_distribution<double> g;
    Matrix v(1, static_cast<Eigen::Index>(steps + 1));
    v(0, 0) = 0.0;
    const double dt = T / static_cast<double>(steps);
    for (std::size_t k = 1; k <= steps; ++k) v(0, static_cast<Eigen::Index>(k)) = v(0, static_cast<Eigen::Index>(k) - 1) + std::sqrt(dt) * g(rng);
    return {Path(TimeGrid::uniform(T, steps), std::move(v)), std::vector<Matrix>(steps, Matrix::Constant(1, 1, dt))};
}

}  // namespace

TEST_CASE("horizontal derivative examples") {
    std::mt19937_64 rng(1);
    const Path x = oracle::random_path(rng, 1, 1.0, 10);
    // core(t, y) = t y with phi = 1 gives dH u = x(t)
    const CylindricalFunctional ty(
        linear_core([](double t, const Vector& y) { return t * y(0); }, [](double, const Vector& y) { return y(0); },
                    [](double t, const Vector&) { return Vector::Constant(1, t); }, 1),
        {Weight::one()}, 1);
    const auto h = horizontal_derivative(ty.as_functional(), {0.37, x}, 1e-5);
    CHECK(h.value == doctest::Approx(x.at(0.37)(0)).epsilon(1e-9));
    CHECK_FALSE(h.left_limit);

    const PathFunctional flat{[](double, const Path& p) { return p.at(0.2)(0); }, false};
    CHECK(horizontal_derivative(flat, {0.5, x}, 1e-5).value == 0.0);

    const auto clamped = horizontal_derivative(ty.as_functional(), {0.99, x}, 0.1);
    CHECK(clamped.step == doctest::Approx(0.01));
    const auto at_end = horizontal_derivative(ty.as_functional(), {1.0, x}, 1e-5);
    CHECK(at_end.left_limit);
    CHECK(at_end.value == doctest::Approx(x.at(1.0)(0)).epsilon(1e-4));
}

TEST_CASE("vertical derivative examples") {
    std::mt19937_64 rng(2);
    const Path x = oracle::random_path(rng, 1, 1.0, 10);
    const PathFunctional sq{[](double t, const Path& p) { const double v = p.at(t)(0); return v * v; }, true};
    const GaugePoint p{0.41, x};
    CHECK(vertical_gradient(sq, p, 1e-3)(0) == doctest::Approx(2.0 * x.at(0.41)(0)).epsilon(1e-9));
    CHECK(vertical_hessian(sq, p, 1e-3)(0, 0) == doctest::Approx(2.0).epsilon(1e-6));

    const PathFunctional cst{[](double, const Path&) { return 3.0; }, true};
    CHECK(vertical_gradient(cst, p, 1e-3).norm() == 0.0);
    CHECK(vertical_hessian(cst, p, 1e-3).norm() == 0.0);
}

TEST_CASE("vertical bump shifts the path from t on") {
    std::mt19937_64 rng(3);
    const Path x = oracle::random_path(rng, 2, 1.0, 6);
    Vector s(2);
    s << 1.0, -2.0;
    const Path b = vertical_bump(x, 0.3, s);
    CHECK((b.at(0.3) - x.at(0.3) - s).norm() < 1e-14);
    CHECK((b.at(0.8) - x.at(0.8) - s).norm() < 1e-14);
    CHECK((b.at(0.2999) - x.at(0.2999)).norm() < 1e-14);
    CHECK((vertical_bump(x, 0.0, s).at(0.0) - x.at(0.0) - s).norm() < 1e-15);
}

TEST_CASE("cylindrical derivative examples") {
    std::mt19937_64 rng(4);
    const Path x = oracle::random_path(rng, 1, 1.0, 10);
    const CylindricalFunctional id(
        linear_core([](double, const Vector& y) { return y(0); }, [](double, const Vector&) { return 0.0; },
                    [](double, const Vector&) { return Vector::Ones(1); }, 1),
        {Weight::one()}, 1);
    auto d = id.derivatives(0.5, x);
    CHECK(d.horizontal == 0.0);
    CHECK(d.vertical1(0) == 1.0);
    CHECK(d.vertical2(0, 0) == 0.0);

    const CylindricalFunctional tt(
        linear_core([](double t, const Vector&) { return t; }, [](double, const Vector&) { return 1.0; },
                    [](double, const Vector&) { return Vector::Zero(2); }, 2),
        {Weight::one(), Weight::exponential(-1.0)}, 1);
    d = tt.derivatives(0.5, x);
    CHECK(d.horizontal == 1.0);
    CHECK(d.vertical1.norm() == 0.0);
    CHECK(d.vertical2.norm() == 0.0);

    // core y^2 with phi = e^{-s}: vertical gradient 2 y e^{-t}
    const CylindricalFunctional sq(
        Core{[](double, const Vector& y) { return y(0) * y(0); }, [](double, const Vector&) { return 0.0; },
             [](double, const Vector& y) { return Vector::Constant(1, 2.0 * y(0)); },
             [](double, const Vector&) { return Matrix::Constant(1, 1, 2.0); }},
        {Weight::exponential(-1.0)}, 1);
    const double t = 0.6;
    const double y = sq.lift(t, x)(0);
    d = sq.derivatives(t, x);
    CHECK(d.vertical1(0) == doctest::Approx(2.0 * y * std::exp(-t)));
    CHECK(vertical_gradient(sq.as_functional(), {t, x}, 1e-4)(0) == doctest::Approx(d.vertical1(0)).epsilon(1e-6));
}

TEST_CASE("numeric pathwise derivatives match the analytic ones") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t d = 1 + rep % 2, m = 1 + (rep / 2) % 2;
        const auto f = oracle::random_cylindrical(rng, d, m);
        const Path x = oracle::random_path(rng, d, 1.0, 12);
        const GaugePoint p{u(rng), x};
        const auto exact = f.derivatives(p.t, x);
        const auto F = f.as_functional();
        CHECK(std::abs(horizontal_derivative(F, p, 1e-5).value - exact.horizontal) <= 1e-4);
        CHECK((vertical_gradient(F, p, 1e-4) - exact.vertical1).cwiseAbs().maxCoeff() <= 1e-4);
        CHECK((vertical_hessian(F, p, 1e-4) - exact.vertical2).cwiseAbs().maxCoeff() <= 1e-4);
    }
}

TEST_CASE("finite-difference convergence orders") {
    std::mt19937_64 rng(6);
    const auto f = oracle::random_cylindrical(rng, 1, 2);
    const Path x = oracle::random_path(rng, 1, 1.0, 12);
    const GaugePoint p{0.4, x};
    const auto exact = f.derivatives(p.t, x);
    const auto F = f.as_functional();
    const double eh1 = std::abs(horizontal_derivative(F, p, 1e-2).value - exact.horizontal);
    const double eh2 = std::abs(horizontal_derivative(F, p, 1e-3).value - exact.horizontal);
    CHECK(std::log10(eh1 / eh2) >= 0.9);
    const double ev1 = std::abs(vertical_gradient(F, p, 1e-1)(0) - exact.vertical1(0));
    const double ev2 = std::abs(vertical_gradient(F, p, 1e-2)(0) - exact.vertical1(0));
    CHECK(std::log10(ev1 / ev2) >= 1.9);
}

TEST_CASE("cylindrical functionals are non-anticipative") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto f = oracle::random_cylindrical(rng, 2, 2).as_functional();
    for (int rep = 0; rep < 1000; ++rep) {
        const Path x = oracle::random_path(rng, 2, 1.0, 5 + rep % 7);
        CHECK(anticipation_defect(f, u(rng), x) <= 1e-12);
    }
}

TEST_CASE("finite-difference core partials") {
    std::mt19937_64 rng(8);
    const auto f = oracle::random_cylindrical(rng, 1, 2);
    const Core fd = finite_difference_core(f.core().value, 1.0);
    Vector y(2);
    y << 0.3, -0.7;
    CHECK(std::abs(fd.dt(0.5, y) - f.core().dt(0.5, y)) < 1e-5);
    CHECK((fd.dy(0.5, y) - f.core().dy(0.5, y)).norm() < 1e-5);
    CHECK((fd.dyy(0.5, y) - f.core().dyy(0.5, y)).norm() < 1e-5);
}

TEST_CASE("ito residual") {
    std::mt19937_64 rng(9);
    const CylindricalFunctional sq(
        Core{[](double, const Vector& y) { return y(0) * y(0); }, [](double, const Vector&) { return 0.0; },
             [](double, const Vector& y) { return Vector::Constant(1, 2.0 * y(0)); },
             [](double, const Vector&) { return Matrix::Constant(1, 1, 2.0); }},
        {Weight::one()}, 1);
    // per-path identity: residual equals |sum dX^2 - T|
    const auto X = brownian(rng, 1.0, 64);
    double qv = 0.0;
    for (std::size_t k = 0; k + 1 < X.path.size(); ++k) qv += std::pow(X.path.node(k + 1)(0) - X.path.node(k)(0), 2);
    CHECK(ito_residual(sq, X, 0.0) == doctest::Approx(std::abs(qv - 1.0)).epsilon(1e-10));

    const CylindricalFunctional cst(
        linear_core([](double, const Vector&) { return 2.0; }, [](double, const Vector&) { return 0.0; },
                    [](double, const Vector&) { return Vector::Zero(1); }, 1),
        {Weight::one()}, 1);
    CHECK(ito_residual(cst, X, 0.0) == 0.0);
    CHECK_THROWS_AS(ito_residual(sq, X, 0.3333), std::domain_error);
}

TEST_CASE("ito residual shrinks under refinement on deterministic paths") {
    // X(s) = sin(3 s), zero quadratic variation; u = core(t, y) with weights (1, e^s)
    std::mt19937_64 rng(10);
    const auto f = oracle::random_cylindrical(rng, 1, 2);
    std::vector<double> err;
    for (std::size_t n : {32u, 64u, 128u, 256u}) {
        const Path x = Path::sample(TimeGrid::uniform(1.0, n), 1, [](double s) { return Vector::Constant(1, std::sin(3 * s)); });
        err.push_back(ito_residual(f, {x, std::vector<Matrix>(n, Matrix::Zero(1, 1))}, 0.0));
    }
    for (std::size_t k = 0; k + 1 < err.size(); ++k) CHECK(std::log2(err[k] / err[k + 1]) >= 0.9);
}
