// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Independent references come from oracles.hpp and the
// closed forms written out below.

#include "cylindrical_family.hpp"
#include "oracles.hpp"
#include "variational_oracle.hpp"

#include "pathctl/catalog.hpp"
#include "pathctl/control.hpp"
#include "pathctl/forward_integral.hpp"
#include "pathctl/functional.hpp"
#include "pathctl/gauge.hpp"
#include "pathctl/lifted_hjb.hpp"
#include "pathctl/mollification.hpp"
#include "pathctl/sde.hpp"
#include "pathctl/viscosity.hpp"
#include "scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

using namespace pathctl;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass;
    std::string detail;
};

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Path constant_path(double v, double T = 1.0) { return Path::constant(TimeGrid::uniform(T, 16), Vector::Constant(1, v)); }

// v(t, x) = -min(max(|x(t)| - (T - t), 0), 1): steer toward 0 at unit speed.
double reachability_exact(double t, double x, double T) {
    return -std::min(std::max(std::abs(x) - (T - t), 0.0), 1.0);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return oracle::slope(lx, ly);
}

Verdict gauge_sandwich() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::size_t violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const std::size_t d = 1 + i % 2;
        const GaugePoint a{u(rng), oracle::random_path(rng, d, 1.0, 8)};
        const GaugePoint b{u(rng), oracle::random_path(rng, d, 1.0, 8)};
        const double M = oracle::stopped_sup(a.path, a.t, b.path, b.t);
        const double k = kappa_infinity(a, b);
        violations += k < M * M - 1e-12 || k > 3.0 * M * M + 1e-12;
    }
    const double s = seconds_since(start);
    return {violations == 0 && s < 5.0, std::to_string(violations) + " violations in 10^4 pairs, " + fmt(s) + " s"};
}

Verdict horizontal_flatness() {
    std::mt19937_64 rng(102);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const std::size_t d = 1 + i % 2;
        const double t = 0.05 + 0.9 * u(rng);
        const GaugePoint center{t * u(rng), oracle::random_path(rng, d, 1.0, 8)};
        const GaugePoint p{t, oracle::random_path(rng, d, 1.0, 8)};
        const PathFunctional k{[&](double s, const Path& x) { return kappa_infinity({s, x}, center); }};
        worst = std::max(worst, std::abs(horizontal_derivative(k, p, 1e-7).value));
    }
    return {worst <= 1e-6, "max |horizontal difference quotient| = " + fmt(worst) + " at step 1e-7"};
}

Verdict comparison_weight() {
    const double at0 = phi_comparison(0.0).value;
    const double slope = phi_comparison(1.0).derivative;
    const double gap = std::abs(slope - 13.0 / std::numbers::pi);
    return {at0 == 1.0 && gap <= 1e-12, "Phi(0) = " + fmt(at0) + ", |Phi'(1) - 13/pi| = " + fmt(gap)};
}

Verdict variational_principle() {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937_64 rng(104);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::size_t failures = 0, moved = 0;
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<GaugePoint> c;
        const double spread = rep % 2 ? 0.3 : 0.01;
        const std::size_t d = 1 + rep % 2;
        for (int k = 0; k < 10; ++k) {
            const GaugePoint base{0.5 * (1.0 + u(rng)), oracle::random_path(rng, d, 1.0, 6)};
            for (int i = 0; i < 20; ++i)
                c.push_back({std::clamp(base.t + spread * u(rng), 0.0, 1.0),
                             combine(1.0, base.path, spread, oracle::random_path(rng, d, 1.0, 6))});
        }
        std::vector<double> G(c.size());
        const double w = 0.5 * (1.0 + u(rng));
        for (std::size_t i = 0; i < c.size(); ++i)
            G[i] = std::sin(3.0 * c[i].t) * c[i].path.at(c[i].t)(0) + w * c[i].t + 0.05 * u(rng);
        const double delta = 0.05 + 0.1 * (1.0 + u(rng));
        const auto r = borwein_preiss(G, c, delta);
        failures += !r.converged || !oracle::variational_items(r, G, c, delta);
        moved += r.bar != r.start;
    }
    const double s = seconds_since(start);
    return {failures == 0 && s < 30.0, std::to_string(failures) + " failures in 100 instances (" +
                                           std::to_string(moved) + " with bar != start), " + fmt(s) + " s"};
}

Verdict forward_integral_order() {
    std::mt19937_64 rng(105);
    const std::vector<double> eps{1e-1, 1e-2, 1e-3, 1e-4};
    double worst_order = std::numeric_limits<double>::infinity(), fitted = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const Weight w = oracle::random_weight(rng);
        const Path x = oracle::random_path(rng, 1 + rep % 2, 1.0, 10);
        const double t = 0.3 + 0.7 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const Vector exact = integrate_ibp(w, x, t);
        std::vector<double> err;
        for (double e : eps) err.push_back((integrate_regularized(w, x, t, e) - exact).norm());
        for (std::size_t i = 0; i < eps.size(); ++i) fitted = std::max(fitted, err[i] / eps[i]);
        worst_order = std::min(worst_order, log_log_slope(eps, err));
    }
    return {worst_order >= 0.9, "fitted C = " + fmt(fitted) + ", smallest empirical order " + fmt(worst_order)};
}

CoefficientSpec sine_of_current() {
    CoefficientSpec h;
    h.name = "sin(x(t))";
    h.eval = [](double t, const Path& x, double) { return std::sin(x.at(t)(0)); };
    h.lipschitz = 1.0;
    return h;
}

struct MollificationRun {
    Verdict bound, lipschitz;
};

MollificationRun mollification() {
    std::mt19937_64 rng(106);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto h = sine_of_current();
    std::vector<GaugePoint> pts;
    std::vector<Path> partners;
    for (int i = 0; i < 1000; ++i) {
        Path x = oracle::random_path(rng, 1, 1.0, 10);
        partners.push_back(combine(1.0, x, 0.3 * u(rng), oracle::random_path(rng, 1, 1.0, 10)));
        pts.push_back({u(rng), std::move(x)});
    }
    std::size_t bound_violations = 0, lip_violations = 0;
    std::vector<double> worst;
    double worst_ratio = 0.0;
    for (int n = 0; n <= 4; ++n) {
        const MollifiedCoefficient hn(h, {n, 256, 32, 23, Execution::parallel}, 1.0);
        double max_err = 0.0;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const auto& [t, x] = pts[i];
            const auto a = hn.samples(t, hn.lift(t, x), 0.0);
            const auto b = hn.samples(t, hn.lift(t, partners[i]), 0.0);
            const Estimate e = summarize(a);
            const double err = std::abs(e.mean - std::sin(x.at(t)(0)));
            bound_violations += err > error_bound_rhs(h, n, {t, x}) + 3.0 * e.std_error;
            max_err = std::max(max_err, err);
            std::vector<double> diff(a.size());
            for (std::size_t k = 0; k < a.size(); ++k) diff[k] = a[k] - b[k];
            const Estimate de = summarize(diff);
            const double dist = oracle::stopped_sup(x, t, partners[i], t);
            if (dist > 0.0) {
                const double ratio = std::abs(de.mean) / dist;
                worst_ratio = std::max(worst_ratio, ratio);
                lip_violations += ratio > 2.0 * h.lipschitz + 3.0 * de.std_error / dist;
            }
        }
        worst.push_back(max_err);
    }
    bool monotone = true;
    std::string maxima;
    for (std::size_t n = 0; n < worst.size(); ++n) {
        monotone = monotone && (n == 0 || worst[n] < worst[n - 1]);
        maxima += (n ? ", " : "") + fmt(worst[n]);
    }
    return {{bound_violations == 0 && monotone, std::to_string(bound_violations) +
                                                    " bound violations over n = 0..4; max errors " + maxima},
            {lip_violations == 0, std::to_string(lip_violations) + " pairs above 2K + 3 stderr; largest ratio " +
                                      fmt(worst_ratio) + " against 2K = 2"}};
}

Verdict functional_ito() {
    // one fine Brownian path per trajectory, summed into each coarser grid
    const CylindricalFunctional u(
        Core{[](double, const Vector& y) { return y(0) * y(0); }, [](double, const Vector&) { return 0.0; },
             [](double, const Vector& y) { return Vector::Constant(1, 2.0 * y(0)); },
             [](double, const Vector&) { return Matrix::Constant(1, 1, 2.0); }},
        {Weight::one()}, 1);
    ControlledSDE bm;
    bm.drift = [](double, const Path&, double) { return Vector::Zero(1); };
    bm.diffusion = [](double, const Path&, double) { return Matrix::Identity(1, 1); };
    bm.actions = {0.0};
    bm.bound = 1.0;
    std::vector<double> dts, rms;
    for (int k = 6; k <= 10; ++k) {
        SimConfig cfg{std::ldexp(1.0, k), 100, 108, std::size_t{1} << (10 - k), Execution::parallel};
        const auto batch = simulate(bm, 0.0, constant_path(0.0), PiecewiseConstantControl::constant(0.0, 1.0, 0), cfg);
        double acc = 0.0;
        for (const auto& x : batch.trajectories) acc += std::pow(ito_residual(u, x, 0.0), 2);
        dts.push_back(std::ldexp(1.0, -k));
        rms.push_back(std::sqrt(acc / 100.0));
    }
    const double s = log_log_slope(dts, rms);
    return {s >= 0.45, "RMS residual slope " + fmt(s) + " over dt = 2^-6..2^-10 (" + fmt(rms.front()) + " to " +
                           fmt(rms.back()) + ")"};
}

Verdict cylindrical_derivatives() {
    std::mt19937_64 rng(109);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    double worst = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t d = 1 + rep % 2, m = 1 + (rep / 2) % 2;
        const auto f = oracle::random_cylindrical(rng, d, m);
        const Path x = oracle::random_path(rng, d, 1.0, 12);
        const GaugePoint p{u(rng), x};
        const auto exact = f.derivatives(p.t, x);
        const auto F = f.as_functional();
        worst = std::max(worst, std::abs(horizontal_derivative(F, p, 1e-5).value - exact.horizontal));
        worst = std::max(worst, (vertical_gradient(F, p, 1e-4) - exact.vertical1).cwiseAbs().maxCoeff());
        worst = std::max(worst, (vertical_hessian(F, p, 1e-4) - exact.vertical2).cwiseAbs().maxCoeff());
    }
    return {worst <= 1e-4, "max numeric-analytic gap " + fmt(worst) + " over 20 functionals"};
}

Verdict value_and_dpp() {
    const auto start = std::chrono::steady_clock::now();
    const double T = 1.0;
    const auto p = reachability_problem(T);
    ValueConfig cfg;
    cfg.sim = {64.0, 1, 110, 1, Execution::parallel};
    cfg.candidates = Execution::parallel;
    const auto v = value(p, 0.0, constant_path(0.5), 8, cfg);
    const double gap = std::abs(v.mean - (-std::min(std::max(0.5 - T, 0.0), 1.0)));
    const auto r = dpp_residual(p, 0.0, 0.5 * T, constant_path(0.5), 8, cfg);
    const double s = seconds_since(start);
    return {gap <= 0.02 && r.residual <= 0.02 + 3.0 * r.std_error && s < 60.0,
            "|value - closed form| = " + fmt(gap) + ", DPP residual " + fmt(r.residual) + " (stderr " +
                fmt(r.std_error) + "), " + fmt(s) + " s"};
}


Verdict lifted_closed_form() {
    const auto start = std::chrono::steady_clock::now();
    const auto p = markovian_lifted_problem(1.0);
    GridConfig g;
    g.points = 401;
    g.time_levels = 200;
    g.centers = {Vector::Constant(1, 0.5)};
    g.exec = Execution::parallel;
    const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};
    std::vector<double> err;
    for (double e : eps) {
        const auto r = reconstruct(solve(p, e, g), p, {0.0, constant_path(0.5)});
        err.push_back(std::abs(r.value - reachability_exact(0.0, 0.5, 1.0)));
    }
    const double slope = log_log_slope(eps, err);
    const double s = seconds_since(start);
    std::string errs;
    for (std::size_t i = 0; i < err.size(); ++i) errs += (i ? ", " : "") + fmt(err[i]);
    return {slope >= 0.8 && s < 120.0,
            "log-log slope " + fmt(slope) + ", errors " + errs + ", 201 levels x 401 nodes, " + fmt(s) + " s"};
}

Verdict lifted_against_monte_carlo() {
    const double T = 1.0;
    const auto p = markovian_lifted_problem(T);
    const std::vector<double> starts{0.5, -0.25, 1.3, -1.6, 0.0};
    GridConfig g;
    g.points = 401;
    g.time_levels = 200;
    for (double x : starts) g.centers.push_back(Vector::Constant(1, x));
    g.exec = Execution::parallel;
    const std::vector<double> eps{0.4, 0.2, 0.1, 0.05};

    std::vector<std::vector<double>> v(eps.size());
    std::vector<double> err(eps.size(), 0.0);
    for (std::size_t k = 0; k < eps.size(); ++k) {
        const auto sol = solve(p, eps[k], g);
        for (double x : starts) {
            v[k].push_back(reconstruct(sol, p, {0.0, constant_path(x, T)}).value);
            err[k] = std::max(err[k], std::abs(v[k].back() - reachability_exact(0.0, x, T)));
        }
    }
    // fitted once over the whole sweep
    const double C = fit_exponential_constant(eps, err, T);

    const auto path_p = reachability_problem(T);
    ValueConfig cfg;
    cfg.sim = {64.0, 1, 112, 1, Execution::parallel};
    cfg.candidates = Execution::parallel;
    double worst_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const auto mc = value(path_p, 0.0, constant_path(starts[i], T), 8, cfg);
        for (std::size_t k = 0; k < eps.size(); ++k) {
            const double allowed = eps[k] * C * std::exp(C * T) + 0.03 + 3.0 * mc.std_error;
            worst_margin = std::max(worst_margin, std::abs(v[k][i] - mc.mean) - allowed);
        }
    }
    return {worst_margin <= 0.0, "C-hat = " + fmt(C) + ", worst |reconstruct - MC| minus allowance " +
                                     fmt(worst_margin) + " over 5 paths x 4 eps"};
}

Verdict viscosity_sanity() {
    const auto p = markovian_lifted_problem(1.0);
    std::vector<ResidualSample> samples;
    for (int i = 0; i <= 5; ++i)
        for (int j = -15; j <= 15; ++j) samples.push_back({0.1 * i, Vector::Constant(1, 0.1 * j)});
    std::vector<double> maxima;
    std::size_t sign_failures = 0, rows = 0;
    for (std::size_t r : {1u, 2u, 4u, 8u}) {
        GridConfig g;
        g.points = 100 * r + 1;
        g.time_levels = 100 * r;
        g.lo = Vector::Constant(1, -2.0);
        g.hi = Vector::Constant(1, 2.0);
        g.exec = Execution::parallel;
        const auto table = classical_residual(solve(p, 0.4, g), p, samples, Execution::parallel);
        maxima.push_back(table.max_residual);
        for (const auto& row : table.rows) {
            ++rows;
            // subsolution: lhs <= 0 up to the eps term; supersolution: lhs >= 0
            sign_failures += row.lhs - row.eps_term > row.tolerance;
            sign_failures += row.lhs - row.eps_term < -row.tolerance;
        }
    }
    std::string orders;
    double last = 0.0;
    for (std::size_t i = 0; i + 1 < maxima.size(); ++i) {
        last = std::log2(maxima[i] / maxima[i + 1]);
        orders += (i ? ", " : "") + fmt(last);
    }
    return {sign_failures == 0 && last >= 1.0, "residual orders " + orders + " (need >= 1); " +
                                                   std::to_string(sign_failures) + " sign failures in " +
                                                   std::to_string(rows) + " samples"};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Verdict determinism() {
    const std::string config = R"yaml(seed: 2024
scenarios:
  - {name: sim, kind: simulate, problem: constant-coefficient, x0: 0.2, trajectories: 8, steps_per_unit: 32}
  - {name: val, kind: value, problem: tracking, x0: 0.6, m: 3, trajectories: 16, steps_per_unit: 16}
  - {name: dpp, kind: dpp, problem: tracking, x0: 0.6, m: 2, trajectories: 16, steps_per_unit: 16, tolerance: 1}
  - {name: mol, kind: mollify, coefficient: "sin(y1)", samples: 20, mc_samples: 32, check_monotone: false}
  - {name: hjb, kind: hjb, problem: markovian-lifted, epsilon: [0.4, 0.2], x0: [0.5, -0.3], points: 81,
     time_levels: 40, write_grid: true}
  - {name: vp, kind: gauge-vp, instances: 6}
  - {name: ito, kind: ito, trajectories: 20, levels: [4, 5, 6]}
  - {name: vis, kind: viscosity, problem: markovian-lifted, base_points: 40, base_levels: 40, refinements: [1, 2],
     sample_stride: 4}
  - {name: bnd, kind: bounds, problem: markovian-lifted, points: 81, time_levels: 40}
)yaml";
    const fs::path root = fs::temp_directory_path() / ("pathctl_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(root);
    int codes[2];
    for (int i = 0; i < 2; ++i) {
        cli::RunOptions o;
        o.out = (root / std::to_string(i)).string();
        o.timings = false;
        o.seed_env = std::optional<std::string>{};
        std::ostringstream log, err;
        codes[i] = cli::run_config(config, "determinism.yaml", o, log, err);
    }
    std::size_t files = 0, different = 0;
    for (const auto& e : fs::directory_iterator(root / "0")) {
        ++files;
        different += slurp(e.path()) != slurp(root / "1" / e.path().filename());
    }
    fs::remove_all(root);
    return {codes[0] == 0 && codes[1] == 0 && different == 0 && files > 9,
            std::to_string(files) + " files from 9 scenario kinds, " + std::to_string(different) +
                " differ between runs (exit codes " + std::to_string(codes[0]) + ", " + std::to_string(codes[1]) +
                ")"};
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    int failed = 0;
    const auto report = [&](int id, const std::string& name, const Verdict& v) {
        std::cout << "criterion " << id << " " << (v.pass ? "PASS" : "FAIL") << " " << name << ": " << v.detail
                  << std::endl;
        failed += !v.pass;
    };
    report(1, "gauge sandwich", gauge_sandwich());
    report(2, "horizontal flatness of kappa", horizontal_flatness());
    report(3, "comparison weight constants", comparison_weight());
    report(4, "variational principle", variational_principle());
    report(5, "forward integral order", forward_integral_order());
    const auto moll = mollification();
    report(6, "mollification error bound", moll.bound);
    report(7, "mollified Lipschitz inheritance", moll.lipschitz);
    report(8, "functional Ito formula", functional_ito());
    report(9, "cylindrical derivative consistency", cylindrical_derivatives());
    report(10, "value and dynamic programming", value_and_dpp());
    report(11, "lifted solve against the closed form", lifted_closed_form());
    report(12, "lifted solve against Monte Carlo", lifted_against_monte_carlo());
    report(13, "classical solution as viscosity solution", viscosity_sanity());
    report(14, "determinism", determinism());
    std::cout << (failed ? std::to_string(failed) + " of 14 criteria failed" : std::string("all 14 criteria passed"))
              << " in " << fmt(seconds_since(start)) << " s" << std::endl;
    return failed ? 1 : 0;
}
