// Serial reference against the OpenMP kernel for each parallel hot spot.
// Argument 0 selects Execution::serial, 1 Execution::parallel; both compute
// bit-identical results, so only the timings differ.

#include "pathctl/catalog.hpp"
#include "pathctl/control.hpp"
#include "pathctl/gauge.hpp"
#include "pathctl/lifted_hjb.hpp"
#include "pathctl/mollification.hpp"
#include "pathctl/rng.hpp"
#include "pathctl/sde.hpp"
#include "pathctl/viscosity.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace pathctl;

namespace {

Execution mode(const benchmark::State& state) { return state.range(0) ? Execution::parallel : Execution::serial; }

Path flat(double v) { return Path::constant(TimeGrid::uniform(1.0, 16), Vector::Constant(1, v)); }

void label(benchmark::State& state) { state.SetLabel(state.range(0) ? "parallel" : "serial"); }

void BM_simulate(benchmark::State& state) {
    const auto p = constant_coefficient_problem();
    SimConfig cfg{256.0, 512, 1, 1, mode(state)};
    for (auto _ : state) {
        auto batch = simulate(p.sde, 0.0, flat(0.0), PiecewiseConstantControl::constant(0.0, 1.0, 2), cfg);
        benchmark::DoNotOptimize(batch);
    }
    label(state);
}

void BM_value_candidates(benchmark::State& state) {
    const auto p = constant_coefficient_problem();
    ValueConfig cfg;
    cfg.sim = {32.0, 32, 2, 1, Execution::serial};
    cfg.candidates = mode(state);
    for (auto _ : state) benchmark::DoNotOptimize(value(p, 0.0, flat(0.2), 5, cfg));
    label(state);
}

void BM_mollifier_samples(benchmark::State& state) {
    CoefficientSpec h;
    h.name = "sin of current value";
    h.eval = [](double t, const Path& x, double) { return std::sin(x.at(t)(0)); };
    h.lipschitz = 1.0;
    const MollifiedCoefficient hn(h, {3, 1024, 32, 4, mode(state)}, 1.0);
    const Vector y = hn.lift(0.4, flat(0.3));
    for (auto _ : state) benchmark::DoNotOptimize(hn.samples(0.4, y, 0.0));
    label(state);
}

void BM_hjb_solve(benchmark::State& state) {
    const auto p = markovian_lifted_problem();
    GridConfig g;
    g.points = 401;
    g.time_levels = 100;
    g.centers = {Vector::Constant(1, 0.5)};
    g.exec = mode(state);
    for (auto _ : state) benchmark::DoNotOptimize(solve(p, 0.2, g));
    label(state);
}

void BM_classical_residual(benchmark::State& state) {
    const auto p = markovian_lifted_problem();
    GridConfig g;
    g.points = 401;
    g.time_levels = 200;
    g.lo = Vector::Constant(1, -2.0);
    g.hi = Vector::Constant(1, 2.0);
    const auto sol = solve(p, 0.4, g);
    const auto samples = interior_samples(sol, 2, 2, 0.5);
    for (auto _ : state) benchmark::DoNotOptimize(classical_residual(sol, p, samples, mode(state)));
    label(state);
}

void BM_variational_scan(benchmark::State& state) {
    const CounterRng rng(5);
    std::vector<GaugePoint> c;
    std::vector<double> G;
    for (std::uint64_t i = 0; i < 400; ++i) {
        const double t = rng.uniform(0, i, 0);
        const Path x = Path::sample(TimeGrid::uniform(1.0, 8), 1, [&](double s) {
            return Vector::Constant(1, rng.normal(1, i, static_cast<std::uint64_t>(s * 8.0 + 0.5)));
        });
        G.push_back(std::sin(3.0 * t) * x.at(t)(0) + 0.5 * t);
        c.push_back({t, x});
    }
    for (auto _ : state) benchmark::DoNotOptimize(borwein_preiss(G, c, 0.1, 64, -1, mode(state)));
    label(state);
}

}  // namespace

BENCHMARK(BM_simulate)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_value_candidates)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_mollifier_samples)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hjb_solve)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_classical_residual)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_variational_scan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
