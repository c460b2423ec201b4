#include <benchmark/benchmark.h>

#include <vector>

#include "refdiff/analytic_engine.hpp"
#include "refdiff/local_time_and_verify.hpp"
#include "refdiff/path_simulator.hpp"
#include "refdiff/random.hpp"

using namespace refdiff;

namespace {

CoefficientField two_level() {
    return CoefficientField::validated(DomainSpec::half_line(),
                                       {Segment{0, 1, FuncSpec::constant(-1), FuncSpec::constant(1)},
                                        Segment{1, kInf, FuncSpec::constant(-2), FuncSpec::constant(1)}});
}

CoefficientField affine_interval() {
    return CoefficientField::validated(DomainSpec::interval(2),
                                       {Segment{0, 2, FuncSpec::affine(1, -1), FuncSpec::affine(1, 0.1)}});
}

}  // namespace

static void BM_NormalDraws(benchmark::State& state) {
    NormalStream g(1, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(g());
    }
    state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_NormalDraws);

// Cost per Euler step, including the per-step bookkeeping of a stored path.
static void BM_SimulateOneSided(benchmark::State& state) {
    const auto f = two_level();
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.horizon = 1.0;
    cfg.initial_state = 0.5;
    std::uint64_t stream = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(f, cfg, stream++));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.steps()));
}
BENCHMARK(BM_SimulateOneSided)->Unit(benchmark::kMillisecond);

static void BM_SimulateTwoSided(benchmark::State& state) {
    const auto f = affine_interval();
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.horizon = 1.0;
    cfg.initial_state = 0.5;
    std::uint64_t stream = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate(f, cfg, stream++));
    }
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(cfg.steps()));
}
BENCHMARK(BM_SimulateTwoSided)->Unit(benchmark::kMillisecond);

// Streaming ensemble: no stored paths, summaries only.
static void BM_Ensemble(benchmark::State& state) {
    const auto f = two_level();
    SimConfig cfg;
    cfg.dt = 1e-4;
    cfg.horizon = 1.0;
    cfg.path_count = static_cast<std::size_t>(state.range(0));
    EnsembleOptions eo;
    eo.snapshot_times = {1.0};
    eo.occupation = {{0.0, 0.05, 0.0, false}};
    eo.threads = 1;
    for (auto _ : state) {
        benchmark::DoNotOptimize(run_ensemble(f, cfg, eo));
        ++cfg.seed;
    }
    state.SetItemsProcessed(state.iterations() * state.range(0) * static_cast<std::int64_t>(cfg.steps()));
}
BENCHMARK(BM_Ensemble)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_ProfileConstruction(benchmark::State& state) {
    const auto f = affine_interval();
    for (auto _ : state) {
        benchmark::DoNotOptimize(AnalyticProfile(f));
    }
}
BENCHMARK(BM_ProfileConstruction);

static void BM_StationaryCdf(benchmark::State& state) {
    const AnalyticProfile p(affine_interval());
    double x = 0.0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(p.stationary_cdf(x));
        x = x < 1.99 ? x + 0.013 : 0.0;
    }
}
BENCHMARK(BM_StationaryCdf);

static void BM_SampleStationary(benchmark::State& state) {
    const AnalyticProfile p(two_level());
    PhiloxEngine e(3, 0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(p.sample_stationary(e.uniform_open()));
    }
}
BENCHMARK(BM_SampleStationary);

static void BM_KsDistance(benchmark::State& state) {
    const AnalyticProfile p(two_level());
    PhiloxEngine e(4, 0);
    std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
    for (double& x : xs) x = p.sample_stationary(e.uniform_open());
    for (auto _ : state) {
        benchmark::DoNotOptimize(ks_distance(xs, [&](double x) { return p.stationary_cdf(x); }));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_KsDistance)->Arg(10000);
BENCHMARK_MAIN();
