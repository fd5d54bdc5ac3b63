#include <benchmark/benchmark.h>

#include "diffkit/metrics.hpp"
#include "diffkit/presets.hpp"
#include "diffkit/samplers.hpp"

using namespace diffkit;

namespace {

const NoiseSchedule& sched() {
    static const NoiseSchedule s = build_cosine_schedule(1000);
    return s;
}

SamplerRun make_run(SamplerKind kind, int steps) {
    SamplerRun run;
    run.sampler_kind = kind;
    run.schedule = &sched();
    if (is_ddim(kind))
        run.subsequence = build_subsequence(sched(), steps, Strategy::quadratic, 0.0);
    const bool x0 = parameterization_for(kind) == Parameterization::x0_prediction;
    run.denoiser = make_denoiser(
        parameterization_for(kind), reference_mixture(),
        x0 ? std::optional<Condition>(Condition{StateVector::Zero(2), ""}) : std::nullopt);
    run.seed = 7;
    return run;
}

}  // namespace

static void BM_schedule_build(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(build_cosine_schedule(static_cast<int>(state.range(0))));
}
BENCHMARK(BM_schedule_build)->Arg(1000)->Arg(4000);

static void BM_subsequence_build(benchmark::State& state) {
    for (auto _ : state)
        benchmark::DoNotOptimize(build_subsequence(
            sched(), static_cast<int>(state.range(0)), Strategy::quadratic, 0.0));
}
BENCHMARK(BM_subsequence_build)->Arg(10)->Arg(100);

static void BM_mixture_predict(benchmark::State& state) {
    const SamplerRun run = make_run(SamplerKind::ddim_x0_pcdm, 10);
    StateVector x(2);
    x << 0.3, -0.8;
    for (auto _ : state)
        benchmark::DoNotOptimize(predict(run.denoiser, x, 500, sched()));
}
BENCHMARK(BM_mixture_predict);

// One full chain per iteration; steps/iteration makes the call-count savings
// directly visible in the time column.
static void BM_chain_ddim(benchmark::State& state) {
    SamplerRun run = make_run(SamplerKind::ddim_x0_pcdm, static_cast<int>(state.range(0)));
    std::uint64_t seed = 0;
    for (auto _ : state) {
        run.seed = seed++;
        benchmark::DoNotOptimize(run_chain(run));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_chain_ddim)->Arg(10)->Arg(20)->Arg(50)->Arg(100);

static void BM_chain_ddpm(benchmark::State& state) {
    SamplerRun run = make_run(SamplerKind::ddpm_x0, 0);
    std::uint64_t seed = 0;
    for (auto _ : state) {
        run.seed = seed++;
        benchmark::DoNotOptimize(run_chain(run));
    }
    state.SetItemsProcessed(state.iterations() * sched().T);
}
BENCHMARK(BM_chain_ddpm);

static void BM_energy_distance(benchmark::State& state) {
    const int n = static_cast<int>(state.range(0));
    GaussianRng rng(11);
    Eigen::MatrixXd a(n, 2), b(n, 2);
    for (int i = 0; i < n; ++i) {
        a.row(i) = rng.normal_vector(2).transpose();
        b.row(i) = rng.normal_vector(2).transpose();
    }
    for (auto _ : state) benchmark::DoNotOptimize(energy_distance(a, b));
}
BENCHMARK(BM_energy_distance)->Arg(500)->Arg(2000);

BENCHMARK_MAIN();
