#include <benchmark/benchmark.h>

#include "cvbandit/cv_estimation.hpp"
#include "cvbandit/environments.hpp"
#include "cvbandit/harness.hpp"
#include "cvbandit/policies.hpp"
#include "cvbandit/stats.hpp"

using namespace cvbandit;

namespace {

SampleBuffer gaussian_buffer(std::size_t s, std::uint64_t seed) {
    RandomSource rng(seed);
    SampleBuffer buf(0.0);
    const BivariateGaussianSpec spec{1.0, 0.0, 1.0, 1.0, 0.8};
    for (std::size_t i = 0; i < s; ++i) {
        const auto [x, w] = sample_bivariate_gaussian(spec, rng);
        buf.push(x, w);
    }
    return buf;
}

void BM_TQuantileCold(benchmark::State& state) {
    const StudentT t(state.range(0));
    double q = 1e-6;
    for (auto _ : state) {
        benchmark::DoNotOptimize(t.upper_quantile(q));
        q = q < 1e-3 ? q * 1.0001 : 1e-6;
    }
}
BENCHMARK(BM_TQuantileCold)->Arg(3)->Arg(100)->Arg(5000);

void BM_PercentileVCached(benchmark::State& state) {
    std::int64_t t = 1000;
    for (auto _ : state) benchmark::DoNotOptimize(percentile_v(t, 2.0, 40));
}
BENCHMARK(BM_PercentileVCached);

void BM_Estimate(benchmark::State& state) {
    const auto buf = gaussian_buffer(static_cast<std::size_t>(state.range(0)), 1);
    for (auto _ : state) benchmark::DoNotOptimize(estimate(buf));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Estimate)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_SplitEstimate(benchmark::State& state) {
    const auto buf = gaussian_buffer(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(split_estimate(buf));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_SplitEstimate)->RangeMultiplier(4)->Range(16, 4096)->Complexity();

void BM_PolicyRound(benchmark::State& state) {
    const auto kind = static_cast<PolicyKind>(state.range(0));
    PolicySpec spec;
    spec.kind = kind;
    for (auto _ : state) {
        state.PauseTiming();
        Environment env(suites::gaussian(0.8), RandomSource(3));
        Policy policy(spec, env.si_means());
        state.ResumeTiming();
        for (int t = 0; t < 5000; ++t) {
            const auto arm = policy.select_arm();
            policy.update(arm, env.pull(arm));
        }
    }
    state.SetItemsProcessed(state.iterations() * 5000);
    state.SetLabel(std::string(policy_name(kind)));
}
BENCHMARK(BM_PolicyRound)->DenseRange(0, 3)->Unit(benchmark::kMillisecond);

void BM_SingleRun(benchmark::State& state) {
    ExperimentConfig cfg;
    cfg.horizon = 5000;
    cfg.arms = suites::sinr();
    PolicySpec spec;
    cfg.policies = {spec};
    const auto ex = prepare(cfg);
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(run_single(ex, spec, ++seed));
}
BENCHMARK(BM_SingleRun)->Unit(benchmark::kMillisecond);

} // namespace
BENCHMARK_MAIN();
