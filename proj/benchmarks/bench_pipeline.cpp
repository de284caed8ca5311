#include <benchmark/benchmark.h>

#include "liquidsense/dsp.hpp"
#include "liquidsense/render.hpp"
#include "liquidsense/sloshsim.hpp"

namespace {

using namespace liquidsense;

SloshParams bench_params() {
    SloshParams params;
    params.damping_ratio = 0.16;
    params.natural_frequency_rad_s = 6.0;
    params.noise_sigma_nm = 0.05;
    return params;
}

void BM_SimulateShake(benchmark::State& state) {
    const SloshParams params = bench_params();
    std::uint64_t seed = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(simulate_shake(params, 10.0, 100.0, seed++));
    }
}
BENCHMARK(BM_SimulateShake);

void BM_Filtfilt(benchmark::State& state) {
    const TorqueSignal raw = simulate_shake(bench_params(), 10.0, 100.0, 1);
    const auto filt = ButterworthLowpass::design(5, 2.0, 100.0);
    for (auto _ : state) {
        benchmark::DoNotOptimize(filt.filtfilt(raw.samples));
    }
}
BENCHMARK(BM_Filtfilt);

void BM_ConditioningPipeline(benchmark::State& state) {
    const TorqueSignal raw = simulate_shake(bench_params(), 10.0, 100.0, 1);
    for (auto _ : state) {
        const TorqueSignal standardized = standardize(lowpass(raw));
        benchmark::DoNotOptimize(find_peaks(standardized, 0.1));
    }
}
BENCHMARK(BM_ConditioningPipeline);

void BM_RenderTimeseriesSvg(benchmark::State& state) {
    const TorqueSignal standardized = standardize(lowpass(simulate_shake(bench_params(),
                                                                         10.0, 100.0, 1)));
    const PlotStyle style;
    for (auto _ : state) {
        benchmark::DoNotOptimize(render_timeseries(standardized, style));
    }
}
BENCHMARK(BM_RenderTimeseriesSvg);

}  // namespace

BENCHMARK_MAIN();
