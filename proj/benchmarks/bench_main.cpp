#include <benchmark/benchmark.h>

#include <random>

#include "hid/diffusion.hpp"
#include "hid/headswap.hpp"
#include "hid/imaging.hpp"

namespace {

const hid::NoisePredictor& predictor() {
    static const hid::NoisePredictor pred =
        hid::NoisePredictor::from_renders(hid::enumerate_dataset());
    return pred;
}

void BM_EmpiricalEps(benchmark::State& state) {
    const hid::NoiseSchedule sched = hid::make_schedule(50);
    hid::PixelGrid z(hid::kAvatarSize, hid::kAvatarSize, 3);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n;
    for (double& v : z.values()) v = n(rng);
    const int t = static_cast<int>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(hid::empirical_eps(z, t, hid::Condition{}, predictor(), sched));
    }
}
BENCHMARK(BM_EmpiricalEps)->Arg(1)->Arg(40)->Unit(benchmark::kMicrosecond);

void BM_GaussianFilter(benchmark::State& state) {
    hid::ScalarField f(hid::kAvatarSize, hid::kAvatarSize);
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u;
    for (int r = 0; r < f.height(); ++r) {
        for (int c = 0; c < f.width(); ++c) f.at(r, c) = u(rng);
    }
    for (auto _ : state) benchmark::DoNotOptimize(hid::gaussian_filter(f, 2.0));
}
BENCHMARK(BM_GaussianFilter)->Unit(benchmark::kMicrosecond);

// One full swap: inversion, mask, and the masked guided loop at T = 50.
void BM_RunHeadswap(benchmark::State& state) {
    const hid::NoiseSchedule sched = hid::make_schedule(50);
    const hid::SwapConfig cfg;
    const hid::AttributeSpec body = hid::AttributeSpec::from_ordinal(200);
    const hid::AttributeSpec head = hid::AttributeSpec::from_ordinal(17);
    predictor();
    for (auto _ : state) {
        benchmark::DoNotOptimize(hid::run_headswap(body, head, cfg, sched, predictor()));
    }
}
BENCHMARK(BM_RunHeadswap)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
