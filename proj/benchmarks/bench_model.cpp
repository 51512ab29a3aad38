#include <benchmark/benchmark.h>

#include <vector>

#include "gmface/model.hpp"
#include "gmface/train.hpp"

namespace {

gmface::GmModel make_model(int m) { return gmface::init_model(m, 120, 120, 42); }

void BM_Render(benchmark::State& state) {
    const gmface::GmModel model = make_model(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(gmface::render(model));
    }
}
BENCHMARK(BM_Render)->Arg(40)->Arg(80);

void BM_ComputeGradients(benchmark::State& state) {
    const gmface::GmModel model = make_model(static_cast<int>(state.range(0)));
    const std::vector<gmface::ImageGrid> targets{gmface::render(make_model(8))};
    for (auto _ : state) {
        benchmark::DoNotOptimize(gmface::compute_gradients(model, targets, 0.1));
    }
}
BENCHMARK(BM_ComputeGradients)->Arg(40)->Arg(80);

void BM_ComputeLoss(benchmark::State& state) {
    const gmface::GmModel model = make_model(80);
    const std::vector<gmface::ImageGrid> targets{gmface::render(make_model(8))};
    for (auto _ : state) {
        benchmark::DoNotOptimize(gmface::compute_loss(model, targets, 0.1));
    }
}
BENCHMARK(BM_ComputeLoss);

}  // namespace

BENCHMARK_MAIN();
