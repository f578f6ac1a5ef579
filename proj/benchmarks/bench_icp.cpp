#include <benchmark/benchmark.h>

#include <numbers>

#include "fpps/dataflow_model.hpp"
#include "fpps/registration.hpp"
#include "fpps/synthetic.hpp"

namespace {

using namespace fpps;

void BM_Align(benchmark::State& state) {
    const auto backend = static_cast<nn::Backend>(state.range(0));
    const auto motion = synthetic::random_motion(3, 0.5, 5.0 * std::numbers::pi / 180.0);
    const auto pair = synthetic::make_synthetic_pair(4096, motion, 0.02, 0.05, 4);
    IcpConfig cfg;
    cfg.backend = backend;
    std::size_t iterations = 0;
    for (auto _ : state) {
        const IcpResult r = align(pair.source, pair.target, cfg);
        iterations = r.iterations_run;
        benchmark::DoNotOptimize(r.final_transform);
    }
    state.counters["icp_iterations"] = static_cast<double>(iterations);
    state.SetLabel(std::string(nn::to_string(backend)));
}
BENCHMARK(BM_Align)
    ->Arg(static_cast<int>(nn::Backend::parallel))
    ->Arg(static_cast<int>(nn::Backend::naive))
    ->Arg(static_cast<int>(nn::Backend::kdtree))
    ->Unit(benchmark::kMillisecond);

void BM_EstimatePipeline(benchmark::State& state) {
    dataflow::PipelineGeometry g;
    for (auto _ : state) benchmark::DoNotOptimize(dataflow::estimate_pipeline(g, 4096, 131072));
}
BENCHMARK(BM_EstimatePipeline);

}  // namespace

BENCHMARK_MAIN();
