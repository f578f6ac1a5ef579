#include <benchmark/benchmark.h>

#include "fpps/kdtree.hpp"
#include "fpps/nn_engine.hpp"
#include "fpps/synthetic.hpp"

namespace {

using namespace fpps;

// Source of 4096 points against a target of range(0) points.
struct Clouds {
    PointCloud source, target;
    explicit Clouds(std::size_t n_target)
        : source(synthetic::make_scene(4096, 1)), target(synthetic::make_scene(n_target, 2)) {}
};

void BM_Parallel(benchmark::State& state) {
    const Clouds c(static_cast<std::size_t>(state.range(0)));
    nn::TileConfig cfg;
    cfg.target_partitions = static_cast<std::size_t>(state.range(1));
    for (auto _ : state) benchmark::DoNotOptimize(nn::brute_force_nn(c.source, c.target, cfg));
    state.SetItemsProcessed(state.iterations() * 4096 * state.range(0));
}
BENCHMARK(BM_Parallel)->ArgsProduct({{8192, 32768}, {1, 4, 16, 64}})->Unit(benchmark::kMillisecond);

void BM_Naive(benchmark::State& state) {
    const Clouds c(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(nn::naive_nn(c.source, c.target));
    state.SetItemsProcessed(state.iterations() * 4096 * state.range(0));
}
BENCHMARK(BM_Naive)->Arg(8192)->Arg(32768)->Unit(benchmark::kMillisecond);

void BM_KdTreeQuery(benchmark::State& state) {
    const Clouds c(static_cast<std::size_t>(state.range(0)));
    const nn::KdTree tree(c.target);
    for (auto _ : state) benchmark::DoNotOptimize(nn::kdtree_nn(tree, c.source));
}
BENCHMARK(BM_KdTreeQuery)->Arg(8192)->Arg(131072)->Unit(benchmark::kMillisecond);

void BM_KdTreeBuild(benchmark::State& state) {
    const PointCloud target = synthetic::make_scene(static_cast<std::size_t>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(nn::KdTree(target));
}
BENCHMARK(BM_KdTreeBuild)->Arg(131072)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
