#include <benchmark/benchmark.h>

#include "ascii_me/archive.hpp"
#include "ascii_me/environments.hpp"

namespace {

using namespace ascii_me;

void BM_Rollout(benchmark::State& state, const char* name) {
  const auto env = make_environment(name);
  const auto spec = policy_spec_for(*env);
  const auto g = init_genotype(spec, 3);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(rollout(*env, spec, g, ++seed).fitness);
}
BENCHMARK_CAPTURE(BM_Rollout, point_trap_omni, "point_trap_omni")->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Rollout, arm_omni, "arm_omni")->Unit(benchmark::kMicrosecond);
BENCHMARK_CAPTURE(BM_Rollout, gait_uni, "gait_uni")->Unit(benchmark::kMicrosecond);

void BM_CellIndex(benchmark::State& state) {
  const Bounds bounds{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)};
  const auto centroids = generate_centroids(static_cast<std::size_t>(state.range(0)), bounds, 0, {20, 10});
  const Vector d = Vector::Random(2);
  for (auto _ : state) benchmark::DoNotOptimize(cell_index(centroids, d));
}
BENCHMARK(BM_CellIndex)->Arg(1024);

void BM_GenerateCentroids(benchmark::State& state) {
  const Bounds bounds{Vector::Constant(2, -1.0), Vector::Constant(2, 1.0)};
  for (auto _ : state) benchmark::DoNotOptimize(generate_centroids(1024, bounds, 0).points.data());
}
BENCHMARK(BM_GenerateCentroids)->Unit(benchmark::kMillisecond)->Iterations(1);

}  // namespace
