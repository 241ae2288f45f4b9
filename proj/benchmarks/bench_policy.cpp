#include <benchmark/benchmark.h>

#include "ascii_me/policy_network.hpp"
#include "ascii_me/rng.hpp"

namespace {

using namespace ascii_me;

PolicySpec spec_for(std::int64_t hidden) {
  PolicySpec spec;
  spec.state_dim = 4;
  spec.action_dim = 2;
  spec.hidden_layers = {static_cast<std::size_t>(hidden), static_cast<std::size_t>(hidden)};
  return spec;
}

void BM_ForwardBatch(benchmark::State& state) {
  const auto spec = spec_for(state.range(0));
  const auto g = init_genotype(spec, 1);
  const Matrix states = Matrix::Random(4, 100);
  PolicyTape tape(spec);
  for (auto _ : state) benchmark::DoNotOptimize(tape.forward(g, states).data());
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_ForwardBatch)->Arg(32)->Arg(64);

void BM_ForwardBackward(benchmark::State& state) {
  const auto spec = spec_for(state.range(0));
  const auto g = init_genotype(spec, 1);
  const Matrix states = Matrix::Random(4, 100);
  const Matrix cot = Matrix::Random(2, 100);
  PolicyTape tape(spec);
  for (auto _ : state) {
    tape.forward(g, states);
    benchmark::DoNotOptimize(tape.backward(g, cot).data());
  }
  state.SetItemsProcessed(state.iterations() * 100);
}
BENCHMARK(BM_ForwardBackward)->Arg(32)->Arg(64);

void BM_SingleStateForward(benchmark::State& state) {
  const auto spec = spec_for(64);
  const auto g = init_genotype(spec, 1);
  const Vector s = Vector::Random(4);
  for (auto _ : state) benchmark::DoNotOptimize(forward(spec, g, s).data());
}
BENCHMARK(BM_SingleStateForward);

}  // namespace
