#include <benchmark/benchmark.h>

#include "ascii_me/environments.hpp"
#include "ascii_me/variation_operators.hpp"

namespace {

using namespace ascii_me;

void BM_AsciiMutate(benchmark::State& state) {
  const auto env = make_environment("point_trap_omni");
  const auto spec = policy_spec_for(*env, {static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(0))});
  const AsciiConfig cfg;
  const auto parent_g = init_genotype(spec, 1);
  const auto target_g = init_genotype(spec, 2);
  const Rollout parent = rollout(*env, spec, parent_g, 11);
  const Rollout target = rollout(*env, spec, target_g, 12);
  const Vector parent_rtg = rewards_to_go(parent.rewards, cfg.gamma);
  const Trajectory traj{target.states, target.actions, rewards_to_go(target.rewards, cfg.gamma), 0};
  const AsciiParent p{parent_g, parent.states, parent_rtg};
  for (auto _ : state) benchmark::DoNotOptimize(ascii_mutate(p, traj, spec, cfg).params().data());
}
BENCHMARK(BM_AsciiMutate)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

void BM_IsoLineDD(benchmark::State& state) {
  const auto env = make_environment("point_trap_omni");
  const auto spec = policy_spec_for(*env);
  const auto a = init_genotype(spec, 1);
  const auto b = init_genotype(spec, 2);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(isoline_dd(a, b, IsoLineConfig{}, ++seed).params().data());
}
BENCHMARK(BM_IsoLineDD);

void BM_RewardsToGo(benchmark::State& state) {
  const Vector r = Vector::Random(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(rewards_to_go(r, 0.99).data());
}
BENCHMARK(BM_RewardsToGo)->Arg(100)->Arg(1000);

}  // namespace
