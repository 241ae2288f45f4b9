#include <gtest/gtest.h>

#include <map>

#include "ascii_me/replay_buffer.hpp"
#include "ascii_me/scheduler.hpp"
#include "oracles.hpp"

using namespace ascii_me;

namespace {

Trajectory tagged(std::int64_t tag, Eigen::Index horizon = 4) {
  return Trajectory{Matrix::Constant(2, horizon, static_cast<double>(tag)), Matrix::Zero(1, horizon),
                    Vector::Zero(horizon), tag};
}

}  // namespace

TEST(ReplayBuffer, CapacityFromTransitions) {
  EXPECT_EQ(BufferConfig{1'024'000}.capacity_trajectories(100), 10240u);
  EXPECT_EQ(BufferConfig{50}.capacity_trajectories(100), 1u);
  EXPECT_EQ(BufferConfig{250}.capacity_trajectories(100), 2u);
  EXPECT_THROW(BufferConfig{}.capacity_trajectories(0), std::invalid_argument);
  EXPECT_THROW(ReplayBuffer(0, 4), std::invalid_argument);
}

TEST(ReplayBuffer, FifoOverwrite) {
  ReplayBuffer b(3, 4);
  EXPECT_TRUE(b.empty());
  EXPECT_THROW(b.sample(1, 0), std::logic_error);
  for (int i = 0; i < 7; ++i) b.insert(tagged(i));
  EXPECT_EQ(b.size(), 3u);
  EXPECT_EQ(b.total_inserted(), 7u);
  std::vector<std::int64_t> held;
  for (std::size_t s = 0; s < 3; ++s) {
    held.push_back(b.at(s).source_iteration);
    EXPECT_EQ(b.sequence_of(s), static_cast<std::uint64_t>(b.at(s).source_iteration));
  }
  std::sort(held.begin(), held.end());
  EXPECT_EQ(held, (std::vector<std::int64_t>{4, 5, 6}));
  EXPECT_THROW(b.sequence_of(3), std::out_of_range);
}

TEST(ReplayBuffer, RejectsHorizonMismatch) {
  ReplayBuffer b(3, 4);
  EXPECT_THROW(b.insert(tagged(0, 5)), std::invalid_argument);
  Trajectory t = tagged(0);
  t.rewards_to_go = Vector::Zero(3);
  EXPECT_THROW(b.insert(t), std::invalid_argument);
}

TEST(ReplayBuffer, UniformSampling) {
  ReplayBuffer b(4, 4);
  for (int i = 0; i < 4; ++i) b.insert(tagged(i));
  const auto draws = b.sample(100000, 3);
  std::map<std::size_t, int> counts;
  for (auto d : draws) ++counts[d];
  ASSERT_EQ(counts.size(), 4u);
  for (const auto& [slot, n] : counts) EXPECT_NEAR(n / 100000.0, 0.25, 0.01) << slot;
  EXPECT_EQ(draws, b.sample(100000, 3));
}

TEST(ReplayBuffer, ConservesContent) {
  ReplayBuffer b(5, 4);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n;
  std::vector<Trajectory> inserted;
  for (int i = 0; i < 12; ++i) {
    Trajectory t{Matrix(2, 4), Matrix(1, 4), Vector(4), i};
    for (auto& v : t.states.reshaped()) v = n(rng);
    for (auto& v : t.actions.reshaped()) v = n(rng);
    for (auto& v : t.rewards_to_go) v = n(rng);
    inserted.push_back(t);
    b.insert(std::move(t));
  }
  for (std::size_t s = 0; s < b.size(); ++s) {
    const Trajectory& t = b.at(s);
    const Trajectory& orig = inserted[b.sequence_of(s)];
    EXPECT_EQ(t.states, orig.states);
    EXPECT_EQ(t.actions, orig.actions);
    EXPECT_EQ(t.rewards_to_go, orig.rewards_to_go);
  }
}

TEST(ReplayBuffer, EliteTargetRecomputesActions) {
  const PolicySpec spec{2, 2, {4}, Activation::tanh, true};
  EliteRecord e;
  e.genotype = init_genotype(spec, 2);
  e.states = Matrix::Random(2, 6);
  e.rewards_to_go = Vector::LinSpaced(6, 5.0, 0.0);
  e.birth_iteration = 3;
  const Trajectory t = trajectory_from_elite(e, spec);
  EXPECT_EQ(t.states, e.states);
  EXPECT_EQ(t.rewards_to_go, e.rewards_to_go);
  EXPECT_EQ(t.source_iteration, 3);
  for (Eigen::Index c = 0; c < 6; ++c) {
    EXPECT_LT((t.actions.col(c) - oracle::forward(spec, e.genotype, e.states.col(c))).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(SourceMode, Names) {
  EXPECT_EQ(source_mode_from_string(to_string(SourceMode::buffer)), SourceMode::buffer);
  EXPECT_EQ(source_mode_from_string(to_string(SourceMode::archive)), SourceMode::archive);
  EXPECT_THROW(source_mode_from_string("replay"), std::invalid_argument);
}

TEST(SourceMode, BothModesRun) {
  for (auto mode : {SourceMode::buffer, SourceMode::archive}) {
    RunConfig cfg;
    cfg.env_overrides = {{"horizon", 20}};
    cfg.policy.hidden_layers = {8};
    cfg.batch_size = 16;
    cfg.eval_budget = 64;
    cfg.archive.num_centroids = 32;
    cfg.buffer.source_mode = mode;
    const RunResult r = run(cfg);
    EXPECT_EQ(r.total_evaluations, 64u);
    EXPECT_EQ(r.ascii_buffer_fallbacks, 0u);
    EXPECT_GT(r.archive.occupied(), 0u);
  }
}
