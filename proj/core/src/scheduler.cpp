#include "ascii_me/scheduler.hpp"

#include <chrono>
#include <cmath>

#include "ascii_me/rng.hpp"

namespace ascii_me {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

// Rewards-to-go post-processing, buffer insertion, then archive insertion in
// batch-index order. Returns the additions per operator.
OperatorCounts absorb_batch(std::vector<Rollout>& rollouts, std::vector<Genotype>& genotypes,
                            const std::vector<OperatorTag>& tags, std::int64_t iteration, double gamma,
                            ReplayBuffer& buffer, Archive& archive, std::size_t& truncated) {
  OperatorCounts added{};
  for (std::size_t i = 0; i < rollouts.size(); ++i) {
    Rollout& r = rollouts[i];
    if (r.truncated) ++truncated;
    Vector rtg = rewards_to_go(r.rewards, gamma);
    buffer.insert(Trajectory{r.states, std::move(r.actions), rtg, iteration});

    EliteRecord candidate;
    candidate.genotype = std::move(genotypes[i]);
    candidate.fitness = r.fitness;
    candidate.descriptor = std::move(r.descriptor);
    candidate.states = std::move(r.states);
    candidate.rewards_to_go = std::move(rtg);
    candidate.birth_iteration = iteration;
    candidate.operator_tag = tags[i];
    if (archive.try_add(std::move(candidate)) != AdditionOutcome::rejected) {
      ++added[static_cast<std::size_t>(tags[i])];
    }
  }
  return added;
}

IterationReport make_report(std::int64_t iteration, std::size_t evaluations, const Archive& archive,
                            const OperatorCounts& added, double iteration_ms, double wall_ms) {
  const auto m = archive.metrics();
  IterationReport rep;
  rep.iteration = iteration;
  rep.evaluations = evaluations;
  rep.qd_score = m.qd_score;
  rep.coverage = m.coverage;
  rep.max_fitness = m.max_fitness;
  rep.additions = added;
  rep.iteration_ms = iteration_ms;
  rep.wall_clock_ms = wall_ms;
  return rep;
}

}  // namespace

void RunConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (batch_size < 1) fail("batch_size must be >= 1");
  if (!(ga_fraction >= 0.0 && ga_fraction <= 1.0)) fail("ga_fraction must be in [0, 1]");
  if (eval_budget < batch_size) fail("eval_budget must be >= batch_size");
  if (worker_count < 1) fail("worker_count must be >= 1");
  if (archive.kind == ArchiveKind::cvt && archive.num_centroids < 1) fail("num_centroids must be >= 1");
  if (archive.kind == ArchiveKind::grid && archive.grid_per_dim < 1) fail("grid_per_dim must be >= 1");
  if (buffer.capacity_transitions < 1) fail("buffer.capacity_transitions must be >= 1");
  try {
    isoline.validate();
    ascii.validate();
    PolicySpec probe;
    probe.hidden_layers = policy.hidden_layers;
    probe.validate();
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
}

std::size_t RunConfig::ga_count() const {
  return static_cast<std::size_t>(std::llround(ga_fraction * static_cast<double>(batch_size)));
}

std::vector<Rollout> evaluate_batch(const Environment& env, const PolicySpec& spec,
                                    std::span<const Genotype> genotypes,
                                    std::span<const std::uint64_t> seeds, WorkerPool& pool) {
  if (genotypes.size() != seeds.size()) {
    throw std::invalid_argument("evaluate_batch: genotype and seed counts differ");
  }
  std::vector<Rollout> out(genotypes.size());
  pool.parallel_for(genotypes.size(), [&](std::size_t i) { out[i] = rollout(env, spec, genotypes[i], seeds[i]); });
  return out;
}

Centroids make_centroids(const ArchiveConfig& cfg, const EnvSpec& env) {
  const Bounds bounds{env.descriptor_lower, env.descriptor_upper};
  if (cfg.kind == ArchiveKind::grid) return grid_centroids(cfg.grid_per_dim, bounds);
  if (!cfg.cache_dir.empty()) {
    return cached_centroids(cfg.cache_dir, cfg.num_centroids, bounds, cfg.centroid_seed, cfg.cvt);
  }
  return generate_centroids(cfg.num_centroids, bounds, cfg.centroid_seed, cfg.cvt);
}

RunResult run(const RunConfig& config, const RunCallbacks& callbacks) {
  config.validate();
  const auto start = Clock::now();

  std::unique_ptr<Environment> env;
  try {
    env = make_environment(config.env_name, config.env_overrides);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const PolicySpec spec = policy_spec_for(*env, config.policy.hidden_layers, config.policy.activation,
                                          config.policy.output_squash);
  const std::size_t horizon = env->spec().horizon;
  const std::size_t k = config.batch_size;
  const std::size_t g = config.ga_count();

  Archive archive(make_centroids(config.archive, env->spec()));
  ReplayBuffer buffer(config.buffer.capacity_trajectories(horizon), horizon);
  WorkerPool pool(config.worker_count);

  std::vector<IterationReport> reports;
  AsciiDiagnostics diagnostics;
  std::size_t fallbacks = 0;
  std::size_t truncated = 0;

  auto emit = [&](IterationReport rep) {
    if (callbacks.on_report) callbacks.on_report(rep);
    reports.push_back(std::move(rep));
  };
  auto maybe_checkpoint = [&](std::int64_t iteration) {
    if (callbacks.on_checkpoint && config.checkpoint_every > 0 &&
        iteration % static_cast<std::int64_t>(config.checkpoint_every) == 0) {
      callbacks.on_checkpoint(archive, spec, iteration);
    }
  };

  // Initial population.
  std::vector<Genotype> genotypes(k);
  std::vector<std::uint64_t> seeds(k);
  std::vector<OperatorTag> tags(k, OperatorTag::init);
  for (std::size_t i = 0; i < k; ++i) {
    genotypes[i] = init_genotype(spec, stream_seed(config.seed, Stream::init_genotype, 0, i));
    seeds[i] = stream_seed(config.seed, Stream::rollout, 0, i);
  }
  auto iter_start = Clock::now();
  {
    auto rollouts = evaluate_batch(*env, spec, genotypes, seeds, pool);
    const auto added =
        absorb_batch(rollouts, genotypes, tags, 0, config.ascii.gamma, buffer, archive, truncated);
    emit(make_report(0, k, archive, added, ms_since(iter_start), ms_since(start)));
  }
  std::size_t evaluations = k;
  std::int64_t iteration = 0;

  std::vector<std::size_t> parents, partners, targets;
  std::vector<AsciiDiagnostics> slot_diagnostics(k);
  for (std::size_t i = 0; i < k; ++i) tags[i] = i < g ? OperatorTag::isoline : OperatorTag::ascii;

  while (evaluations < config.eval_budget) {
    ++iteration;
    iter_start = Clock::now();

    // Selection is drawn on the calling thread from one stream per iteration.
    Rng selection(stream_seed(config.seed, Stream::selection, static_cast<std::uint64_t>(iteration), 0));
    parents = archive.sample_uniform(k, selection);
    partners = archive.sample_uniform(g, selection);
    bool from_archive = config.buffer.source_mode == SourceMode::archive;
    if (k > g && !from_archive && buffer.empty()) {
      from_archive = true;
      ++fallbacks;
    }
    if (k > g) {
      targets = from_archive ? archive.sample_uniform(k - g, selection) : buffer.sample(k - g, selection);
    }

    for (auto& d : slot_diagnostics) d = {};
    std::vector<Rollout> rollouts(k);
    pool.parallel_for(k, [&](std::size_t i) {
      const EliteRecord& parent = *archive.cell(parents[i]);
      const std::uint64_t mutation_seed =
          stream_seed(config.seed, Stream::mutation, static_cast<std::uint64_t>(iteration), i);
      if (i < g) {
        genotypes[i] = isoline_dd(parent.genotype, archive.cell(partners[i])->genotype, config.isoline,
                                  mutation_seed);
      } else {
        const AsciiParent ascii_parent{parent.genotype, parent.states, parent.rewards_to_go};
        if (from_archive) {
          const Trajectory target = trajectory_from_elite(*archive.cell(targets[i - g]), spec);
          genotypes[i] = ascii_mutate(ascii_parent, target, spec, config.ascii, &slot_diagnostics[i]);
        } else {
          genotypes[i] =
              ascii_mutate(ascii_parent, buffer.at(targets[i - g]), spec, config.ascii, &slot_diagnostics[i]);
        }
      }
      rollouts[i] = rollout(*env, spec, genotypes[i],
                            stream_seed(config.seed, Stream::rollout, static_cast<std::uint64_t>(iteration), i));
    });
    for (const auto& d : slot_diagnostics) {
      diagnostics.nonfinite_aborts += d.nonfinite_aborts;
      diagnostics.degenerate_states += d.degenerate_states;
    }

    const auto added =
        absorb_batch(rollouts, genotypes, tags, iteration, config.ascii.gamma, buffer, archive, truncated);
    evaluations += k;
    emit(make_report(iteration, evaluations, archive, added, ms_since(iter_start), ms_since(start)));
    maybe_checkpoint(iteration);
  }

  RunResult result{std::move(archive), std::move(reports), spec, env->spec(), diagnostics, fallbacks,
                   truncated, evaluations, ms_since(start)};
  return result;
}

}  // namespace ascii_me
