// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only N]...
//
// Exit status is 0 when every selected criterion passes, 1 when one fails,
// and 77 when the only failures are criteria whose hardware precondition
// does not hold on this machine.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "ascii_me/bench.hpp"
#include "ascii_me/scheduler.hpp"
#include "oracles.hpp"

using namespace ascii_me;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kVjpRelTol = 1e-5;
constexpr double kVjpRelFloor = 1e-6;
constexpr double kFdStep = 1e-3;  // fourth-order central stencil
constexpr double kVjpTimeLimitS = 10.0;
constexpr double kJacobianAbsTol = 1e-10;
constexpr double kRtgTol = 1e-12;
constexpr double kDeterminismTimeLimitS = 300.0;
constexpr double kBatchCvLimit = 0.10;
constexpr double kScalingRatioLimit = 0.5;
constexpr unsigned kScalingCores = 8;
constexpr double kEfficiencyTol = 1e-12;

struct Outcome {
  bool pass = false;
  std::string detail;
  bool precondition_unmet = false;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path centroid_cache() {
  if (const char* env = std::getenv("ASCII_ME_CENTROID_CACHE")) return env;
  return fs::temp_directory_path() / "ascii_me_acceptance_centroids";
}

RunConfig point_trap_config() {
  RunConfig cfg;
  cfg.env_name = "point_trap_omni";
  cfg.archive.cache_dir = centroid_cache().string();
  return cfg;
}

Matrix random_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Matrix m(rows, cols);
  for (auto& v : m.reshaped()) v = n(rng);
  return m;
}

// ---------------------------------------------------------------------------

Outcome gradient_correctness() {
  const auto start = Clock::now();
  const PolicySpec spec{8, 4, {16, 16}, Activation::tanh, true};
  std::mt19937_64 rng(1);
  double worst = 0.0;
  for (int net = 0; net < 100; ++net) {
    const Genotype g = init_genotype(spec, static_cast<std::uint64_t>(net));
    const Vector s = random_matrix(8, 1, rng);
    const Vector c = random_matrix(4, 1, rng);
    const Vector grad = vjp(spec, g, s, c);
    Vector x = g.params();
    for (Eigen::Index k = 0; k < x.size(); ++k) {
      const double orig = x[k];
      auto at = [&](double offset) {
        x[k] = orig + offset;
        return forward(spec, Genotype(x), s).dot(c);
      };
      const double fd =
          (at(-2 * kFdStep) - 8 * at(-kFdStep) + 8 * at(kFdStep) - at(2 * kFdStep)) / (12.0 * kFdStep);
      x[k] = orig;
      worst = std::max(worst, oracle::rel_error(grad[k], fd, kVjpRelFloor));
    }
  }
  const double elapsed = seconds_since(start);
  return {worst < kVjpRelTol && elapsed < kVjpTimeLimitS,
          fmt("max rel error %.3g (< %.0e), %.2f s (< %.0f s)", worst, kVjpRelTol, elapsed, kVjpTimeLimitS)};
}

Outcome weight_cases() {
  const AsciiConfig cfg;
  const double half_kernel_gap = std::sqrt(2.0 * cfg.sigma_sq * std::log(2.0));
  Matrix s_i(2, 4), s_j(2, 4), a_j(1, 4), a_im(1, 4);
  s_i << 1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0;
  s_j << 1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0;
  a_j << 0.3, half_kernel_gap, 0.3, half_kernel_gap;
  a_im << 0.3, 0.0, 0.3, 0.0;
  const Vector g_j = (Vector(4) << 2.0, -1.0, 4.0, 1.0).finished();
  const auto w = weight_vector(static_weight_terms(s_i, Vector::Zero(4), s_j, g_j, cfg), a_j, a_im, cfg);
  const bool identical = w.z[0] == 2.0;
  const bool clipped = w.kernel[1] < cfg.epsilon && w.z[1] == 0.0;
  const bool orthogonal = w.z[2] == 1.0;
  const bool not_clipped = w.kernel[3] < cfg.epsilon && w.z[3] == w.kernel[3] * 1.0 * 1.0 &&
                           std::abs(w.kernel[3] - 0.5) <= 1e-15;
  return {identical && clipped && orthogonal && not_clipped,
          fmt("z = [%.17g, %.17g, %.17g, %.17g], expected [2, 0, 1, 0.5]", w.z[0], w.z[1], w.z[2], w.z[3])};
}

Outcome dense_jacobian() {
  const PolicySpec spec{2, 2, {4}, Activation::tanh, true};
  AsciiConfig cfg;
  cfg.iterations = 1;
  std::mt19937_64 rng(5);
  const Eigen::Index h = 12;
  double worst = 0.0, largest_step = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Genotype x = init_genotype(spec, static_cast<std::uint64_t>(trial));
    const Matrix s_i = random_matrix(2, h, rng), s_j = random_matrix(2, h, rng);
    const Vector g_i = random_matrix(h, 1, rng) * 3.0, g_j = random_matrix(h, 1, rng) * 3.0;
    const Matrix a_j = random_matrix(2, h, rng) * 0.7;
    const Genotype child = ascii_mutate({x, s_i, g_i}, Trajectory{s_j, a_j, g_j, 0}, spec, cfg);

    // Stack the per-step blocks: J is (2H x P), Z = diag(z_t I), A_j - A_i is 2H.
    const auto p = static_cast<Eigen::Index>(x.size());
    Matrix J(2 * h, p);
    Vector z(2 * h), diff(2 * h);
    for (Eigen::Index t = 0; t < h; ++t) {
      const Vector mu = oracle::forward(spec, x, s_j.col(t));
      J.middleRows(2 * t, 2) = oracle::jacobian(spec, x, s_j.col(t));
      const double zt =
          oracle::weight(s_i.col(t), s_j.col(t), g_i[t], g_j[t], a_j.col(t), mu, cfg.sigma_sq, cfg.epsilon, cfg.b);
      z.segment(2 * t, 2).setConstant(zt);
      diff.segment(2 * t, 2) = a_j.col(t) - mu;
    }
    const Vector expected = x.params() + cfg.lambda2(static_cast<std::size_t>(h)) * J.transpose() * z.asDiagonal() * diff;
    worst = std::max(worst, (child.params() - expected).cwiseAbs().maxCoeff());
    largest_step = std::max(largest_step, (child.params() - x.params()).cwiseAbs().maxCoeff());
  }
  return {worst < kJacobianAbsTol,
          fmt("%zu-parameter network, max abs error %.3g (< %.0e), largest update %.3g", parameter_count(spec), worst,
              kJacobianAbsTol, largest_step)};
}

Outcome rewards_to_go_oracle() {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> r(250);
    for (auto& v : r) v = n(rng);
    const Vector g = rewards_to_go(Eigen::Map<const Vector>(r.data(), 250), 0.99);
    const auto expected = oracle::rewards_to_go(r, 0.99);
    for (std::size_t t = 0; t < 250; ++t) worst = std::max(worst, std::abs(g[static_cast<Eigen::Index>(t)] - expected[t]));
  }
  return {worst < kRtgTol, fmt("1000 vectors, H = 250, max abs error %.3g (< %.0e)", worst, kRtgTol)};
}

Outcome archive_elitism() {
  const EnvSpec env = make_environment("point_trap_omni")->spec();
  const Bounds bounds{env.descriptor_lower, env.descriptor_upper};
  const Centroids centroids = cached_centroids(centroid_cache(), 1024, bounds, 0);
  Archive archive(centroids);
  std::map<std::size_t, std::pair<double, Vector>> shadow;
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-3.0, 3.0), fit(0.0, 100.0);
  double prev_qd = 0.0, prev_cov = 0.0;
  bool monotone = true;
  for (int i = 0; i < 100000; ++i) {
    EliteRecord e;
    e.descriptor = (Vector(2) << pos(rng), pos(rng)).finished();
    e.fitness = fit(rng);
    e.genotype = Genotype(Vector::Constant(1, e.fitness));
    const std::size_t cell = cell_index(centroids, e.descriptor);
    auto it = shadow.find(cell);
    if (it == shadow.end() || e.fitness > it->second.first) shadow[cell] = {e.fitness, e.descriptor};
    archive.try_add(std::move(e));
    const auto m = archive.metrics();
    monotone = monotone && m.qd_score >= prev_qd && m.coverage >= prev_cov;
    prev_qd = m.qd_score;
    prev_cov = m.coverage;
  }
  bool identical = archive.occupied() == shadow.size();
  for (const auto& [cell, entry] : shadow) {
    const auto& elite = archive.cell(cell);
    identical = identical && elite && elite->fitness == entry.first && elite->descriptor == entry.second;
  }
  return {identical && monotone, fmt("%zu cells, contents %s, metrics %s", shadow.size(),
                                     identical ? "identical" : "DIFFER", monotone ? "monotone" : "NOT monotone")};
}

Outcome determinism() {
  const auto start = Clock::now();
  RunConfig cfg = point_trap_config();
  cfg.batch_size = 1024;
  cfg.eval_budget = 5000;
  std::vector<std::vector<std::pair<std::size_t, double>>> tables;
  std::vector<double> qd;
  for (std::size_t workers : {1u, 4u, 8u}) {
    cfg.worker_count = workers;
    const RunResult r = run(cfg);
    std::vector<std::pair<std::size_t, double>> table;
    for (std::size_t idx = 0; idx < r.archive.capacity(); ++idx) {
      if (r.archive.cell(idx)) table.emplace_back(idx, r.archive.cell(idx)->fitness);
    }
    tables.push_back(std::move(table));
    qd.push_back(r.archive.metrics().qd_score);
  }
  const double elapsed = seconds_since(start);
  const bool same = tables[0] == tables[1] && tables[0] == tables[2];
  return {same && elapsed < kDeterminismTimeLimitS,
          fmt("workers 1/4/8 fitness tables %s (qd %.12g), %.1f s (< %.0f s)", same ? "bit-identical" : "DIFFER",
              qd[0], elapsed, kDeterminismTimeLimitS)};
}

// Runs shared by the synergy and batch-size criteria.
struct FinalMetrics {
  double qd_score;
  double coverage;
};

FinalMetrics point_trap_run(double ga_fraction, std::size_t batch_size, std::uint64_t seed) {
  static std::map<std::tuple<double, std::size_t, std::uint64_t>, FinalMetrics> memo;
  const auto key = std::tuple{ga_fraction, batch_size, seed};
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  RunConfig cfg = point_trap_config();
  cfg.ga_fraction = ga_fraction;
  cfg.batch_size = batch_size;
  cfg.eval_budget = 50'000;
  cfg.seed = seed;
  const auto start = Clock::now();
  const auto m = run(cfg).archive.metrics();
  std::fprintf(stderr, "  run ga_fraction=%g batch_size=%zu seed=%llu: qd %.6g coverage %.4g%% (%.0f s)\n",
               ga_fraction, batch_size, static_cast<unsigned long long>(seed), m.qd_score, m.coverage,
               seconds_since(start));
  return memo[key] = {m.qd_score, m.coverage};
}

constexpr std::uint64_t kSeeds = 5;

Outcome operator_synergy() {
  std::vector<double> qd_half, qd_ga, cov_half, cov_ga;
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    const auto a = point_trap_run(0.5, 4096, seed);
    const auto b = point_trap_run(1.0, 4096, seed);
    qd_half.push_back(a.qd_score);
    cov_half.push_back(a.coverage);
    qd_ga.push_back(b.qd_score);
    cov_ga.push_back(b.coverage);
  }
  const double mq_half = quantile(qd_half, 0.5), mq_ga = quantile(qd_ga, 0.5);
  const double mc_half = quantile(cov_half, 0.5), mc_ga = quantile(cov_ga, 0.5);
  return {mq_half >= mq_ga && mc_half > mc_ga,
          fmt("median qd %.6g (ga 0.5) vs %.6g (ga 1.0); median coverage %.4g%% vs %.4g%%", mq_half, mq_ga, mc_half,
              mc_ga)};
}

Outcome batch_size_stability() {
  std::vector<double> medians;
  std::string detail = "median qd";
  for (std::size_t k : {256u, 1024u, 4096u}) {
    std::vector<double> qd;
    for (std::uint64_t seed = 0; seed < kSeeds; ++seed) qd.push_back(point_trap_run(0.5, k, seed).qd_score);
    medians.push_back(quantile(qd, 0.5));
    detail += fmt(" k=%zu: %.6g", k, medians.back());
  }
  double mean = 0.0, var = 0.0;
  for (double m : medians) mean += m;
  mean /= static_cast<double>(medians.size());
  for (double m : medians) var += (m - mean) * (m - mean);
  const double cv = std::sqrt(var / static_cast<double>(medians.size())) / mean;
  return {cv <= kBatchCvLimit, detail + fmt("; CV %.3g%% (<= %.0f%%)", 100.0 * cv, 100.0 * kBatchCvLimit)};
}

Outcome throughput_scaling() {
  RunConfig cfg = point_trap_config();
  cfg.batch_size = 4096;
  cfg.eval_budget = 2 * 4096;  // initial batch plus one full iteration
  double ms[2];
  std::size_t i = 0;
  for (std::size_t workers : {1u, kScalingCores}) {
    cfg.worker_count = workers;
    ms[i++] = run(cfg).reports.at(1).iteration_ms;
  }
  const double ratio = ms[1] / ms[0];
  const unsigned cores = std::thread::hardware_concurrency();
  Outcome o{ratio <= kScalingRatioLimit,
            fmt("iteration %.0f ms (1 worker) vs %.0f ms (%u workers), ratio %.3f (<= %.1f), %u hardware threads",
                ms[0], ms[1], kScalingCores, ratio, kScalingRatioLimit, cores)};
  if (cores < kScalingCores) {
    o.precondition_unmet = true;
    o.detail += fmt("; needs %u cores", kScalingCores);
  }
  return o;
}

std::vector<EfficiencyInput> fixture_inputs() {
  std::ifstream in(fs::path(ASCII_ME_FIXTURE_DIR) / "efficiency" / "input.csv");
  std::string line;
  std::getline(in, line);
  std::vector<EfficiencyInput> out;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string f[5];
    for (auto& x : f) std::getline(ss, x, ',');
    out.push_back({f[0], f[1], std::stoll(f[2]), std::stod(f[3]), std::stod(f[4])});
  }
  return out;
}

Outcome efficiency_procedure() {
  const auto inputs = fixture_inputs();
  const auto table = efficiency_scores(inputs);
  // Hand-computed expectations for the committed fixture, keyed by (algorithm, task, batch).
  const std::map<std::tuple<std::string, std::string, std::int64_t>, double> expected = {
      {{"ga", "t1", 256}, 1.0},  {{"ga", "t1", 1024}, 1.0},   {{"ga", "t1", 4096}, 1.0},
      {{"me", "t1", 256}, 0.0},  {{"me", "t1", 1024}, 0.375}, {{"me", "t1", 4096}, 0.0},
      {{"me", "t2", 256}, 0.0},  {{"me", "t2", 1024}, 1.0},   {{"me", "t2", 4096}, 0.5}};
  const std::map<std::pair<std::string, std::int64_t>, double> expected_means = {
      {{"ga", 256}, 1.0}, {{"ga", 1024}, 1.0}, {{"ga", 4096}, 1.0},
      {{"me", 256}, 0.0}, {{"me", 1024}, 0.6875}, {{"me", 4096}, 0.25}};
  double worst = 0.0;
  bool complete = table.rows.size() == expected.size() && table.means.size() == expected_means.size();
  for (const auto& r : table.rows) {
    const auto it = expected.find({r.algorithm, r.task, r.batch_size});
    if (it == expected.end()) complete = false;
    else worst = std::max(worst, std::abs(r.score - it->second));
  }
  for (const auto& m : table.means) {
    const auto it = expected_means.find({m.algorithm, m.batch_size});
    if (it == expected_means.end()) complete = false;
    else worst = std::max(worst, std::abs(m.mean_score - it->second));
  }
  const bool argmax_ok = table.best_batch_size.at("me") == 1024 && table.best_batch_size.at("ga") == 256;

  std::mt19937_64 rng(10);
  std::uniform_real_distribution<double> scale(-6.0, 6.0);
  int invariant = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double f = std::exp(scale(rng));
    auto rescaled = inputs;
    for (auto& e : rescaled) e.runtime *= f;
    invariant += efficiency_scores(rescaled).best_batch_size == table.best_batch_size;
  }
  return {complete && worst < kEfficiencyTol && argmax_ok && invariant == 1000,
          fmt("fixture max abs error %.3g (< %.0e), argmax %s, invariant under %d/1000 runtime rescalings", worst,
              kEfficiencyTol, argmax_ok ? "matches" : "DIFFERS", invariant)};
}

Outcome attribution_conservation() {
  struct Case {
    const char* env;
    double ga;
    SourceMode mode;
  };
  const Case cases[] = {{"point_trap_omni", 0.5, SourceMode::buffer}, {"point_trap_omni", 0.0, SourceMode::archive},
                        {"point_trap_omni", 1.0, SourceMode::buffer}, {"arm_omni", 0.5, SourceMode::buffer},
                        {"gait_uni", 0.5, SourceMode::archive}};
  std::size_t ok = 0;
  std::int64_t total = 0;
  for (const auto& c : cases) {
    RunConfig cfg = point_trap_config();
    cfg.env_name = c.env;
    cfg.ga_fraction = c.ga;
    cfg.buffer.source_mode = c.mode;
    cfg.batch_size = 256;
    cfg.eval_budget = 2048;
    const RunResult r = run(cfg);
    OperatorCounts sum{};
    for (const auto& rep : r.reports) {
      for (std::size_t k = 0; k < kOperatorCount; ++k) sum[k] += rep.additions[k];
    }
    ok += sum == r.archive.addition_counters();
    for (auto v : sum) total += v;
  }
  constexpr std::size_t n = sizeof cases / sizeof cases[0];
  return {ok == n, fmt("%zu/%zu runs conserve counts (%lld additions)", ok, n, static_cast<long long>(total))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::vector<int> only;
  app.add_option("--only", only, "Run only these criteria (repeatable)")->check(CLI::Range(1, 11));
  CLI11_PARSE(app, argc, argv);

  const std::vector<std::pair<int, std::function<Outcome()>>> criteria = {
      {1, gradient_correctness},     {2, weight_cases},         {3, dense_jacobian},
      {4, rewards_to_go_oracle},     {5, archive_elitism},      {6, determinism},
      {7, operator_synergy},         {8, batch_size_stability}, {9, throughput_scaling},
      {10, efficiency_procedure},    {11, attribution_conservation}};
  const std::set<int> selected(only.begin(), only.end());

  bool failed = false, unmet = false;
  for (const auto& [id, check] : criteria) {
    if (!selected.empty() && !selected.contains(id)) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d: %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) (o.precondition_unmet ? unmet : failed) = true;
  }
  if (failed) return 1;
  return unmet ? 77 : 0;
}
