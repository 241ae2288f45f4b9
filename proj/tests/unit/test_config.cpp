#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>

#include "ascii_me/config.hpp"

using namespace ascii_me;
using nlohmann::json;

TEST(Config, RoundTrip) {
  RunConfig c;
  c.env_name = "gait_uni";
  c.env_overrides = {{"horizon", 50}};
  c.policy.hidden_layers = {32};
  c.batch_size = 256;
  c.ga_fraction = 0.25;
  c.ascii.iterations = 8;
  c.buffer.source_mode = SourceMode::archive;
  c.archive.kind = ArchiveKind::grid;
  c.checkpoint_every = 3;
  const json j = to_json(c);
  EXPECT_EQ(to_json(run_config_from_json(j)), j);
  EXPECT_EQ(j.at("env").at("name"), "gait_uni");
  EXPECT_EQ(j.at("env").at("horizon"), 50);
}

TEST(Config, UnknownKeysAreRejected) {
  json j = to_json(RunConfig{});
  j["batchsize"] = 12;
  EXPECT_THROW(run_config_from_json(j), ConfigError);
  json k = to_json(RunConfig{});
  k["operators"]["ascii"]["sigma"] = 1.0;
  EXPECT_THROW(run_config_from_json(k), ConfigError);
  json t = to_json(RunConfig{});
  t["batch_size"] = "large";
  EXPECT_THROW(run_config_from_json(t), ConfigError);
}

TEST(Config, PartialDocumentUsesDefaults) {
  const RunConfig c = run_config_from_json(json{{"batch_size", 64}});
  EXPECT_EQ(c.batch_size, 64u);
  EXPECT_EQ(c.ga_fraction, 0.5);
  EXPECT_EQ(c.ascii.iterations, 32u);
}

TEST(Config, Overrides) {
  json doc = json::object();
  apply_override(doc, "operators.ascii.alpha=0.01");
  apply_override(doc, "env.name=arm_omni");
  apply_override(doc, "policy.hidden_layers=[16,16]");
  EXPECT_EQ(doc["operators"]["ascii"]["alpha"], 0.01);
  EXPECT_EQ(doc["env"]["name"], "arm_omni");
  EXPECT_EQ(doc["policy"]["hidden_layers"], json({16, 16}));
  EXPECT_THROW(apply_override(doc, "no_equals_sign"), ConfigError);
}

TEST(Config, ResolveFromFile) {
  const auto path = std::filesystem::temp_directory_path() / "ascii_me_config_test.json";
  std::ofstream(path) << R"({"batch_size": 128, "seed": 4})";
  const RunConfig c = resolve_run_config(path.string(), {"seed=9"});
  EXPECT_EQ(c.batch_size, 128u);
  EXPECT_EQ(c.seed, 9u);
  std::filesystem::remove(path);
  EXPECT_THROW(resolve_run_config("/nonexistent/config.json", {}), ConfigError);
  EXPECT_THROW(resolve_run_config("", {"ga_fraction=2"}), ConfigError);
}

#ifdef ASCII_ME_CLI
namespace {
int cli(const std::string& args) {
  const std::string cmd = std::string(ASCII_ME_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST(Cli, ExitCodes) {
  const auto out = std::filesystem::temp_directory_path() / "ascii_me_cli_test";
  std::filesystem::remove_all(out);
  EXPECT_EQ(cli("run --set bogus=1"), 2);
  EXPECT_EQ(cli("run --set batch_size=0"), 2);
  EXPECT_EQ(cli("sweep --axis depth --values 1"), 2);
  EXPECT_EQ(cli("report " + (out / "missing").string()), 1);
  std::filesystem::create_directories(out / "empty");
  EXPECT_EQ(cli("report " + (out / "empty").string()), 4);
  const std::string small =
      " --set env.horizon=10 --set policy.hidden_layers=[4] --set batch_size=8 --set eval_budget=16"
      " --set archive.num_centroids=8";
  EXPECT_EQ(cli("run" + small + " --out " + (out / "r").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(out / "r" / "summary.json"));
  EXPECT_EQ(cli("report " + out.string() + " --out " + (out / "rep").string()), 0);
  EXPECT_TRUE(std::filesystem::exists(out / "rep" / "final_summary.csv"));
  std::filesystem::remove_all(out);
}
#endif
