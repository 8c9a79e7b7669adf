#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "coinfer/experiment.hpp"
#include "test_support.hpp"

using namespace coinfer;
namespace fs = std::filesystem;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.profile = testing::bundled_profile_path();
  c.horizon = 16;
  c.sac.hidden = {16, 16};
  c.dqn.hidden = {16, 16};
  c.training.total_steps = 600;
  c.training.warmup_steps = 100;
  c.training.log_every = 100;
  c.training.seed = 3;
  return c;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

}  // namespace

TEST_CASE("config round trip and strictness") {
  const ExperimentConfig c = small_config();
  const nlohmann::json doc = config_to_json(c);
  CHECK(config_to_json(config_from_json(doc)) == doc);

  nlohmann::json bad = doc;
  bad["unknown_key"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = doc;
  bad["reward"]["typo"] = 1;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = doc;
  bad["horizon"] = "long";
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = doc;
  bad["horizon"] = 0;
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);
  bad = doc;
  bad["agent"] = "ppo";
  CHECK_THROWS_AS(config_from_json(bad), ConfigError);

  const ExperimentConfig empty = config_from_json(nlohmann::json::object(), "/base");
  CHECK(config_from_json({{"profile", "x.profile"}}, "/base").profile == fs::path("/base/x.profile"));
  CHECK(empty.bits == std::vector<int>{8, 12, 16});
  CHECK(empty.bandwidth.reflect);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("bundled configs load") {
  for (const char* name : {"default.json", "energy_constrained.json"}) {
    const fs::path path = fs::path(COINFER_TEST_SOURCE_DIR) / "configs" / name;
    const ExperimentConfig c = load_config(path);
    CHECK(fs::exists(c.profile));
    CHECK_NOTHROW(make_model(c));
  }
  const ExperimentConfig ec =
      load_config(fs::path(COINFER_TEST_SOURCE_DIR) / "configs" / "energy_constrained.json");
  REQUIRE(ec.reward.energy_budget_branch1_factor.has_value());
  CHECK(*ec.reward.energy_budget_branch1_factor == 1.2);
}

TEST_CASE("training is deterministic for a fixed seed") {
  for (const std::string agent : {"sac", "dqn"}) {
    auto run = [&] {
      ExperimentConfig c = small_config();
      c.agent = agent;
      auto model = make_model(c);
      Environment env(model, make_env_config(c));
      std::vector<std::string> rows;
      const MetricsSink sink = [&](const MetricsRow& r) { rows.push_back(format_metrics_row(r)); };
      if (agent == "sac") {
        SacAgent a(env.action_space().mask(), make_sac_config(c));
        train_sac(env, a, make_train_config(c), sink);
        rows.push_back(checkpoint_to_json(a, *model).dump());
      } else {
        DqnAgent a(env.action_space().mask(), make_dqn_config(c));
        train_dqn(env, a, make_train_config(c), sink);
        rows.push_back(checkpoint_to_json(a, *model).dump());
      }
      return rows;
    };
    const auto first = run();
    CHECK(first.size() == 7);
    CHECK(first == run());
    CHECK(split(first.front()).size() == split(kMetricsHeader).size());
  }
}

TEST_CASE("checkpoints reject a different action space") {
  ExperimentConfig c = small_config();
  auto model = make_model(c);
  Environment env(model, make_env_config(c));
  const AnyAgent agent = SacAgent(env.action_space().mask(), make_sac_config(c));
  const nlohmann::json doc = checkpoint_to_json(agent, *model);
  CHECK_NOTHROW(check_compatible(doc, *model));
  ExperimentConfig other = c;
  other.bits = {8, 16};
  CHECK_THROWS_AS(check_compatible(doc, *make_model(other)), ConfigError);

  const fs::path dir = fs::temp_directory_path() / "coinfer_ckpt_test";
  fs::create_directories(dir);
  save_checkpoint(agent, *model, dir / "a.json");
  const AnyAgent back = load_checkpoint(dir / "a.json");
  CHECK(agent_name(back) == "sac");
  CHECK(checkpoint_to_json(back, *model) == doc);
  fs::remove_all(dir);
}

TEST_CASE("sweep schema, order and summary") {
  ExperimentConfig c = small_config();
  auto model = make_model(c);
  const EnvConfig env = make_env_config(c);
  const std::vector<double> grid{0.0, 5e6, 1e7};
  const Environment probe(model, env);
  const std::size_t first_valid = [&] {
    for (std::size_t i = 0;; ++i) {
      if (probe.action_space().is_valid(i)) return i;
    }
  }();
  const SweepAgent fixed{"fixed", [first_valid](const Observation&) { return first_valid; }};

  const auto rows = run_sweep(model, env, grid, {fixed}, 2, 2);
  REQUIRE(rows.size() == grid.size() * 3);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].bandwidth_bps == grid[i / 3]);
    CHECK(rows[i].optimizer == std::vector<std::string>{"oracle", "fixed", "on_device"}[i % 3]);
    CHECK(split(format_sweep_row(rows[i])).size() == split(kSweepHeader).size());
  }
  const auto serial = run_sweep(model, env, grid, {fixed}, 2, 1);
  REQUIRE(serial.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(format_sweep_row(serial[i]) == format_sweep_row(rows[i]));
  }
  // Pixels cannot be sent at zero bandwidth.
  CHECK(std::isinf(rows[1].latency_ms));
  CHECK(rows[1].reward == 0.0);
  for (std::size_t i = 0; i < rows.size(); i += 3) CHECK(rows[i].reward >= rows[i + 1].reward);

  const auto summary = summarize_sweep(rows);
  REQUIRE(summary.size() == 3);
  CHECK(summary[0].optimizer == "oracle");
  CHECK(summary[0].oracle_reward_ratio == 1.0);
  CHECK(summary[2].speedup_at_max_bandwidth == doctest::Approx(1.0));
  CHECK(split(format_summary_row(summary[1])).size() == split(kSummaryHeader).size());
}

TEST_CASE("quantization report") {
  const auto model = make_model(small_config());
  const auto rows = quantize_report(*model);
  const auto& deepest = model->profile().topology.exits.back();
  CHECK(rows.size() == static_cast<std::size_t>(deepest.layer_count - 1) * 3);
  for (const auto& r : rows) {
    CHECK(r.compressed_bytes > 0.0);
    CHECK(r.ratio == doctest::Approx(r.compressed_bytes / r.raw_bytes));
    CHECK(r.accuracy_after <= deepest.accuracy);
    CHECK(r.exit == deepest.id);
    CHECK(split(format_quant_row(r)).size() == split(kQuantReportHeader).size());
  }
}

TEST_CASE("number formatting") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(1e7) == "10000000");
}
