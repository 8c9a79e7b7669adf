#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "coinfer/agents.hpp"
#include "coinfer/environment.hpp"
#include "coinfer/training.hpp"

namespace coinfer {

// Bad configuration or checkpoint contents (maps to CLI exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SweepConfig {
  std::vector<double> grid_bps;  // default 0, 1e6, ..., 1e7
  int settle_steps = 4;
  // 0 picks the hardware concurrency.
  int threads = 0;
};

struct ExperimentConfig {
  std::filesystem::path profile = "data/alexnet_branchy.profile";
  ChannelMode channel_mode = ChannelMode::kRawRate;
  std::vector<int> bits{8, 12, 16};
  bool quantize_raw_input = false;
  bool literal_levels = false;
  RewardParams reward;
  BandwidthConfig bandwidth;
  int horizon = 64;
  std::string agent = "sac";
  SacConfig sac;
  DqnConfig dqn;
  TrainConfig training;
  SweepConfig sweep;
  std::uint64_t seed = 7;
  std::filesystem::path out_dir = "out";
};

// Missing keys take defaults; unknown keys are rejected. Relative paths are
// resolved against base_dir.
ExperimentConfig config_from_json(const nlohmann::json& doc,
                                  const std::filesystem::path& base_dir = {});
nlohmann::json config_to_json(const ExperimentConfig& config);
ExperimentConfig load_config(const std::filesystem::path& path);

std::shared_ptr<const SystemModel> make_model(const ExperimentConfig& config);
EnvConfig make_env_config(const ExperimentConfig& config);
SacConfig make_sac_config(const ExperimentConfig& config);
DqnConfig make_dqn_config(const ExperimentConfig& config);
TrainConfig make_train_config(const ExperimentConfig& config);

// ---------------------------------------------------------------------------
// Checkpoints: {"format": "coinfer-agent", "version": 1, "profile": name,
// "action_space": size, "bits": [...], "agent": "sac"|"dqn", ...agent fields}
// ---------------------------------------------------------------------------

using AnyAgent = std::variant<SacAgent, DqnAgent>;

std::string agent_name(const AnyAgent& agent);
nlohmann::json checkpoint_to_json(const AnyAgent& agent, const SystemModel& model);
AnyAgent checkpoint_from_json(const nlohmann::json& doc);
void save_checkpoint(const AnyAgent& agent, const SystemModel& model,
                     const std::filesystem::path& path);
AnyAgent load_checkpoint(const std::filesystem::path& path);
// Throws ConfigError when the checkpoint was trained on a different action space.
void check_compatible(const nlohmann::json& checkpoint, const SystemModel& model);

GreedyPolicy greedy_policy(const AnyAgent& agent);

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

struct SweepRow {
  double bandwidth_bps = 0.0;
  std::string optimizer;
  Action action;
  double latency_ms = 0.0;  // inf when the action cannot be carried out
  double accuracy = 0.0;
  double energy_j = 0.0;
  double reward = 0.0;
};

inline constexpr const char* kSweepHeader =
    "bandwidth_bps,optimizer,ep,pp,c,latency_ms,accuracy,energy_j,reward";
std::string format_sweep_row(const SweepRow& row);

struct SweepAgent {
  std::string name;
  GreedyPolicy policy;  // must be safe to call concurrently
};

// Rows ordered by bandwidth, then oracle, agents in the given order, on_device.
std::vector<SweepRow> run_sweep(const std::shared_ptr<const SystemModel>& model,
                                const EnvConfig& env, const std::vector<double>& grid_bps,
                                const std::vector<SweepAgent>& agents, int settle_steps,
                                int threads = 0);

struct SweepSummaryRow {
  std::string optimizer;
  double mean_reward = 0.0;
  double oracle_reward_ratio = 0.0;  // sum of rewards over the oracle's sum
  double mean_latency_ms = 0.0;
  double mean_accuracy = 0.0;
  // On-device latency over this optimizer's latency at the largest bandwidth.
  double speedup_at_max_bandwidth = 0.0;
};

inline constexpr const char* kSummaryHeader =
    "optimizer,mean_reward,oracle_reward_ratio,mean_latency_ms,mean_accuracy,"
    "speedup_at_max_bandwidth";
std::vector<SweepSummaryRow> summarize_sweep(const std::vector<SweepRow>& rows);
std::string format_summary_row(const SweepSummaryRow& row);

// ---------------------------------------------------------------------------
// Quantization report
// ---------------------------------------------------------------------------

struct QuantReportRow {
  int layer = 0;
  std::string name;
  std::string kind;
  int bits = 0;
  double raw_bytes = 0.0;
  double compressed_bytes = 0.0;
  double ratio = 0.0;
  int exit = 0;
  double accuracy_after = 0.0;
};

inline constexpr const char* kQuantReportHeader =
    "layer,name,kind,bits,raw_bytes,compressed_bytes,ratio,exit,accuracy_after";
// One row per (layer, bits) for every layer that can be a split point of the
// deepest exit; accuracy_after refers to that exit.
std::vector<QuantReportRow> quantize_report(const SystemModel& model);
std::string format_quant_row(const QuantReportRow& row);

std::string format_double(double v);

}  // namespace coinfer
