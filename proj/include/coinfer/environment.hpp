#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "coinfer/system_model.hpp"

namespace coinfer {

// Reward a*acc + b*(T_ref/T) with a = n*ln(1 + B/s), b = 1 - a, gated to 0
// when the device energy exceeds the budget.
struct RewardConfig {
  double n = 0.0;
  double s_bps = 1e6;
  double t_ref_ms = 1.0;
  double b_max_bps = 1e7;
  double energy_budget_j = std::numeric_limits<double>::infinity();
  // Energy normalizer used when the budget is unbounded.
  double e_ref_j = 1.0;
  // n was derived as 1/ln(1 + B_max/s); a is then computed as a ratio of logs
  // so that a(B_max) is exactly 1.
  bool n_from_b_max = false;

  // Saturates at 1 above B_max so that b never goes negative.
  double a(double bandwidth_bps) const;
  double b(double bandwidth_bps) const { return 1.0 - a(bandwidth_bps); }
};

// User-facing knobs; unset fields are derived from the model.
struct RewardParams {
  std::optional<double> n;  // default 1/ln(1 + B_max/s)
  double s_bps = 1e6;
  std::optional<double> t_ref_ms;  // default: on-device latency of the deepest exit
  double b_max_bps = 1e7;
  // Absolute budget; otherwise the profile's device budget applies.
  std::optional<double> energy_budget_j;
  // Budget as a multiple of the compute energy of running exit 1 fully on-device.
  std::optional<double> energy_budget_branch1_factor;
};

RewardConfig make_reward_config(const SystemModel& model, const RewardParams& params);

double reward(const EvalResult& result, double bandwidth_bps, const RewardConfig& config);

// Observation: outcome of the previous decision plus the current bandwidth.
struct EnvState {
  double latency_ms = 0.0;
  double energy_j = 0.0;
  double accuracy = 0.0;
  double bandwidth_bps = 0.0;
};

inline constexpr std::size_t kObservationSize = 4;
using Observation = std::array<double, kObservationSize>;

inline constexpr double kMaxNormalizedLatency = 1.5;
inline constexpr double kMaxNormalizedEnergy = 1.5;

// T_ref/T clipped to [0, 1.5] (0 when nothing ran), e over the budget (or
// e_ref if unbounded) clipped to [0, 1.5], accuracy as-is, B/B_max.
Observation normalize_state(const EnvState& state, const RewardConfig& config);

using ActionMask = std::vector<std::uint8_t>;

// Flattened (ep, pp, c) grid: index = ((ep-1) * (max_pp+1) + pp) * |bits| + bit_index.
class ActionSpace {
 public:
  ActionSpace(const ModelProfile& profile, std::vector<int> bits_set);
  explicit ActionSpace(const SystemModel& model);

  std::size_t size() const { return num_exits_ * pp_slots_ * bits_.size(); }
  std::size_t valid_count() const;
  std::size_t index_of(const Action& a) const;
  Action action_at(std::size_t index) const;
  const ActionMask& mask() const { return mask_; }
  bool is_valid(std::size_t index) const { return index < mask_.size() && mask_[index] != 0; }
  const std::vector<int>& bits() const { return bits_; }

 private:
  std::size_t num_exits_ = 0;
  std::size_t pp_slots_ = 0;
  std::vector<int> bits_;
  ActionMask mask_;
};

ActionMask action_mask(const ModelProfile& profile, std::span<const int> bits_set);

enum class BandwidthKind { kFixed, kGridSweep, kBoundedRandomWalk };

std::string_view to_string(BandwidthKind kind);
BandwidthKind parse_bandwidth_kind(std::string_view name);

struct BandwidthConfig {
  BandwidthKind kind = BandwidthKind::kBoundedRandomWalk;
  double fixed_bps = 1e6;
  std::vector<double> grid_bps;
  double lo_bps = 0.0;
  double hi_bps = 1e7;
  // Random-walk increments are uniform in [-step, step].
  double step_bps = 1e6;
  // Overshoots are mirrored back into range when true and pinned to the bound
  // otherwise; pinning leaves a point mass on outage (lo) and saturation (hi).
  bool reflect = true;
};

class BandwidthProcess {
 public:
  BandwidthProcess(BandwidthConfig config, std::uint64_t seed);

  double current() const { return current_; }
  // Episode start; the random walk draws a fresh starting point.
  void reset();
  void advance();
  const BandwidthConfig& config() const { return config_; }

 private:
  BandwidthConfig config_;
  std::mt19937_64 rng_;
  std::size_t grid_pos_ = 0;
  double current_ = 0.0;
};

struct EnvConfig {
  RewardParams reward;
  BandwidthConfig bandwidth;
  ChannelMode channel_mode = ChannelMode::kRawRate;
  int horizon = 64;
  std::uint64_t seed = 1;
};

struct StepInfo {
  Action action;
  EvalResult result;
  bool invalid = false;     // action outside the valid set
  bool infeasible = false;  // valid, but the link cannot carry the data
  double bandwidth_bps = 0.0;
};

struct StepResult {
  EnvState next_state;
  double reward = 0.0;
  bool done = false;
  StepInfo info;
};

// One decision per step against a bandwidth that evolves independently of the
// agent. Single-threaded; use separate instances for parallel rollouts.
class Environment {
 public:
  Environment(std::shared_ptr<const SystemModel> model, EnvConfig config);

  EnvState reset();
  StepResult step(std::size_t action_index);

  const EnvState& state() const { return state_; }
  Observation observation() const { return normalize_state(state_, reward_config_); }
  const ActionSpace& action_space() const { return space_; }
  const RewardConfig& reward_config() const { return reward_config_; }
  const SystemModel& model() const { return *model_; }
  const EnvConfig& config() const { return config_; }
  int steps_taken() const { return t_; }

  ChannelConfig channel(double bandwidth_bps) const;
  // Outcome of the on-device reference at the given bandwidth; used as the
  // state at episode start.
  EnvState reference_state(double bandwidth_bps) const;

 private:
  std::shared_ptr<const SystemModel> model_;
  EnvConfig config_;
  RewardConfig reward_config_;
  ActionSpace space_;
  BandwidthProcess bandwidth_;
  EnvState state_;
  int t_ = 0;
};

}  // namespace coinfer
