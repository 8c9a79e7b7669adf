#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "coinfer/agents.hpp"
#include "coinfer/environment.hpp"

namespace coinfer {

struct TrainConfig {
  long total_steps = 200000;
  // Uniformly random valid actions before learning starts.
  long warmup_steps = 1000;
  // Gradient updates happen every update_every env steps once warm.
  int update_every = 1;
  std::size_t buffer_capacity = 100000;
  long log_every = 1000;
  // Episode ends at the horizon are time limits, not terminal states; when
  // true the bootstrap term is kept for them.
  bool bootstrap_on_timeout = true;
  std::uint64_t seed = 0;
};

// One row of the training metrics CSV. Fields an agent does not produce are NaN.
struct MetricsRow {
  long step = 0;
  double q_loss = 0.0;
  double policy_loss = 0.0;
  double alpha_loss = 0.0;
  double entropy = 0.0;
  double alpha = 0.0;
  double episode_reward = 0.0;
  double epsilon = 0.0;
};

inline constexpr const char* kMetricsHeader =
    "step,q_loss,policy_loss,alpha_loss,entropy,alpha,episode_reward,epsilon";
std::string format_metrics_row(const MetricsRow& row);

using MetricsSink = std::function<void(const MetricsRow&)>;

struct TrainSummary {
  long steps = 0;
  long updates = 0;
  long episodes = 0;
  double seconds = 0.0;
  // Sum of rewards of the last completed episode.
  double last_episode_reward = 0.0;
};

TrainSummary train_sac(Environment& env, SacAgent& agent, const TrainConfig& config,
                       const MetricsSink& sink = {});
TrainSummary train_dqn(Environment& env, DqnAgent& agent, const TrainConfig& config,
                       const MetricsSink& sink = {});

// Greedy decision at a fixed bandwidth. The observation carries the previous
// step's outcome, so the agent is run from the on-device reference state for
// settle_steps decisions and the last one is reported.
struct GreedyDecision {
  std::size_t index = 0;
  Action action;
  EvalResult result;
  bool feasible = true;
  double reward = 0.0;
};

using GreedyPolicy = std::function<std::size_t(const Observation&)>;

GreedyDecision settle_greedy(const std::shared_ptr<const SystemModel>& model, const EnvConfig& base,
                             double bandwidth_bps, const GreedyPolicy& policy, int settle_steps);

}  // namespace coinfer
