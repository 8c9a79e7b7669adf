#include "coinfer/training.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "coinfer/replay_buffer.hpp"

namespace coinfer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_config(const TrainConfig& c) {
  if (c.total_steps < 0) throw std::invalid_argument("total_steps must be >= 0");
  if (c.warmup_steps < 0) throw std::invalid_argument("warmup_steps must be >= 0");
  if (c.update_every < 1) throw std::invalid_argument("update_every must be >= 1");
  if (c.buffer_capacity == 0) throw std::invalid_argument("buffer_capacity must be positive");
  if (c.log_every < 1) throw std::invalid_argument("log_every must be >= 1");
}

std::size_t random_valid(const ActionMask& mask, std::mt19937_64& rng) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (mask[i]) idx.push_back(i);
  }
  std::uniform_int_distribution<std::size_t> pick(0, idx.size() - 1);
  return idx[pick(rng)];
}

// Shared loop. act(obs, warm) picks an action; learn(batch) runs one update
// and fills the loss fields of the row it is given.
template <typename Act, typename Learn>
TrainSummary run_loop(Environment& env, const TrainConfig& config, std::size_t batch_size,
                      Act&& act, Learn&& learn, const MetricsSink& sink) {
  check_config(config);
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  const auto start = std::chrono::steady_clock::now();
  ReplayBuffer buffer(config.buffer_capacity, config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::mt19937_64 rng(config.seed);

  TrainSummary summary;
  MetricsRow row;
  row.q_loss = row.policy_loss = row.alpha_loss = row.entropy = row.alpha = row.epsilon = kNaN;
  row.episode_reward = kNaN;

  env.reset();
  Observation obs = env.observation();
  double episode_reward = 0.0;
  for (long step = 1; step <= config.total_steps; ++step) {
    const bool warm = step > config.warmup_steps;
    const std::size_t a = act(obs, warm, rng);
    const StepResult r = env.step(a);
    const Observation next = env.observation();
    const bool terminal = r.done && !config.bootstrap_on_timeout;
    buffer.push({obs, a, r.reward, next, terminal});
    episode_reward += r.reward;
    obs = next;
    if (r.done) {
      ++summary.episodes;
      summary.last_episode_reward = episode_reward;
      row.episode_reward = episode_reward;
      episode_reward = 0.0;
      env.reset();
      obs = env.observation();
    }
    if (warm && buffer.size() >= batch_size && step % config.update_every == 0) {
      learn(buffer.sample(batch_size), row);
      ++summary.updates;
    }
    if (sink && step % config.log_every == 0) {
      row.step = step;
      sink(row);
    }
    summary.steps = step;
  }
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return summary;
}

}  // namespace

std::string format_metrics_row(const MetricsRow& row) {
  std::ostringstream os;
  os.precision(9);
  auto field = [&](double v) {
    os << ',';
    if (std::isfinite(v)) os << v;
    else if (std::isnan(v)) os << "nan";
    else os << (v > 0 ? "inf" : "-inf");
  };
  os << row.step;
  field(row.q_loss);
  field(row.policy_loss);
  field(row.alpha_loss);
  field(row.entropy);
  field(row.alpha);
  field(row.episode_reward);
  field(row.epsilon);
  return os.str();
}

TrainSummary train_sac(Environment& env, SacAgent& agent, const TrainConfig& config,
                       const MetricsSink& sink) {
  if (agent.num_actions() != env.action_space().size()) {
    throw std::invalid_argument("agent and environment action spaces differ");
  }
  auto act = [&](const Observation& obs, bool warm, std::mt19937_64& rng) {
    return warm ? agent.act(obs, ActMode::kTrain, rng) : random_valid(agent.policy_mask(), rng);
  };
  auto learn = [&](const Batch& batch, MetricsRow& row) {
    const SacMetrics m = agent.update(batch);
    row.q_loss = m.q_loss;
    row.policy_loss = m.policy_loss;
    row.alpha_loss = m.alpha_loss;
    row.entropy = m.entropy;
    row.alpha = m.alpha;
  };
  return run_loop(env, config, agent.config().batch_size, act, learn, sink);
}

TrainSummary train_dqn(Environment& env, DqnAgent& agent, const TrainConfig& config,
                       const MetricsSink& sink) {
  if (agent.num_actions() != env.action_space().size()) {
    throw std::invalid_argument("agent and environment action spaces differ");
  }
  auto act = [&](const Observation& obs, bool warm, std::mt19937_64& rng) {
    return warm ? agent.act(obs, ActMode::kTrain, rng) : random_valid(agent.policy_mask(), rng);
  };
  auto learn = [&](const Batch& batch, MetricsRow& row) {
    const DqnMetrics m = agent.update(batch);
    row.q_loss = m.loss;
    row.epsilon = m.epsilon;
  };
  return run_loop(env, config, agent.config().batch_size, act, learn, sink);
}

GreedyDecision settle_greedy(const std::shared_ptr<const SystemModel>& model, const EnvConfig& base,
                             double bandwidth_bps, const GreedyPolicy& policy, int settle_steps) {
  if (settle_steps < 1) throw std::invalid_argument("settle_steps must be >= 1");
  EnvConfig cfg = base;
  cfg.bandwidth.kind = BandwidthKind::kFixed;
  cfg.bandwidth.fixed_bps = bandwidth_bps;
  cfg.horizon = settle_steps;
  Environment env(model, cfg);
  env.reset();
  GreedyDecision out;
  for (int i = 0; i < settle_steps; ++i) {
    out.index = policy(env.observation());
    const StepResult r = env.step(out.index);
    out.action = r.info.action;
    out.result = r.info.result;
    out.feasible = !r.info.invalid && !r.info.infeasible;
    out.reward = r.reward;
  }
  return out;
}

}  // namespace coinfer
