#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "coinfer/environment.hpp"
#include "coinfer/neuralnet.hpp"
#include "coinfer/replay_buffer.hpp"

namespace coinfer {

enum class ActMode { kTrain, kGreedy };

// ---------------------------------------------------------------------------
// Discrete soft actor-critic.
//
// Policy pi(.|s) is a masked softmax over the flattened action grid. The
// critic Q(s, .) has a target copy updated by Polyak averaging (or a hard
// copy every N updates). The bootstrap expectation over a' is computed
// exactly from the categorical policy rather than sampled.
// ---------------------------------------------------------------------------

struct SacConfig {
  std::vector<int> hidden{128, 128, 128, 128};
  double learning_rate = 1e-3;
  double gamma = 0.99;
  double tau = 0.005;
  // > 0 switches the target update to a hard copy every N updates.
  int hard_update_every = 0;
  // Default target entropy is scale * ln(number of valid actions).
  double target_entropy_scale = 0.6;
  std::optional<double> target_entropy;
  double initial_alpha = 1.0;
  bool learn_alpha = true;
  bool twin_q = false;
  // When false the policy spans every slot and invalid picks are left to the
  // environment to punish.
  bool use_mask = true;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

struct QLossResult {
  double loss = 0.0;
  nn::Gradients grads;   // for Q
  nn::Gradients grads2;  // for the second critic when twin_q
  std::vector<double> targets;
};

struct PolicyLossResult {
  double loss = 0.0;
  nn::Gradients grads;
  double mean_entropy = 0.0;
};

struct AlphaLossResult {
  double loss = 0.0;
  // d loss / d log(alpha). Negative when the policy entropy is below the
  // target, so a descent step raises alpha.
  double grad_log_alpha = 0.0;
  double mean_entropy = 0.0;
};

struct SacMetrics {
  double q_loss = 0.0;
  double policy_loss = 0.0;
  double alpha_loss = 0.0;
  double entropy = 0.0;
  double alpha = 0.0;
};

class SacAgent {
 public:
  SacAgent(ActionMask valid, SacConfig config);

  std::size_t num_actions() const { return valid_.size(); }
  const SacConfig& config() const { return config_; }
  const ActionMask& valid_mask() const { return valid_; }
  // Mask the policy samples from (all-ones when use_mask is off).
  const ActionMask& policy_mask() const { return policy_mask_; }

  nn::Vector probabilities(const Observation& obs) const;
  std::size_t act(const Observation& obs, ActMode mode, std::mt19937_64& rng) const;

  QLossResult q_loss(const Batch& batch) const;
  PolicyLossResult policy_loss(const Batch& batch) const;
  AlphaLossResult alpha_loss(const Batch& batch) const;

  // One critic step, one policy step, one temperature step, then the target update.
  SacMetrics update(const Batch& batch);

  double alpha() const;
  double log_alpha() const { return log_alpha_; }
  void set_log_alpha(double v) { log_alpha_ = v; }
  double target_entropy() const { return target_entropy_; }
  long updates() const { return updates_; }

  nn::Mlp& policy() { return policy_; }
  nn::Mlp& q() { return q1_; }
  nn::Mlp& q_target() { return q1_target_; }
  const nn::Mlp& policy() const { return policy_; }
  const nn::Mlp& q() const { return q1_; }
  const nn::Mlp& q_target() const { return q1_target_; }
  const nn::Mlp* q2() const { return config_.twin_q ? &q2_ : nullptr; }

  nlohmann::json to_json() const;
  static SacAgent from_json(const nlohmann::json& doc);

 private:
  void check_batch(const Batch& batch) const;
  // Elementwise min over the critics when twin_q.
  nn::Matrix critic_values(const nn::Matrix& states, bool target) const;

  SacConfig config_;
  ActionMask valid_;
  ActionMask policy_mask_;
  nn::Mlp policy_;
  nn::Mlp q1_, q1_target_;
  nn::Mlp q2_, q2_target_;
  nn::Adam policy_opt_, q1_opt_, q2_opt_;
  nn::ScalarAdam alpha_opt_;
  double log_alpha_ = 0.0;
  double target_entropy_ = 0.0;
  long updates_ = 0;
};

// ---------------------------------------------------------------------------
// DQN baseline: epsilon-greedy over the masked Q values, TD target
// r + gamma * max_a' Q_target(s', a').
// ---------------------------------------------------------------------------

struct DqnConfig {
  std::vector<int> hidden{128, 128, 128, 128};
  double learning_rate = 1e-3;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  long epsilon_decay_steps = 50000;
  int target_update_every = 1000;
  bool use_mask = true;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
};

struct DqnLossResult {
  double loss = 0.0;
  nn::Gradients grads;
  std::vector<double> targets;
};

struct DqnMetrics {
  double loss = 0.0;
  double epsilon = 0.0;
};

class DqnAgent {
 public:
  DqnAgent(ActionMask valid, DqnConfig config);

  std::size_t num_actions() const { return valid_.size(); }
  const DqnConfig& config() const { return config_; }
  const ActionMask& valid_mask() const { return valid_; }
  const ActionMask& policy_mask() const { return policy_mask_; }

  // Linear decay from epsilon_start to epsilon_end over epsilon_decay_steps.
  double epsilon_at(long step) const;
  double epsilon() const { return epsilon_at(act_steps_); }
  long act_steps() const { return act_steps_; }

  // Train mode advances the exploration schedule.
  std::size_t act(const Observation& obs, ActMode mode, std::mt19937_64& rng);
  std::size_t greedy(const Observation& obs) const;

  DqnLossResult loss(const Batch& batch) const;
  DqnMetrics update(const Batch& batch);

  nn::Mlp& q() { return q_; }
  nn::Mlp& q_target() { return q_target_; }
  const nn::Mlp& q() const { return q_; }
  const nn::Mlp& q_target() const { return q_target_; }
  long updates() const { return updates_; }

  nlohmann::json to_json() const;
  static DqnAgent from_json(const nlohmann::json& doc);

 private:
  void check_batch(const Batch& batch) const;

  DqnConfig config_;
  ActionMask valid_;
  ActionMask policy_mask_;
  nn::Mlp q_, q_target_;
  nn::Adam opt_;
  long act_steps_ = 0;
  long updates_ = 0;
};

// Argmax restricted to mask; lowest index wins ties.
std::size_t masked_argmax(const nn::Vector& values, const ActionMask& mask);

// Draws from a categorical distribution; never returns a zero-probability slot.
std::size_t sample_categorical(const nn::Vector& probs, std::mt19937_64& rng);

nn::Vector to_vector(const Observation& obs);

}  // namespace coinfer
