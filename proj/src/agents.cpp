#include "coinfer/agents.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coinfer {

namespace {

std::vector<int> network_widths(const std::vector<int>& hidden, std::size_t outputs) {
  std::vector<int> widths{static_cast<int>(kObservationSize)};
  widths.insert(widths.end(), hidden.begin(), hidden.end());
  widths.push_back(static_cast<int>(outputs));
  return widths;
}

std::size_t count_valid(const ActionMask& mask) {
  return static_cast<std::size_t>(std::count_if(mask.begin(), mask.end(), [](auto m) { return m != 0; }));
}

// Column j of `logits` as log-probabilities under `mask`.
nn::Vector column_log_probs(const nn::Matrix& logits, Eigen::Index j, const ActionMask& mask) {
  return nn::masked_log_softmax(logits.col(j), mask);
}

nlohmann::json mask_to_json(const ActionMask& mask) {
  std::vector<int> v(mask.begin(), mask.end());
  return v;
}

ActionMask mask_from_json(const nlohmann::json& doc) {
  const auto v = doc.get<std::vector<int>>();
  ActionMask mask;
  mask.reserve(v.size());
  for (int x : v) mask.push_back(x ? 1 : 0);
  return mask;
}

}  // namespace

nn::Vector to_vector(const Observation& obs) {
  nn::Vector v(static_cast<Eigen::Index>(obs.size()));
  for (std::size_t i = 0; i < obs.size(); ++i) v(static_cast<Eigen::Index>(i)) = obs[i];
  return v;
}

std::size_t masked_argmax(const nn::Vector& values, const ActionMask& mask) {
  std::size_t best = mask.size();
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    if (best == mask.size() || values(static_cast<Eigen::Index>(i)) > values(static_cast<Eigen::Index>(best))) {
      best = i;
    }
  }
  if (best == mask.size()) throw std::invalid_argument("argmax over an all-masked action set");
  return best;
}

std::size_t sample_categorical(const nn::Vector& probs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double cumulative = 0.0;
  std::size_t last_positive = static_cast<std::size_t>(probs.size());
  for (Eigen::Index i = 0; i < probs.size(); ++i) {
    if (probs(i) <= 0.0) continue;
    cumulative += probs(i);
    last_positive = static_cast<std::size_t>(i);
    if (u < cumulative) return last_positive;
  }
  if (last_positive == static_cast<std::size_t>(probs.size())) {
    throw std::invalid_argument("cannot sample from an all-zero distribution");
  }
  return last_positive;  // rounding left u just above the total
}

// ---------------------------------------------------------------------------
// SacAgent
// ---------------------------------------------------------------------------

SacAgent::SacAgent(ActionMask valid, SacConfig config)
    : config_(std::move(config)), valid_(std::move(valid)) {
  if (valid_.empty() || count_valid(valid_) == 0) {
    throw std::invalid_argument("SAC agent needs at least one valid action");
  }
  if (!(config_.initial_alpha > 0.0)) throw std::invalid_argument("initial alpha must be positive");
  policy_mask_ = config_.use_mask ? valid_ : ActionMask(valid_.size(), 1);

  const auto widths = network_widths(config_.hidden, valid_.size());
  policy_ = nn::Mlp(widths, config_.seed * 4 + 1);
  q1_ = nn::Mlp(widths, config_.seed * 4 + 2);
  q1_target_ = q1_;
  if (config_.twin_q) {
    q2_ = nn::Mlp(widths, config_.seed * 4 + 3);
    q2_target_ = q2_;
  }
  const nn::AdamConfig adam{config_.learning_rate};
  policy_opt_ = nn::Adam(policy_, adam);
  q1_opt_ = nn::Adam(q1_, adam);
  if (config_.twin_q) q2_opt_ = nn::Adam(q2_, adam);
  alpha_opt_ = nn::ScalarAdam(adam);
  log_alpha_ = std::log(config_.initial_alpha);
  target_entropy_ = config_.target_entropy.value_or(
      config_.target_entropy_scale * std::log(static_cast<double>(count_valid(policy_mask_))));
}

double SacAgent::alpha() const { return std::exp(log_alpha_); }

nn::Vector SacAgent::probabilities(const Observation& obs) const {
  return nn::masked_softmax(policy_.forward(to_vector(obs)), policy_mask_);
}

std::size_t SacAgent::act(const Observation& obs, ActMode mode, std::mt19937_64& rng) const {
  const nn::Vector p = probabilities(obs);
  if (mode == ActMode::kGreedy) return masked_argmax(p, policy_mask_);
  return sample_categorical(p, rng);
}

void SacAgent::check_batch(const Batch& batch) const {
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  for (std::size_t a : batch.actions) {
    if (a >= valid_.size()) throw std::invalid_argument("batch action index out of range");
    if (config_.use_mask && !valid_[a]) throw std::invalid_argument("batch contains a masked action");
  }
}

nn::Matrix SacAgent::critic_values(const nn::Matrix& states, bool target) const {
  nn::Matrix v = (target ? q1_target_ : q1_).forward(states);
  if (config_.twin_q) v = v.cwiseMin((target ? q2_target_ : q2_).forward(states));
  return v;
}

QLossResult SacAgent::q_loss(const Batch& batch) const {
  check_batch(batch);
  const auto n = static_cast<Eigen::Index>(batch.size());
  const double alpha = this->alpha();

  const nn::Matrix next_logits = policy_.forward(batch.next_states);
  const nn::Matrix next_q = critic_values(batch.next_states, /*target=*/true);

  QLossResult out;
  out.targets.resize(batch.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto js = static_cast<std::size_t>(j);
    double soft_value = 0.0;
    if (batch.dones[js] == 0.0) {
      const nn::Vector logp = column_log_probs(next_logits, j, policy_mask_);
      for (Eigen::Index a = 0; a < logp.size(); ++a) {
        if (!policy_mask_[static_cast<std::size_t>(a)]) continue;
        soft_value += std::exp(logp(a)) * (next_q(a, j) - alpha * logp(a));
      }
    }
    out.targets[js] = batch.rewards[js] + config_.gamma * (1.0 - batch.dones[js]) * soft_value;
  }

  auto critic_loss = [&](const nn::Mlp& critic, double& loss) {
    const nn::ForwardTrace trace = critic.forward_trace(batch.states);
    nn::Matrix d_out = nn::Matrix::Zero(trace.output.rows(), trace.output.cols());
    loss = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto a = static_cast<Eigen::Index>(batch.actions[static_cast<std::size_t>(j)]);
      const double diff = trace.output(a, j) - out.targets[static_cast<std::size_t>(j)];
      loss += 0.5 * diff * diff;
      d_out(a, j) = diff / static_cast<double>(n);
    }
    loss /= static_cast<double>(n);
    return critic.backward(trace, d_out);
  };

  double loss1 = 0.0;
  out.grads = critic_loss(q1_, loss1);
  out.loss = loss1;
  if (config_.twin_q) {
    double loss2 = 0.0;
    out.grads2 = critic_loss(q2_, loss2);
    out.loss += loss2;
  }
  return out;
}

PolicyLossResult SacAgent::policy_loss(const Batch& batch) const {
  check_batch(batch);
  const auto n = static_cast<Eigen::Index>(batch.size());
  const double alpha = this->alpha();

  const nn::ForwardTrace trace = policy_.forward_trace(batch.states);
  const nn::Matrix q = critic_values(batch.states, /*target=*/false);

  PolicyLossResult out;
  nn::Matrix d_logits = nn::Matrix::Zero(trace.output.rows(), trace.output.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    const nn::Vector logp = column_log_probs(trace.output, j, policy_mask_);
    // J_s = sum_a pi_a (alpha log pi_a - Q_a); dJ_s/dz_k = pi_k (g_k - J_s).
    double j_s = 0.0;
    double entropy = 0.0;
    nn::Vector g = nn::Vector::Zero(logp.size());
    nn::Vector p = nn::Vector::Zero(logp.size());
    for (Eigen::Index a = 0; a < logp.size(); ++a) {
      if (!policy_mask_[static_cast<std::size_t>(a)]) continue;
      p(a) = std::exp(logp(a));
      g(a) = alpha * logp(a) - q(a, j);
      j_s += p(a) * g(a);
      entropy -= p(a) * logp(a);
    }
    for (Eigen::Index a = 0; a < logp.size(); ++a) {
      d_logits(a, j) = p(a) * (g(a) - j_s) / static_cast<double>(n);
    }
    out.loss += j_s;
    out.mean_entropy += entropy;
  }
  out.loss /= static_cast<double>(n);
  out.mean_entropy /= static_cast<double>(n);
  out.grads = policy_.backward(trace, d_logits);
  return out;
}

AlphaLossResult SacAgent::alpha_loss(const Batch& batch) const {
  check_batch(batch);
  const auto n = static_cast<Eigen::Index>(batch.size());
  const nn::Matrix logits = policy_.forward(batch.states);
  double entropy = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const nn::Vector logp = column_log_probs(logits, j, policy_mask_);
    for (Eigen::Index a = 0; a < logp.size(); ++a) {
      if (policy_mask_[static_cast<std::size_t>(a)]) entropy -= std::exp(logp(a)) * logp(a);
    }
  }
  AlphaLossResult out;
  out.mean_entropy = entropy / static_cast<double>(n);
  // J(alpha) = E_s[ -alpha * pi(s)^T (log pi(s) + H_target) ] = alpha * (H - H_target)
  const double alpha = this->alpha();
  out.loss = alpha * (out.mean_entropy - target_entropy_);
  out.grad_log_alpha = alpha * (out.mean_entropy - target_entropy_);
  return out;
}

SacMetrics SacAgent::update(const Batch& batch) {
  SacMetrics m;
  {
    const QLossResult ql = q_loss(batch);
    q1_opt_.step(q1_, ql.grads);
    if (config_.twin_q) q2_opt_.step(q2_, ql.grads2);
    m.q_loss = ql.loss;
  }
  {
    const PolicyLossResult pl = policy_loss(batch);
    policy_opt_.step(policy_, pl.grads);
    m.policy_loss = pl.loss;
  }
  {
    const AlphaLossResult al = alpha_loss(batch);
    if (config_.learn_alpha) log_alpha_ = alpha_opt_.step(log_alpha_, al.grad_log_alpha);
    m.alpha_loss = al.loss;
    m.entropy = al.mean_entropy;
  }
  ++updates_;
  if (config_.hard_update_every > 0) {
    if (updates_ % config_.hard_update_every == 0) {
      q1_target_ = q1_;
      if (config_.twin_q) q2_target_ = q2_;
    }
  } else {
    q1_target_.soft_update(q1_, config_.tau);
    if (config_.twin_q) q2_target_.soft_update(q2_, config_.tau);
  }
  m.alpha = alpha();
  return m;
}

nlohmann::json SacAgent::to_json() const {
  nlohmann::json doc;
  doc["agent"] = "sac";
  doc["hyperparameters"] = {
      {"hidden", config_.hidden},
      {"learning_rate", config_.learning_rate},
      {"gamma", config_.gamma},
      {"tau", config_.tau},
      {"hard_update_every", config_.hard_update_every},
      {"target_entropy_scale", config_.target_entropy_scale},
      {"target_entropy", target_entropy_},
      {"initial_alpha", config_.initial_alpha},
      {"learn_alpha", config_.learn_alpha},
      {"twin_q", config_.twin_q},
      {"use_mask", config_.use_mask},
      {"batch_size", config_.batch_size},
      {"seed", config_.seed},
  };
  doc["valid_mask"] = mask_to_json(valid_);
  doc["log_alpha"] = log_alpha_;
  doc["updates"] = updates_;
  doc["networks"] = {{"policy", policy_.to_json()},
                     {"q1", q1_.to_json()},
                     {"q1_target", q1_target_.to_json()}};
  if (config_.twin_q) {
    doc["networks"]["q2"] = q2_.to_json();
    doc["networks"]["q2_target"] = q2_target_.to_json();
  }
  return doc;
}

SacAgent SacAgent::from_json(const nlohmann::json& doc) {
  if (doc.at("agent").get<std::string>() != "sac") throw std::invalid_argument("not a SAC checkpoint");
  const auto& h = doc.at("hyperparameters");
  SacConfig c;
  c.hidden = h.at("hidden").get<std::vector<int>>();
  c.learning_rate = h.at("learning_rate").get<double>();
  c.gamma = h.at("gamma").get<double>();
  c.tau = h.at("tau").get<double>();
  c.hard_update_every = h.at("hard_update_every").get<int>();
  c.target_entropy_scale = h.at("target_entropy_scale").get<double>();
  c.target_entropy = h.at("target_entropy").get<double>();
  c.initial_alpha = h.at("initial_alpha").get<double>();
  c.learn_alpha = h.at("learn_alpha").get<bool>();
  c.twin_q = h.at("twin_q").get<bool>();
  c.use_mask = h.at("use_mask").get<bool>();
  c.batch_size = h.at("batch_size").get<std::size_t>();
  c.seed = h.at("seed").get<std::uint64_t>();
  SacAgent agent(mask_from_json(doc.at("valid_mask")), c);
  const auto& nets = doc.at("networks");
  agent.policy_ = nn::Mlp::from_json(nets.at("policy"));
  agent.q1_ = nn::Mlp::from_json(nets.at("q1"));
  agent.q1_target_ = nn::Mlp::from_json(nets.at("q1_target"));
  if (c.twin_q) {
    agent.q2_ = nn::Mlp::from_json(nets.at("q2"));
    agent.q2_target_ = nn::Mlp::from_json(nets.at("q2_target"));
  }
  if (agent.policy_.output_size() != static_cast<int>(agent.valid_.size()) ||
      agent.q1_.output_size() != static_cast<int>(agent.valid_.size())) {
    throw std::invalid_argument("checkpoint network outputs do not match its action mask");
  }
  agent.log_alpha_ = doc.at("log_alpha").get<double>();
  agent.updates_ = doc.at("updates").get<long>();
  const nn::AdamConfig adam{c.learning_rate};
  agent.policy_opt_ = nn::Adam(agent.policy_, adam);
  agent.q1_opt_ = nn::Adam(agent.q1_, adam);
  if (c.twin_q) agent.q2_opt_ = nn::Adam(agent.q2_, adam);
  return agent;
}

// ---------------------------------------------------------------------------
// DqnAgent
// ---------------------------------------------------------------------------

DqnAgent::DqnAgent(ActionMask valid, DqnConfig config)
    : config_(std::move(config)), valid_(std::move(valid)) {
  if (valid_.empty() || count_valid(valid_) == 0) {
    throw std::invalid_argument("DQN agent needs at least one valid action");
  }
  if (!(config_.epsilon_start >= config_.epsilon_end && config_.epsilon_end >= 0.0 &&
        config_.epsilon_start <= 1.0)) {
    throw std::invalid_argument("epsilon schedule must satisfy 0 <= end <= start <= 1");
  }
  if (config_.target_update_every < 1) throw std::invalid_argument("target_update_every must be >= 1");
  policy_mask_ = config_.use_mask ? valid_ : ActionMask(valid_.size(), 1);
  q_ = nn::Mlp(network_widths(config_.hidden, valid_.size()), config_.seed * 4 + 2);
  q_target_ = q_;
  opt_ = nn::Adam(q_, nn::AdamConfig{config_.learning_rate});
}

double DqnAgent::epsilon_at(long step) const {
  if (config_.epsilon_decay_steps <= 0 || step >= config_.epsilon_decay_steps) return config_.epsilon_end;
  const double frac = static_cast<double>(std::max(0L, step)) / static_cast<double>(config_.epsilon_decay_steps);
  return config_.epsilon_start + frac * (config_.epsilon_end - config_.epsilon_start);
}

std::size_t DqnAgent::greedy(const Observation& obs) const {
  return masked_argmax(q_.forward(to_vector(obs)), policy_mask_);
}

std::size_t DqnAgent::act(const Observation& obs, ActMode mode, std::mt19937_64& rng) {
  if (mode == ActMode::kGreedy) return greedy(obs);
  const double eps = epsilon();
  ++act_steps_;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < eps) {
    const std::size_t n_valid = count_valid(policy_mask_);
    std::uniform_int_distribution<std::size_t> pick(0, n_valid - 1);
    std::size_t k = pick(rng);
    for (std::size_t i = 0; i < policy_mask_.size(); ++i) {
      if (policy_mask_[i] && k-- == 0) return i;
    }
  }
  return greedy(obs);
}

void DqnAgent::check_batch(const Batch& batch) const {
  if (batch.size() == 0) throw std::invalid_argument("empty batch");
  for (std::size_t a : batch.actions) {
    if (a >= valid_.size()) throw std::invalid_argument("batch action index out of range");
    if (config_.use_mask && !valid_[a]) throw std::invalid_argument("batch contains a masked action");
  }
}

DqnLossResult DqnAgent::loss(const Batch& batch) const {
  check_batch(batch);
  const auto n = static_cast<Eigen::Index>(batch.size());
  const nn::Matrix next_q = q_target_.forward(batch.next_states);
  DqnLossResult out;
  out.targets.resize(batch.size());
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto js = static_cast<std::size_t>(j);
    double bootstrap = 0.0;
    if (batch.dones[js] == 0.0) {
      bootstrap = next_q(static_cast<Eigen::Index>(masked_argmax(next_q.col(j), policy_mask_)), j);
    }
    out.targets[js] = batch.rewards[js] + config_.gamma * (1.0 - batch.dones[js]) * bootstrap;
  }
  const nn::ForwardTrace trace = q_.forward_trace(batch.states);
  nn::Matrix d_out = nn::Matrix::Zero(trace.output.rows(), trace.output.cols());
  for (Eigen::Index j = 0; j < n; ++j) {
    const auto a = static_cast<Eigen::Index>(batch.actions[static_cast<std::size_t>(j)]);
    const double diff = trace.output(a, j) - out.targets[static_cast<std::size_t>(j)];
    out.loss += 0.5 * diff * diff;
    d_out(a, j) = diff / static_cast<double>(n);
  }
  out.loss /= static_cast<double>(n);
  out.grads = q_.backward(trace, d_out);
  return out;
}

DqnMetrics DqnAgent::update(const Batch& batch) {
  const DqnLossResult l = loss(batch);
  opt_.step(q_, l.grads);
  ++updates_;
  if (updates_ % config_.target_update_every == 0) q_target_ = q_;
  return {l.loss, epsilon()};
}

nlohmann::json DqnAgent::to_json() const {
  nlohmann::json doc;
  doc["agent"] = "dqn";
  doc["hyperparameters"] = {
      {"hidden", config_.hidden},
      {"learning_rate", config_.learning_rate},
      {"gamma", config_.gamma},
      {"epsilon_start", config_.epsilon_start},
      {"epsilon_end", config_.epsilon_end},
      {"epsilon_decay_steps", config_.epsilon_decay_steps},
      {"target_update_every", config_.target_update_every},
      {"use_mask", config_.use_mask},
      {"batch_size", config_.batch_size},
      {"seed", config_.seed},
  };
  doc["valid_mask"] = mask_to_json(valid_);
  doc["act_steps"] = act_steps_;
  doc["updates"] = updates_;
  doc["networks"] = {{"q", q_.to_json()}, {"q_target", q_target_.to_json()}};
  return doc;
}

DqnAgent DqnAgent::from_json(const nlohmann::json& doc) {
  if (doc.at("agent").get<std::string>() != "dqn") throw std::invalid_argument("not a DQN checkpoint");
  const auto& h = doc.at("hyperparameters");
  DqnConfig c;
  c.hidden = h.at("hidden").get<std::vector<int>>();
  c.learning_rate = h.at("learning_rate").get<double>();
  c.gamma = h.at("gamma").get<double>();
  c.epsilon_start = h.at("epsilon_start").get<double>();
  c.epsilon_end = h.at("epsilon_end").get<double>();
  c.epsilon_decay_steps = h.at("epsilon_decay_steps").get<long>();
  c.target_update_every = h.at("target_update_every").get<int>();
  c.use_mask = h.at("use_mask").get<bool>();
  c.batch_size = h.at("batch_size").get<std::size_t>();
  c.seed = h.at("seed").get<std::uint64_t>();
  DqnAgent agent(mask_from_json(doc.at("valid_mask")), c);
  agent.q_ = nn::Mlp::from_json(doc.at("networks").at("q"));
  agent.q_target_ = nn::Mlp::from_json(doc.at("networks").at("q_target"));
  if (agent.q_.output_size() != static_cast<int>(agent.valid_.size())) {
    throw std::invalid_argument("checkpoint network outputs do not match its action mask");
  }
  agent.act_steps_ = doc.at("act_steps").get<long>();
  agent.updates_ = doc.at("updates").get<long>();
  agent.opt_ = nn::Adam(agent.q_, nn::AdamConfig{c.learning_rate});
  return agent;
}

}  // namespace coinfer
