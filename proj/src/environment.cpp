#include "coinfer/environment.hpp"

#include <algorithm>
#include <cmath>

namespace coinfer {

double RewardConfig::a(double bandwidth_bps) const {
  const double x = std::log1p(std::max(0.0, bandwidth_bps) / s_bps);
  const double v = n_from_b_max ? x / std::log1p(b_max_bps / s_bps) : n * x;
  return std::clamp(v, 0.0, 1.0);
}

RewardConfig make_reward_config(const SystemModel& model, const RewardParams& params) {
  if (!(params.s_bps > 0.0)) throw std::invalid_argument("reward s must be positive");
  if (!(params.b_max_bps > 0.0)) throw std::invalid_argument("reward B_max must be positive");
  RewardConfig c;
  c.s_bps = params.s_bps;
  c.b_max_bps = params.b_max_bps;
  c.n = params.n.value_or(1.0 / std::log1p(params.b_max_bps / params.s_bps));
  c.n_from_b_max = !params.n.has_value();
  c.t_ref_ms = params.t_ref_ms.value_or(model.on_device_latency_ms());
  if (!(c.t_ref_ms > 0.0)) throw std::invalid_argument("reward T_ref must be positive");
  c.e_ref_j = model.on_device_energy_j() > 0.0 ? model.on_device_energy_j() : 1.0;

  c.energy_budget_j = model.profile().device.energy_budget_j;
  if (params.energy_budget_j) c.energy_budget_j = *params.energy_budget_j;
  if (params.energy_budget_branch1_factor) {
    const auto& first = model.profile().topology.exits.front();
    const EvalResult local = model.evaluate({first.id, first.layer_count, model.bits_set().front()},
                                            make_channel(model.profile().device, 0.0));
    c.energy_budget_j = *params.energy_budget_branch1_factor * local.compute_energy_j;
  }
  if (std::isnan(c.energy_budget_j) || c.energy_budget_j <= 0.0) {
    throw std::invalid_argument("energy budget must be positive or unbounded");
  }
  return c;
}

double reward(const EvalResult& result, double bandwidth_bps, const RewardConfig& config) {
  if (result.total_energy_j > config.energy_budget_j) return 0.0;
  if (!(result.total_latency_ms > 0.0)) {
    throw std::invalid_argument("reward undefined for zero latency");
  }
  const double a = config.a(bandwidth_bps);
  const double b = 1.0 - a;
  return a * result.accuracy + b * (config.t_ref_ms / result.total_latency_ms);
}

Observation normalize_state(const EnvState& s, const RewardConfig& c) {
  Observation o{};
  o[0] = s.latency_ms > 0.0 ? std::clamp(c.t_ref_ms / s.latency_ms, 0.0, kMaxNormalizedLatency) : 0.0;
  const double e_scale = std::isfinite(c.energy_budget_j) ? c.energy_budget_j : c.e_ref_j;
  o[1] = std::clamp(s.energy_j / e_scale, 0.0, kMaxNormalizedEnergy);
  o[2] = s.accuracy;
  o[3] = s.bandwidth_bps / c.b_max_bps;
  return o;
}

ActionSpace::ActionSpace(const ModelProfile& profile, std::vector<int> bits_set)
    : bits_(std::move(bits_set)) {
  if (bits_.empty()) throw std::invalid_argument("bits set is empty");
  num_exits_ = profile.topology.exits.size();
  pp_slots_ = static_cast<std::size_t>(profile.topology.max_layer_count()) + 1;
  mask_.assign(size(), 0);
  for (const auto& exit : profile.topology.exits) {
    for (int pp = 0; pp <= exit.layer_count; ++pp) {
      for (std::size_t b = 0; b < bits_.size(); ++b) {
        mask_[index_of({exit.id, pp, bits_[b]})] = 1;
      }
    }
  }
}

ActionSpace::ActionSpace(const SystemModel& model)
    : ActionSpace(model.profile(), std::vector<int>(model.bits_set().begin(), model.bits_set().end())) {}

std::size_t ActionSpace::valid_count() const {
  return static_cast<std::size_t>(std::count(mask_.begin(), mask_.end(), 1));
}

std::size_t ActionSpace::index_of(const Action& a) const {
  auto it = std::find(bits_.begin(), bits_.end(), a.bits);
  if (a.ep < 1 || static_cast<std::size_t>(a.ep) > num_exits_ || a.pp < 0 ||
      static_cast<std::size_t>(a.pp) >= pp_slots_ || it == bits_.end()) {
    throw std::out_of_range("action " + to_string(a) + " outside the action grid");
  }
  const auto bit_index = static_cast<std::size_t>(it - bits_.begin());
  return ((static_cast<std::size_t>(a.ep) - 1) * pp_slots_ + static_cast<std::size_t>(a.pp)) *
             bits_.size() +
         bit_index;
}

Action ActionSpace::action_at(std::size_t index) const {
  if (index >= size()) throw std::out_of_range("action index out of range");
  const std::size_t bit_index = index % bits_.size();
  const std::size_t rest = index / bits_.size();
  return {static_cast<int>(rest / pp_slots_) + 1, static_cast<int>(rest % pp_slots_),
          bits_[bit_index]};
}

ActionMask action_mask(const ModelProfile& profile, std::span<const int> bits_set) {
  return ActionSpace(profile, std::vector<int>(bits_set.begin(), bits_set.end())).mask();
}

std::string_view to_string(BandwidthKind kind) {
  switch (kind) {
    case BandwidthKind::kFixed:
      return "fixed";
    case BandwidthKind::kGridSweep:
      return "grid_sweep";
    case BandwidthKind::kBoundedRandomWalk:
      return "bounded_random_walk";
  }
  return "fixed";
}

BandwidthKind parse_bandwidth_kind(std::string_view name) {
  if (name == "fixed") return BandwidthKind::kFixed;
  if (name == "grid_sweep") return BandwidthKind::kGridSweep;
  if (name == "bounded_random_walk") return BandwidthKind::kBoundedRandomWalk;
  throw std::invalid_argument("unknown bandwidth process '" + std::string(name) + "'");
}

BandwidthProcess::BandwidthProcess(BandwidthConfig config, std::uint64_t seed)
    : config_(std::move(config)), rng_(seed) {
  switch (config_.kind) {
    case BandwidthKind::kFixed:
      if (!(config_.fixed_bps >= 0.0) || !std::isfinite(config_.fixed_bps)) {
        throw std::invalid_argument("fixed bandwidth must be finite and non-negative");
      }
      break;
    case BandwidthKind::kGridSweep:
      if (config_.grid_bps.empty()) throw std::invalid_argument("bandwidth grid is empty");
      for (double b : config_.grid_bps) {
        if (!(b >= 0.0) || !std::isfinite(b)) {
          throw std::invalid_argument("bandwidth grid values must be finite and non-negative");
        }
      }
      break;
    case BandwidthKind::kBoundedRandomWalk:
      if (!(config_.lo_bps >= 0.0) || !(config_.hi_bps >= config_.lo_bps) ||
          !std::isfinite(config_.hi_bps)) {
        throw std::invalid_argument("random-walk bandwidth range must satisfy 0 <= lo <= hi");
      }
      if (!(config_.step_bps >= 0.0)) throw std::invalid_argument("random-walk step must be >= 0");
      break;
  }
  reset();
}

void BandwidthProcess::reset() {
  switch (config_.kind) {
    case BandwidthKind::kFixed:
      current_ = config_.fixed_bps;
      break;
    case BandwidthKind::kGridSweep:
      grid_pos_ = 0;
      current_ = config_.grid_bps.front();
      break;
    case BandwidthKind::kBoundedRandomWalk: {
      std::uniform_real_distribution<double> start(config_.lo_bps, config_.hi_bps);
      current_ = config_.hi_bps > config_.lo_bps ? start(rng_) : config_.lo_bps;
      break;
    }
  }
}

void BandwidthProcess::advance() {
  switch (config_.kind) {
    case BandwidthKind::kFixed:
      break;
    case BandwidthKind::kGridSweep:
      grid_pos_ = (grid_pos_ + 1) % config_.grid_bps.size();
      current_ = config_.grid_bps[grid_pos_];
      break;
    case BandwidthKind::kBoundedRandomWalk: {
      std::uniform_real_distribution<double> step(-config_.step_bps, config_.step_bps);
      double next = current_ + step(rng_);
      const double lo = config_.lo_bps;
      const double hi = config_.hi_bps;
      if (config_.reflect) {
        if (next < lo) next = lo + (lo - next);
        if (next > hi) next = hi - (next - hi);
      }
      current_ = std::clamp(next, lo, hi);
      break;
    }
  }
}

Environment::Environment(std::shared_ptr<const SystemModel> model, EnvConfig config)
    : model_(std::move(model)),
      config_(std::move(config)),
      reward_config_(make_reward_config(*model_, config_.reward)),
      space_(*model_),
      bandwidth_(config_.bandwidth, config_.seed) {
  if (config_.horizon < 1) throw std::invalid_argument("episode horizon must be >= 1");
  state_ = reference_state(bandwidth_.current());
}

ChannelConfig Environment::channel(double bandwidth_bps) const {
  return make_channel(model_->profile().device, bandwidth_bps, config_.channel_mode);
}

EnvState Environment::reference_state(double bandwidth_bps) const {
  const EvalResult r = model_->evaluate(model_->on_device_action(), channel(bandwidth_bps));
  return {r.total_latency_ms, r.total_energy_j, r.accuracy, bandwidth_bps};
}

EnvState Environment::reset() {
  bandwidth_.reset();
  t_ = 0;
  state_ = reference_state(bandwidth_.current());
  return state_;
}

StepResult Environment::step(std::size_t action_index) {
  StepResult out;
  const double bw = bandwidth_.current();
  out.info.bandwidth_bps = bw;
  const ChannelConfig ch = channel(bw);

  EnvState next{};
  if (!space_.is_valid(action_index)) {
    out.info.invalid = true;
    if (action_index < space_.size()) out.info.action = space_.action_at(action_index);
  } else {
    out.info.action = space_.action_at(action_index);
    if (!model_->feasible(out.info.action, ch)) {
      out.info.infeasible = true;
    } else {
      out.info.result = model_->evaluate(out.info.action, ch);
      out.reward = reward(out.info.result, bw, reward_config_);
      next.latency_ms = out.info.result.total_latency_ms;
      next.energy_j = out.info.result.total_energy_j;
      next.accuracy = out.info.result.accuracy;
    }
  }

  bandwidth_.advance();
  next.bandwidth_bps = bandwidth_.current();
  state_ = next;
  ++t_;
  out.next_state = next;
  out.done = t_ >= config_.horizon;
  return out;
}

}  // namespace coinfer
