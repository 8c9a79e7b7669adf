#include "coinfer/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include "coinfer/oracle.hpp"

namespace coinfer {

using nlohmann::json;

namespace {

constexpr const char* kCheckpointFormat = "coinfer-agent";
constexpr int kCheckpointVersion = 1;

std::vector<double> default_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 10; ++i) g.push_back(i * 1e6);
  return g;
}

// Reads one JSON object section, rejecting keys it was never asked about.
class Section {
 public:
  Section(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ConfigError(where() + " must be an object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return doc_.contains(key) && !doc_.at(key).is_null();
  }

  template <typename T>
  void read(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = doc_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  template <typename T>
  void read(const std::string& key, std::optional<T>& out) {
    seen_.insert(key);
    if (!doc_.contains(key)) return;
    if (doc_.at(key).is_null()) {
      out.reset();
      return;
    }
    try {
      out = doc_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError(where(key) + " has the wrong type");
    }
  }

  Section child(const std::string& key) {
    seen_.insert(key);
    static const json empty = json::object();
    if (!doc_.contains(key) || doc_.at(key).is_null()) return Section(empty, path_ + "." + key);
    return Section(doc_.at(key), path_ + "." + key);
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + where(it.key()));
    }
  }

  std::string where(const std::string& key = {}) const {
    return key.empty() ? path_ : path_ + "." + key;
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename F>
auto config_guard(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(what + ": " + e.what());
  }
}

void validate(const ExperimentConfig& c) {
  if (c.bits.empty()) throw ConfigError("bits must not be empty");
  QuantOptions q;
  q.literal_eq4_levels = c.literal_levels;
  for (int b : c.bits) {
    if (b < q.min_bits || b > q.max_bits) {
      throw ConfigError("bits value " + std::to_string(b) + " outside [" +
                        std::to_string(q.min_bits) + ", " + std::to_string(q.max_bits) + "]");
    }
  }
  if (c.horizon < 1) throw ConfigError("horizon must be >= 1");
  if (c.agent != "sac" && c.agent != "dqn") throw ConfigError("agent must be \"sac\" or \"dqn\"");
  if (c.sweep.settle_steps < 1) throw ConfigError("sweep.settle_steps must be >= 1");
  if (c.sweep.threads < 0) throw ConfigError("sweep.threads must be >= 0");
  for (double b : c.sweep.grid_bps) {
    if (!(std::isfinite(b) && b >= 0.0)) throw ConfigError("sweep.grid_bps values must be finite and >= 0");
  }
  auto hidden_ok = [](const std::vector<int>& h) {
    return std::all_of(h.begin(), h.end(), [](int w) { return w > 0; });
  };
  if (!hidden_ok(c.sac.hidden)) throw ConfigError("sac.hidden widths must be positive");
  if (!hidden_ok(c.dqn.hidden)) throw ConfigError("dqn.hidden widths must be positive");
  if (!(c.sac.learning_rate > 0.0)) throw ConfigError("sac.learning_rate must be positive");
  if (!(c.dqn.learning_rate > 0.0)) throw ConfigError("dqn.learning_rate must be positive");
  if (!(c.sac.gamma >= 0.0 && c.sac.gamma <= 1.0)) throw ConfigError("sac.gamma must lie in [0, 1]");
  if (!(c.dqn.gamma >= 0.0 && c.dqn.gamma <= 1.0)) throw ConfigError("dqn.gamma must lie in [0, 1]");
  if (!(c.sac.tau > 0.0 && c.sac.tau <= 1.0)) throw ConfigError("sac.tau must lie in (0, 1]");
  if (!(c.sac.initial_alpha > 0.0)) throw ConfigError("sac.initial_alpha must be positive");
  if (c.sac.batch_size == 0 || c.dqn.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (c.training.total_steps < 0) throw ConfigError("training.total_steps must be >= 0");
  if (c.training.warmup_steps < 0) throw ConfigError("training.warmup_steps must be >= 0");
  if (c.training.update_every < 1) throw ConfigError("training.update_every must be >= 1");
  if (c.training.buffer_capacity == 0) throw ConfigError("training.buffer_capacity must be positive");
  if (c.training.log_every < 1) throw ConfigError("training.log_every must be >= 1");
  // Let the bandwidth process and reward parameters check themselves.
  config_guard("bandwidth", [&] { return BandwidthProcess(c.bandwidth, 0).current(); });
  if (!(c.reward.s_bps > 0.0)) throw ConfigError("reward.s_bps must be positive");
  if (!(c.reward.b_max_bps > 0.0)) throw ConfigError("reward.b_max_bps must be positive");
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return base / p;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

ExperimentConfig config_from_json(const json& doc, const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  c.sweep.grid_bps = default_grid();
  Section top(doc, "config");

  std::string profile;
  top.read("profile", profile);
  if (!profile.empty()) c.profile = resolve(profile, base_dir);
  std::string channel;
  top.read("channel_mode", channel);
  if (!channel.empty()) c.channel_mode = config_guard("channel_mode", [&] { return parse_channel_mode(channel); });
  top.read("bits", c.bits);
  top.read("quantize_raw_input", c.quantize_raw_input);
  top.read("literal_levels", c.literal_levels);
  top.read("horizon", c.horizon);
  top.read("agent", c.agent);
  top.read("seed", c.seed);
  std::string out_dir;
  top.read("out_dir", out_dir);
  if (!out_dir.empty()) c.out_dir = resolve(out_dir, base_dir);

  {
    Section r = top.child("reward");
    r.read("n", c.reward.n);
    r.read("s_bps", c.reward.s_bps);
    r.read("t_ref_ms", c.reward.t_ref_ms);
    r.read("b_max_bps", c.reward.b_max_bps);
    r.read("energy_budget_j", c.reward.energy_budget_j);
    r.read("energy_budget_branch1_factor", c.reward.energy_budget_branch1_factor);
    r.finish();
  }
  {
    Section b = top.child("bandwidth");
    std::string kind;
    b.read("kind", kind);
    if (!kind.empty()) c.bandwidth.kind = config_guard("bandwidth.kind", [&] { return parse_bandwidth_kind(kind); });
    b.read("fixed_bps", c.bandwidth.fixed_bps);
    b.read("grid_bps", c.bandwidth.grid_bps);
    b.read("lo_bps", c.bandwidth.lo_bps);
    b.read("hi_bps", c.bandwidth.hi_bps);
    b.read("step_bps", c.bandwidth.step_bps);
    b.read("reflect", c.bandwidth.reflect);
    b.finish();
  }
  {
    Section s = top.child("sac");
    s.read("hidden", c.sac.hidden);
    s.read("learning_rate", c.sac.learning_rate);
    s.read("gamma", c.sac.gamma);
    s.read("tau", c.sac.tau);
    s.read("hard_update_every", c.sac.hard_update_every);
    s.read("target_entropy_scale", c.sac.target_entropy_scale);
    s.read("target_entropy", c.sac.target_entropy);
    s.read("initial_alpha", c.sac.initial_alpha);
    s.read("learn_alpha", c.sac.learn_alpha);
    s.read("twin_q", c.sac.twin_q);
    s.read("use_mask", c.sac.use_mask);
    s.read("batch_size", c.sac.batch_size);
    s.finish();
  }
  {
    Section d = top.child("dqn");
    d.read("hidden", c.dqn.hidden);
    d.read("learning_rate", c.dqn.learning_rate);
    d.read("gamma", c.dqn.gamma);
    d.read("epsilon_start", c.dqn.epsilon_start);
    d.read("epsilon_end", c.dqn.epsilon_end);
    d.read("epsilon_decay_steps", c.dqn.epsilon_decay_steps);
    d.read("target_update_every", c.dqn.target_update_every);
    d.read("use_mask", c.dqn.use_mask);
    d.read("batch_size", c.dqn.batch_size);
    d.finish();
  }
  {
    Section t = top.child("training");
    t.read("total_steps", c.training.total_steps);
    t.read("warmup_steps", c.training.warmup_steps);
    t.read("update_every", c.training.update_every);
    t.read("buffer_capacity", c.training.buffer_capacity);
    t.read("log_every", c.training.log_every);
    t.read("bootstrap_on_timeout", c.training.bootstrap_on_timeout);
    t.finish();
  }
  {
    Section s = top.child("sweep");
    s.read("grid_bps", c.sweep.grid_bps);
    s.read("settle_steps", c.sweep.settle_steps);
    s.read("threads", c.sweep.threads);
    s.finish();
  }
  top.finish();
  validate(c);
  return c;
}

json config_to_json(const ExperimentConfig& c) {
  auto opt = [](const auto& o) -> json { return o ? json(*o) : json(nullptr); };
  json doc;
  doc["profile"] = c.profile.generic_string();
  doc["channel_mode"] = std::string(to_string(c.channel_mode));
  doc["bits"] = c.bits;
  doc["quantize_raw_input"] = c.quantize_raw_input;
  doc["literal_levels"] = c.literal_levels;
  doc["horizon"] = c.horizon;
  doc["agent"] = c.agent;
  doc["seed"] = c.seed;
  doc["out_dir"] = c.out_dir.generic_string();
  doc["reward"] = {
      {"n", opt(c.reward.n)},
      {"s_bps", c.reward.s_bps},
      {"t_ref_ms", opt(c.reward.t_ref_ms)},
      {"b_max_bps", c.reward.b_max_bps},
      {"energy_budget_j", opt(c.reward.energy_budget_j)},
      {"energy_budget_branch1_factor", opt(c.reward.energy_budget_branch1_factor)},
  };
  doc["bandwidth"] = {
      {"kind", std::string(to_string(c.bandwidth.kind))},
      {"fixed_bps", c.bandwidth.fixed_bps},
      {"grid_bps", c.bandwidth.grid_bps},
      {"lo_bps", c.bandwidth.lo_bps},
      {"hi_bps", c.bandwidth.hi_bps},
      {"step_bps", c.bandwidth.step_bps},
      {"reflect", c.bandwidth.reflect},
  };
  doc["sac"] = {
      {"hidden", c.sac.hidden},
      {"learning_rate", c.sac.learning_rate},
      {"gamma", c.sac.gamma},
      {"tau", c.sac.tau},
      {"hard_update_every", c.sac.hard_update_every},
      {"target_entropy_scale", c.sac.target_entropy_scale},
      {"target_entropy", opt(c.sac.target_entropy)},
      {"initial_alpha", c.sac.initial_alpha},
      {"learn_alpha", c.sac.learn_alpha},
      {"twin_q", c.sac.twin_q},
      {"use_mask", c.sac.use_mask},
      {"batch_size", c.sac.batch_size},
  };
  doc["dqn"] = {
      {"hidden", c.dqn.hidden},
      {"learning_rate", c.dqn.learning_rate},
      {"gamma", c.dqn.gamma},
      {"epsilon_start", c.dqn.epsilon_start},
      {"epsilon_end", c.dqn.epsilon_end},
      {"epsilon_decay_steps", c.dqn.epsilon_decay_steps},
      {"target_update_every", c.dqn.target_update_every},
      {"use_mask", c.dqn.use_mask},
      {"batch_size", c.dqn.batch_size},
  };
  doc["training"] = {
      {"total_steps", c.training.total_steps},
      {"warmup_steps", c.training.warmup_steps},
      {"update_every", c.training.update_every},
      {"buffer_capacity", c.training.buffer_capacity},
      {"log_every", c.training.log_every},
      {"bootstrap_on_timeout", c.training.bootstrap_on_timeout},
  };
  doc["sweep"] = {
      {"grid_bps", c.sweep.grid_bps},
      {"settle_steps", c.sweep.settle_steps},
      {"threads", c.sweep.threads},
  };
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc, path.parent_path());
}

std::shared_ptr<const SystemModel> make_model(const ExperimentConfig& c) {
  SystemOptions opts;
  opts.bits_set = c.bits;
  opts.quantize_raw_input = c.quantize_raw_input;
  opts.quant.literal_eq4_levels = c.literal_levels;
  return std::make_shared<const SystemModel>(load_profile(c.profile), opts);
}

EnvConfig make_env_config(const ExperimentConfig& c) {
  EnvConfig e;
  e.reward = c.reward;
  e.bandwidth = c.bandwidth;
  e.channel_mode = c.channel_mode;
  e.horizon = c.horizon;
  e.seed = c.seed;
  return e;
}

SacConfig make_sac_config(const ExperimentConfig& c) {
  SacConfig s = c.sac;
  s.seed = c.seed;
  return s;
}

DqnConfig make_dqn_config(const ExperimentConfig& c) {
  DqnConfig d = c.dqn;
  d.seed = c.seed;
  return d;
}

TrainConfig make_train_config(const ExperimentConfig& c) {
  TrainConfig t = c.training;
  t.seed = c.seed;
  return t;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

std::string agent_name(const AnyAgent& agent) {
  return std::holds_alternative<SacAgent>(agent) ? "sac" : "dqn";
}

json checkpoint_to_json(const AnyAgent& agent, const SystemModel& model) {
  json doc = std::visit([](const auto& a) { return a.to_json(); }, agent);
  doc["format"] = kCheckpointFormat;
  doc["version"] = kCheckpointVersion;
  doc["profile"] = model.profile().name;
  doc["action_space"] = ActionSpace(model).size();
  doc["bits"] = std::vector<int>(model.bits_set().begin(), model.bits_set().end());
  return doc;
}

AnyAgent checkpoint_from_json(const json& doc) {
  try {
    if (doc.value("format", std::string{}) != kCheckpointFormat) {
      throw ConfigError("not an agent checkpoint (missing format tag)");
    }
    if (doc.value("version", 0) != kCheckpointVersion) {
      throw ConfigError("unsupported checkpoint version");
    }
    const std::string kind = doc.at("agent").get<std::string>();
    if (kind == "sac") return SacAgent::from_json(doc);
    if (kind == "dqn") return DqnAgent::from_json(doc);
    throw ConfigError("unknown agent kind '" + kind + "' in checkpoint");
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("malformed checkpoint: ") + e.what());
  }
}

void save_checkpoint(const AnyAgent& agent, const SystemModel& model,
                     const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
  out << checkpoint_to_json(agent, model).dump() << '\n';
  if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

AnyAgent load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open checkpoint " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw ConfigError("checkpoint " + path.string() + " is not valid JSON: " + e.what());
  }
  return checkpoint_from_json(doc);
}

void check_compatible(const json& checkpoint, const SystemModel& model) {
  const std::size_t expected = ActionSpace(model).size();
  const auto size = checkpoint.value("action_space", std::size_t{0});
  if (size != expected) {
    throw ConfigError("checkpoint action space has " + std::to_string(size) +
                      " slots but the profile/bits give " + std::to_string(expected));
  }
  const auto bits = checkpoint.value("bits", std::vector<int>{});
  if (bits != std::vector<int>(model.bits_set().begin(), model.bits_set().end())) {
    throw ConfigError("checkpoint was trained with a different bits set");
  }
}

GreedyPolicy greedy_policy(const AnyAgent& agent) {
  if (const auto* sac = std::get_if<SacAgent>(&agent)) {
    return [sac](const Observation& obs) {
      std::mt19937_64 unused(0);
      return sac->act(obs, ActMode::kGreedy, unused);
    };
  }
  const auto* dqn = std::get_if<DqnAgent>(&agent);
  return [dqn](const Observation& obs) { return dqn->greedy(obs); };
}

// ---------------------------------------------------------------------------
// Sweep
// ---------------------------------------------------------------------------

std::string format_sweep_row(const SweepRow& r) {
  std::ostringstream os;
  os << format_double(r.bandwidth_bps) << ',' << r.optimizer << ',' << r.action.ep << ','
     << r.action.pp << ',' << r.action.bits << ',' << format_double(r.latency_ms) << ','
     << format_double(r.accuracy) << ',' << format_double(r.energy_j) << ','
     << format_double(r.reward);
  return os.str();
}

namespace {

SweepRow row_from(double bw, std::string name, const Action& a, const EvalResult& r, double reward) {
  return {bw, std::move(name), a, r.total_latency_ms, r.accuracy, r.total_energy_j, reward};
}

std::vector<SweepRow> sweep_point(const std::shared_ptr<const SystemModel>& model,
                                  const EnvConfig& env, double bw,
                                  const std::vector<SweepAgent>& agents, int settle_steps) {
  const Environment probe(model, env);
  const ChannelConfig ch = probe.channel(bw);
  const RewardConfig& rc = probe.reward_config();
  std::vector<SweepRow> rows;

  const OracleDecision best = oracle_best(*model, ch, rc);
  rows.push_back(row_from(bw, "oracle", best.action, best.result, best.reward));

  for (const auto& agent : agents) {
    const GreedyDecision d = settle_greedy(model, env, bw, agent.policy, settle_steps);
    if (d.feasible) {
      rows.push_back(row_from(bw, agent.name, d.action, d.result, d.reward));
    } else {
      const double inf = std::numeric_limits<double>::infinity();
      const double acc = model->is_valid(d.action) ? model->accuracy(d.action) : 0.0;
      rows.push_back({bw, agent.name, d.action, inf, acc, inf, 0.0});
    }
  }

  const Action local = model->on_device_action();
  const EvalResult r = model->evaluate(local, ch);
  rows.push_back(row_from(bw, "on_device", local, r, reward(r, bw, rc)));
  return rows;
}

}  // namespace

std::vector<SweepRow> run_sweep(const std::shared_ptr<const SystemModel>& model,
                                const EnvConfig& env, const std::vector<double>& grid_bps,
                                const std::vector<SweepAgent>& agents, int settle_steps,
                                int threads) {
  std::vector<std::vector<SweepRow>> per_point(grid_bps.size());
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                    : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, std::max<std::size_t>(grid_bps.size(), 1));

  if (workers <= 1) {
    for (std::size_t i = 0; i < grid_bps.size(); ++i) {
      per_point[i] = sweep_point(model, env, grid_bps[i], agents, settle_steps);
    }
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < grid_bps.size(); i += workers) {
            per_point[i] = sweep_point(model, env, grid_bps[i], agents, settle_steps);
          }
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::vector<SweepRow> rows;
  for (auto& p : per_point) rows.insert(rows.end(), p.begin(), p.end());
  return rows;
}

std::vector<SweepSummaryRow> summarize_sweep(const std::vector<SweepRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SweepRow*>> by_name;
  double max_bw = -1.0;
  for (const auto& r : rows) {
    if (!by_name.count(r.optimizer)) order.push_back(r.optimizer);
    by_name[r.optimizer].push_back(&r);
    max_bw = std::max(max_bw, r.bandwidth_bps);
  }
  auto latency_at_max = [&](const std::string& name) {
    for (const SweepRow* r : by_name[name]) {
      if (r->bandwidth_bps == max_bw) return r->latency_ms;
    }
    return std::numeric_limits<double>::quiet_NaN();
  };
  double oracle_sum = 0.0;
  for (const SweepRow* r : by_name["oracle"]) oracle_sum += r->reward;
  const double local_latency = latency_at_max("on_device");

  std::vector<SweepSummaryRow> out;
  for (const auto& name : order) {
    const auto& list = by_name[name];
    SweepSummaryRow s;
    s.optimizer = name;
    double reward_sum = 0.0;
    for (const SweepRow* r : list) {
      reward_sum += r->reward;
      s.mean_latency_ms += r->latency_ms;
      s.mean_accuracy += r->accuracy;
    }
    const auto n = static_cast<double>(list.size());
    s.mean_reward = reward_sum / n;
    s.mean_latency_ms /= n;
    s.mean_accuracy /= n;
    s.oracle_reward_ratio =
        oracle_sum > 0.0 ? reward_sum / oracle_sum : std::numeric_limits<double>::quiet_NaN();
    s.speedup_at_max_bandwidth = local_latency / latency_at_max(name);
    out.push_back(s);
  }
  return out;
}

std::string format_summary_row(const SweepSummaryRow& s) {
  std::ostringstream os;
  os << s.optimizer << ',' << format_double(s.mean_reward) << ','
     << format_double(s.oracle_reward_ratio) << ',' << format_double(s.mean_latency_ms) << ','
     << format_double(s.mean_accuracy) << ',' << format_double(s.speedup_at_max_bandwidth);
  return os.str();
}

// ---------------------------------------------------------------------------
// Quantization report
// ---------------------------------------------------------------------------

std::vector<QuantReportRow> quantize_report(const SystemModel& model) {
  const auto& topo = model.profile().topology;
  const ExitBranch& deepest = topo.exits.back();
  std::vector<QuantReportRow> rows;
  for (int layer = 1; layer < deepest.layer_count; ++layer) {
    const LayerProfile& l = topo.layers[static_cast<std::size_t>(layer - 1)];
    for (int bits : model.bits_set()) {
      QuantReportRow r;
      r.layer = layer;
      r.name = l.name;
      r.kind = std::string(to_string(l.kind));
      r.bits = bits;
      r.raw_bytes = l.output_bytes;
      r.compressed_bytes = model.compressed_layer_bytes(layer, bits);
      r.ratio = l.output_bytes > 0.0 ? r.compressed_bytes / l.output_bytes : 0.0;
      r.exit = deepest.id;
      r.accuracy_after = model.accuracy({deepest.id, layer, bits});
      rows.push_back(std::move(r));
    }
  }
  return rows;
}

std::string format_quant_row(const QuantReportRow& r) {
  std::ostringstream os;
  os << r.layer << ',' << r.name << ',' << r.kind << ',' << r.bits << ','
     << format_double(r.raw_bytes) << ',' << format_double(r.compressed_bytes) << ','
     << format_double(r.ratio) << ',' << r.exit << ',' << format_double(r.accuracy_after);
  return os.str();
}

}  // namespace coinfer
