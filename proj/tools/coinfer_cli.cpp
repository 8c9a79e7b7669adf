// coinfer: command-line harness for the co-inference simulator.
//
//   coinfer profile validate PATH
//   coinfer evaluate --bandwidth B [--ep E --pp P --c C | --all]
//   coinfer oracle --bandwidth B
//   coinfer train [--agent sac|dqn] [--steps N]
//   coinfer sweep [--checkpoint FILE]...
//   coinfer quantize-report
//
// Exit codes: 0 success, 1 validation/usage error, 2 runtime error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "coinfer/experiment.hpp"
#include "coinfer/oracle.hpp"
#include "coinfer/profile.hpp"

namespace fs = std::filesystem;
using namespace coinfer;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;
constexpr const char* kConfigEnv = "COINFER_CONFIG";

struct CommonOptions {
  std::string config;
  std::string profile;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
  std::string channel_mode;
  std::vector<int> bits;
  std::optional<double> n, s, t_ref, b_max, energy_budget, energy_factor;
};

void add_common(CLI::App* app, CommonOptions& o, bool with_bits = true) {
  app->add_option("--config", o.config,
                  std::string("Experiment config (JSON); default from $") + kConfigEnv);
  app->add_option("--profile", o.profile, "Model profile path (overrides the config)");
  app->add_option("--out-dir", o.out_dir, "Directory for all file outputs");
  app->add_option("--seed", o.seed, "Master seed");
  app->add_option("--channel-mode,--mode", o.channel_mode, "raw_rate or shannon")
      ->check(CLI::IsMember({"raw_rate", "shannon"}));
  if (with_bits) app->add_option("--bits", o.bits, "Quantization bits set")->delimiter(',');
  app->add_option("--n", o.n, "Reward normalization coefficient n");
  app->add_option("--s", o.s, "Reward bandwidth sensitivity s (bytes/s)");
  app->add_option("--t-ref", o.t_ref, "Reward latency normalizer T_ref (ms)");
  app->add_option("--b-max", o.b_max, "Bandwidth at which a reaches 1 (bytes/s)");
  app->add_option("--energy-budget", o.energy_budget, "Device energy budget (J)");
  app->add_option("--energy-budget-factor", o.energy_factor,
                  "Energy budget as a multiple of exit-1 on-device compute energy");
}

fs::path default_profile() {
  const fs::path local = "data/alexnet_branchy.profile";
  if (fs::exists(local)) return local;
#ifdef COINFER_DATA_DIR
  const fs::path bundled = fs::path(COINFER_DATA_DIR) / "alexnet_branchy.profile";
  if (fs::exists(bundled)) return bundled;
#endif
  return local;
}

ExperimentConfig resolve_config(const CommonOptions& o) {
  std::string path = o.config;
  if (path.empty()) {
    if (const char* env = std::getenv(kConfigEnv); env && *env) path = env;
  }
  ExperimentConfig c;
  if (!path.empty()) {
    c = load_config(path);
  } else {
    c = config_from_json(nlohmann::json::object());
    c.profile = default_profile();
  }
  if (!o.profile.empty()) c.profile = o.profile;
  if (!o.out_dir.empty()) c.out_dir = o.out_dir;
  if (o.seed) c.seed = *o.seed;
  if (!o.channel_mode.empty()) c.channel_mode = parse_channel_mode(o.channel_mode);
  if (!o.bits.empty()) c.bits = o.bits;
  if (o.n) c.reward.n = *o.n;
  if (o.s) c.reward.s_bps = *o.s;
  if (o.t_ref) c.reward.t_ref_ms = *o.t_ref;
  if (o.b_max) c.reward.b_max_bps = *o.b_max;
  if (o.energy_budget) c.reward.energy_budget_j = *o.energy_budget;
  if (o.energy_factor) c.reward.energy_budget_branch1_factor = *o.energy_factor;
  // Re-run validation over the overridden values.
  return config_from_json(config_to_json(c));
}

fs::path ensure_out_dir(const ExperimentConfig& c) {
  fs::create_directories(c.out_dir);
  return c.out_dir;
}

std::ofstream open_csv(const fs::path& path, const char* header) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << header << '\n';
  return out;
}

// Tee lines to stdout and, when requested, a CSV file under --out-dir.
class RowWriter {
 public:
  RowWriter(const CommonOptions& o, const ExperimentConfig& c, const std::string& file,
            const char* header) {
    std::cout << header << '\n';
    if (!o.out_dir.empty()) {
      fs::create_directories(c.out_dir);
      file_ = open_csv(c.out_dir / file, header);
    }
  }
  void write(const std::string& line) {
    std::cout << line << '\n';
    if (file_.is_open()) file_ << line << '\n';
  }

 private:
  std::ofstream file_;
};

// ---------------------------------------------------------------------------

int cmd_profile_validate(const std::string& path) {
  ModelProfile p;
  try {
    p = load_profile(path);
  } catch (const ProfileError& e) {
    std::cerr << "invalid profile " << path << '\n';
    if (e.violations().empty()) std::cerr << "  " << e.what() << '\n';
    for (const auto& v : e.violations()) std::cerr << "  " << v.field << ": " << v.message << '\n';
    return kExitValidation;
  }
  const SystemModel model(p);
  const ActionSpace space(model);
  std::cout << "ok " << p.name << ": " << p.topology.layers.size() << " layers, "
            << p.topology.exits.size() << " exits, " << space.valid_count() << " of "
            << space.size() << " actions valid\n";
  return kExitOk;
}

constexpr const char* kEvaluateHeader =
    "bandwidth_bps,ep,pp,c,feasible,device_latency_ms,transmission_latency_ms,edge_latency_ms,"
    "latency_ms,compute_energy_j,transmission_energy_j,energy_j,accuracy,transmitted_bytes,reward";

std::string evaluate_line(const SystemModel& model, const Environment& env, double bw,
                          const Action& a) {
  const ChannelConfig ch = env.channel(bw);
  std::ostringstream os;
  os << format_double(bw) << ',' << a.ep << ',' << a.pp << ',' << a.bits << ',';
  if (!model.feasible(a, ch)) {
    os << "0,nan,inf,nan,inf,nan,inf,inf," << format_double(model.accuracy(a)) << ','
       << format_double(model.transmitted_bytes(a)) << ",0";
    return os.str();
  }
  const EvalResult r = model.evaluate(a, ch);
  os << "1," << format_double(r.device_latency_ms) << ',' << format_double(r.transmission_latency_ms)
     << ',' << format_double(r.edge_latency_ms) << ',' << format_double(r.total_latency_ms) << ','
     << format_double(r.compute_energy_j) << ',' << format_double(r.transmission_energy_j) << ','
     << format_double(r.total_energy_j) << ',' << format_double(r.accuracy) << ','
     << format_double(r.transmitted_bytes) << ','
     << format_double(reward(r, bw, env.reward_config()));
  return os.str();
}

int cmd_evaluate(const CommonOptions& o, double bw, std::optional<int> ep, std::optional<int> pp,
                 std::optional<int> c, bool all) {
  ExperimentConfig cfg = resolve_config(o);
  if (c && std::find(cfg.bits.begin(), cfg.bits.end(), *c) == cfg.bits.end()) {
    cfg.bits.push_back(*c);
    cfg = config_from_json(config_to_json(cfg));
  }
  const auto model = make_model(cfg);
  const Environment env(model, make_env_config(cfg));
  std::vector<Action> actions;
  if (all) {
    actions = model->enumerate_actions();
  } else {
    if (!ep || !pp) throw ConfigError("evaluate needs --ep and --pp (or --all)");
    const Action a{*ep, *pp, c.value_or(cfg.bits.front())};
    if (!model->is_valid(a)) throw ConfigError("invalid action " + to_string(a));
    actions.push_back(a);
  }
  RowWriter out(o, cfg, "evaluate.csv", kEvaluateHeader);
  for (const Action& a : actions) out.write(evaluate_line(*model, env, bw, a));
  return kExitOk;
}

int cmd_oracle(const CommonOptions& o, const std::vector<double>& bandwidths) {
  const ExperimentConfig cfg = resolve_config(o);
  const auto model = make_model(cfg);
  const Environment env(model, make_env_config(cfg));
  RowWriter out(o, cfg, "oracle.csv", kSweepHeader);
  for (double bw : bandwidths) {
    const OracleDecision d = oracle_best(*model, env.channel(bw), env.reward_config());
    out.write(format_sweep_row({bw, "oracle", d.action, d.result.total_latency_ms,
                                d.result.accuracy, d.result.total_energy_j, d.reward}));
  }
  return kExitOk;
}

int cmd_train(const CommonOptions& o, const std::string& agent_kind, std::optional<long> steps,
              bool quiet) {
  ExperimentConfig cfg = resolve_config(o);
  if (!agent_kind.empty()) cfg.agent = agent_kind;
  if (steps) {
    if (*steps < 0) throw ConfigError("--steps must be >= 0");
    cfg.training.total_steps = *steps;
  }
  const auto model = make_model(cfg);
  Environment env(model, make_env_config(cfg));
  const fs::path dir = ensure_out_dir(cfg);
  {
    std::ofstream cfg_out(dir / (cfg.agent + "_config.json"));
    cfg_out << config_to_json(cfg).dump(2) << '\n';
  }
  auto metrics = open_csv(dir / (cfg.agent + "_metrics.csv"), kMetricsHeader);
  const MetricsSink sink = [&](const MetricsRow& row) {
    metrics << format_metrics_row(row) << '\n';
    if (!quiet) {
      std::cerr << "step " << row.step << " reward " << format_double(row.episode_reward)
                << " q_loss " << format_double(row.q_loss) << '\n';
    }
  };

  const TrainConfig tc = make_train_config(cfg);
  TrainSummary summary;
  std::optional<AnyAgent> agent;
  if (cfg.agent == "sac") {
    SacAgent a(env.action_space().mask(), make_sac_config(cfg));
    summary = train_sac(env, a, tc, sink);
    agent.emplace(std::move(a));
  } else {
    DqnAgent a(env.action_space().mask(), make_dqn_config(cfg));
    summary = train_dqn(env, a, tc, sink);
    agent.emplace(std::move(a));
  }
  const fs::path ckpt = dir / (cfg.agent + "_checkpoint.json");
  save_checkpoint(*agent, *model, ckpt);
  std::cout << "trained " << cfg.agent << ": " << summary.steps << " steps, " << summary.updates
            << " updates, " << summary.episodes << " episodes in " << format_double(summary.seconds)
            << " s\ncheckpoint " << ckpt.string() << '\n';
  return kExitOk;
}

int cmd_sweep(const CommonOptions& o, const std::vector<std::string>& checkpoints,
              const std::vector<double>& grid, std::optional<int> settle) {
  ExperimentConfig cfg = resolve_config(o);
  if (!grid.empty()) cfg.sweep.grid_bps = grid;
  if (settle) {
    if (*settle < 1) throw ConfigError("--settle-steps must be >= 1");
    cfg.sweep.settle_steps = *settle;
  }
  const auto model = make_model(cfg);

  std::vector<AnyAgent> agents;
  agents.reserve(checkpoints.size());
  std::vector<SweepAgent> entries;
  for (const auto& path : checkpoints) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open checkpoint " + path);
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("checkpoint " + path + " is not valid JSON");
    }
    check_compatible(doc, *model);
    agents.push_back(checkpoint_from_json(doc));
  }
  for (const auto& a : agents) entries.push_back({agent_name(a), greedy_policy(a)});

  const auto rows = run_sweep(model, make_env_config(cfg), cfg.sweep.grid_bps, entries,
                              cfg.sweep.settle_steps, cfg.sweep.threads);
  const fs::path dir = ensure_out_dir(cfg);
  {
    auto out = open_csv(dir / "sweep.csv", kSweepHeader);
    for (const auto& r : rows) out << format_sweep_row(r) << '\n';
  }
  const auto summary = summarize_sweep(rows);
  {
    auto out = open_csv(dir / "summary.csv", kSummaryHeader);
    for (const auto& s : summary) out << format_summary_row(s) << '\n';
  }
  std::cout << kSummaryHeader << '\n';
  for (const auto& s : summary) std::cout << format_summary_row(s) << '\n';
  return kExitOk;
}

int cmd_quantize_report(const CommonOptions& o) {
  const ExperimentConfig cfg = resolve_config(o);
  const auto model = make_model(cfg);
  const fs::path dir = ensure_out_dir(cfg);
  auto out = open_csv(dir / "quantize_report.csv", kQuantReportHeader);
  std::size_t n = 0;
  for (const auto& r : quantize_report(*model)) {
    out << format_quant_row(r) << '\n';
    ++n;
  }
  std::cout << "wrote " << n << " rows to " << (dir / "quantize_report.csv").string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Device-edge co-inference simulator: evaluation, oracle, SAC-d/DQN training."};
  app.require_subcommand(1);

  CommonOptions common;

  auto* profile = app.add_subcommand("profile", "Profile utilities");
  profile->require_subcommand(1);
  auto* validate = profile->add_subcommand("validate", "Check a profile against its invariants");
  std::string validate_path;
  validate->add_option("path", validate_path, "Profile file")->required();

  auto* evaluate = app.add_subcommand("evaluate", "Latency/energy/accuracy of actions");
  add_common(evaluate, common, /*with_bits=*/false);
  double eval_bw = 0.0;
  std::optional<int> ep, pp, c;
  bool eval_all = false;
  evaluate->add_option("--bandwidth", eval_bw, "Bandwidth (bytes/s)")->required();
  evaluate->add_option("--ep", ep, "Exit point");
  evaluate->add_option("--pp", pp, "Partition point");
  evaluate->add_option("--c,--bits", c, "Quantization bits of the action");
  evaluate->add_flag("--all", eval_all, "Evaluate every valid action");

  auto* oracle = app.add_subcommand("oracle", "Exhaustive best action");
  add_common(oracle, common);
  std::vector<double> oracle_bw;
  oracle->add_option("--bandwidth", oracle_bw, "Bandwidth(s) in bytes/s")
      ->required()
      ->delimiter(',');

  auto* train = app.add_subcommand("train", "Train an agent; writes checkpoint and metrics CSV");
  add_common(train, common);
  std::string agent_kind;
  std::optional<long> steps;
  bool quiet = false;
  train->add_option("--agent", agent_kind, "sac or dqn")->check(CLI::IsMember({"sac", "dqn"}));
  train->add_option("--steps", steps, "Environment steps");
  train->add_flag("--quiet", quiet, "No progress on stderr");

  auto* sweep = app.add_subcommand("sweep", "Oracle/agents/on-device over a bandwidth grid");
  add_common(sweep, common);
  std::vector<std::string> checkpoints;
  std::vector<double> grid;
  std::optional<int> settle;
  sweep->add_option("--checkpoint", checkpoints, "Agent checkpoint (repeatable)");
  sweep->add_option("--grid", grid, "Bandwidth grid in bytes/s")->delimiter(',');
  sweep->add_option("--settle-steps", settle, "Greedy steps before the reported decision");

  auto* qreport = app.add_subcommand("quantize-report", "Compressed size and accuracy per split");
  add_common(qreport, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*validate) return cmd_profile_validate(validate_path);
    if (*evaluate) return cmd_evaluate(common, eval_bw, ep, pp, c, eval_all);
    if (*oracle) return cmd_oracle(common, oracle_bw);
    if (*train) return cmd_train(common, agent_kind, steps, quiet);
    if (*sweep) return cmd_sweep(common, checkpoints, grid, settle);
    if (*qreport) return cmd_quantize_report(common);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const ProfileError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitValidation;
}
