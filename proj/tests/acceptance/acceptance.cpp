// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any FAIL.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "brute_force.hpp"
#include "coinfer/experiment.hpp"
#include "coinfer/huffman.hpp"
#include "coinfer/oracle.hpp"
#include "coinfer/quantization.hpp"
#include "gradient_checks.hpp"
#include "test_support.hpp"

using namespace coinfer;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail) {
  std::printf("criterion %2d: %s  %s\n", id, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void gradients() {
  const auto t0 = Clock::now();
  testing::GradientCheck mlp, q, pi, alpha;
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto merge = [](testing::GradientCheck& into, const testing::GradientCheck& c) {
      into.coordinates += c.coordinates;
      into.matched += c.matched;
    };
    merge(mlp, testing::check_mlp_gradients(seed));
    merge(q, testing::check_q_loss_gradients(seed));
    merge(pi, testing::check_policy_loss_gradients(seed));
    merge(alpha, testing::check_alpha_loss_gradient(seed));
  }
  const double secs = seconds_since(t0);
  const double worst = std::min({mlp.fraction(), q.fraction(), pi.fraction(), alpha.fraction()});
  report(1, worst >= 0.99 && secs < 60.0,
         fmt("60 seeds; matched mlp %.4f q %.4f policy %.4f alpha %.4f; %.1fs", mlp.fraction(),
             q.fraction(), pi.fraction(), alpha.fraction(), secs));
}

void oracle_equivalence() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<int> bits{4, 8, 16};
  int agree = 0;
  const int draws = 100;
  for (int trial = 0; trial < draws; ++trial) {
    const ModelProfile p = testing::random_toy_profile(rng, bits);
    const SystemModel model(p, {.bits_set = bits});
    RewardParams params;
    params.s_bps = 1e4 + 5e6 * u(rng);
    params.b_max_bps = 1e5 + 2e7 * u(rng);
    if (trial % 3 == 0) params.energy_budget_j = 0.05 + 2.0 * u(rng);
    const RewardConfig rc = make_reward_config(model, params);
    const double bw = trial % 10 == 0 ? 0.0 : 1.2 * params.b_max_bps * u(rng);
    const auto mode = trial % 4 == 0 ? ChannelMode::kShannon : ChannelMode::kRawRate;

    const OracleDecision got = oracle_best(model, make_channel(p.device, bw, mode), rc);
    testing::BruteParams bp;
    bp.bandwidth = bw;
    bp.shannon = mode == ChannelMode::kShannon;
    bp.s = params.s_bps;
    bp.b_max = params.b_max_bps;
    bp.t_ref = rc.t_ref_ms;
    bp.budget = rc.energy_budget_j;
    const auto want = testing::brute_force_best(p, bits, bp);
    const bool same = got.action.ep == want.ep && got.action.pp == want.pp &&
                      got.action.bits == want.bits &&
                      std::abs(got.reward - want.reward) <= 1e-12 * std::max(1.0, want.reward);
    agree += same;
  }
  const double secs = seconds_since(t0);
  report(2, agree == draws && secs < 10.0, fmt("%d/%d draws identical; %.2fs", agree, draws, secs));
}

struct Trained {
  std::shared_ptr<const SystemModel> model;
  EnvConfig env;
  std::shared_ptr<SacAgent> agent;
  std::vector<SweepRow> rows;
};

Trained convergence() {
  const ExperimentConfig cfg = load_config(fs::path(COINFER_TEST_SOURCE_DIR) / "configs/default.json");
  Trained t;
  t.model = make_model(cfg);
  t.env = make_env_config(cfg);
  Environment env(t.model, t.env);
  t.agent = std::make_shared<SacAgent>(env.action_space().mask(), make_sac_config(cfg));
  const TrainSummary s = train_sac(env, *t.agent, make_train_config(cfg));

  const SacAgent* agent = t.agent.get();
  const SweepAgent sac{"sac", [agent](const Observation& o) {
                         std::mt19937_64 unused;
                         return agent->act(o, ActMode::kGreedy, unused);
                       }};
  std::vector<double> grid;
  for (int i = 0; i <= 10; ++i) grid.push_back(i * 1e6);
  t.rows = run_sweep(t.model, t.env, grid, {sac}, cfg.sweep.settle_steps);
  const auto summary = summarize_sweep(t.rows);
  const auto it = std::find_if(summary.begin(), summary.end(),
                               [](const SweepSummaryRow& r) { return r.optimizer == "sac"; });
  const double ratio = it == summary.end() ? 0.0 : it->oracle_reward_ratio;
  report(3, s.steps <= 200000 && ratio >= 0.95,
         fmt("%ld steps, %.0fs training; sac/oracle reward over 11 points = %.4f", s.steps,
             s.seconds, ratio));
  return t;
}

void decision_trend(const Trained& t) {
  const Environment probe(t.model, t.env);
  const auto& topo = t.model->profile().topology;
  bool low_local = true;
  for (double bw : {0.0, 1e4, 5e4, 1e5}) {
    const auto d = oracle_best(*t.model, probe.channel(bw), probe.reward_config());
    low_local = low_local && d.action.pp == topo.exit(d.action.ep).layer_count;
  }
  bool high_deep = true;
  for (double bw : {9e6, 9.5e6, 1e7}) {
    high_deep = high_deep && oracle_best(*t.model, probe.channel(bw), probe.reward_config()).action.ep == 3;
  }
  std::string eps;
  int inversions = 0, prev = 0;
  for (const auto& r : t.rows) {
    if (r.optimizer != "sac") continue;
    eps += std::to_string(r.action.ep);
    if (r.action.ep < prev) ++inversions;
    prev = r.action.ep;
  }
  report(4, low_local && high_deep && inversions <= 1,
         fmt("oracle local at B<=1e5: %s; oracle ep=3 at B>=9e6: %s; sac ep over grid %s "
             "(%d inversions)",
             low_local ? "yes" : "no", high_deep ? "yes" : "no", eps.c_str(), inversions));
}

void speedup(const Trained& t) {
  const auto summary = summarize_sweep(t.rows);
  const Environment probe(t.model, t.env);
  const auto d = oracle_best(*t.model, probe.channel(1e7), probe.reward_config());
  const double ratio = d.result.total_latency_ms / t.model->on_device_latency_ms();
  report(5, ratio <= 0.5,
         fmt("best action %s at 10 MB/s: %.1f ms vs %.1f ms on-device (ratio %.3f, speedup %.2fx; "
             "summary reports %.2fx)",
             to_string(d.action).c_str(), d.result.total_latency_ms,
             t.model->on_device_latency_ms(), ratio, 1.0 / ratio,
             summary.front().speedup_at_max_bandwidth));
}

void compression() {
  std::size_t worst = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    worst = std::max(worst, compressed_size(synthetic_feature_map(10000, 0.9, seed), 8));
  }
  const double raw = 10000.0 * 4.0;
  report(6, worst <= 0.1 * raw,
         fmt("largest of 20 seeds: %zu bytes = %.4f of raw", worst, static_cast<double>(worst) / raw));
}

void quant_bound() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::size_t> len(1, 64);
  std::uniform_real_distribution<float> centre(-100.0f, 100.0f), spread(0.0f, 50.0f);
  long checked = 0, violations = 0, at_tie = 0;
  for (int v = 0; v < 10000; ++v) {
    const float c = centre(rng), w = spread(rng);
    std::uniform_real_distribution<float> val(c - w, c + w);
    std::vector<float> x(len(rng));
    for (auto& e : x) e = val(rng);
    for (int bits : {4, 8, 12, 16}) {
      const QuantizedTensor q = quantize(x, bits);
      const auto y = dequantize(q);
      const double bound = (static_cast<double>(q.max) - q.min) / (2.0 * ((1 << bits) - 1));
      // Rounding slack of a few ulps of the operands; only exact ties get near it.
      const double slack =
          8.0 * std::numeric_limits<double>::epsilon() *
          std::max({std::abs(static_cast<double>(q.min)), std::abs(static_cast<double>(q.max)), 1.0});
      for (std::size_t i = 0; i < x.size(); ++i) {
        ++checked;
        const double err = std::abs(static_cast<double>(x[i]) - y[i]);
        violations += err > bound + slack;
        at_tie += err > bound && err <= bound + slack;
      }
    }
  }
  report(7, violations == 0, fmt("%ld element checks, %ld violations (%ld exact ties within rounding slack)", checked,
             violations, at_tie));
}

void reward_algebra() {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  long bad = 0;
  for (int i = 0; i < 10000; ++i) {
    RewardParams p;
    p.s_bps = 1e3 + 1e7 * u(rng);
    p.b_max_bps = 1e4 + 1e8 * u(rng);
    p.t_ref_ms = 1.0 + 1000.0 * u(rng);
    p.energy_budget_j = 0.01 + 5.0 * u(rng);
    RewardConfig c;
    c.s_bps = p.s_bps;
    c.b_max_bps = p.b_max_bps;
    c.n = 1.0 / std::log1p(c.b_max_bps / c.s_bps);
    c.n_from_b_max = true;
    c.t_ref_ms = *p.t_ref_ms;
    c.energy_budget_j = *p.energy_budget_j;
    const double bw = 1.5 * c.b_max_bps * u(rng);
    bad += c.a(bw) + c.b(bw) != 1.0;
    bad += c.a(0.0) != 0.0;
    bad += c.a(c.b_max_bps) != 1.0;

    EvalResult r;
    r.total_latency_ms = 1.0 + 1000.0 * u(rng);
    r.accuracy = u(rng);
    r.total_energy_j = c.energy_budget_j * (1.0 + 1e-9 + u(rng));
    bad += reward(r, bw, c) != 0.0;
  }
  report(8, bad == 0, fmt("10000 random configs, %ld failed assertions", bad));
}

void decision_latency(const Trained& t) {
  const Environment probe(t.model, t.env);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> ms;
  std::size_t sink = 0;
  for (int i = 0; i < 1000; ++i) {
    const Observation obs = normalize_state(probe.reference_state(1e7 * u(rng)), probe.reward_config());
    const auto t0 = Clock::now();
    sink += t.agent->act(obs, ActMode::kGreedy, rng);
    ms.push_back(1e3 * seconds_since(t0));
  }
  std::nth_element(ms.begin(), ms.begin() + 500, ms.end());
  const double median = ms[500];
  report(9, median < 5.0 && sink > 0, fmt("median greedy act over 1000 calls: %.4f ms", median));
}

void codec() {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<std::size_t> len(1, 500);
  std::uniform_int_distribution<std::uint32_t> alpha(1, 300);
  int ok = 0, degenerate = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::uint32_t> s(len(rng));
    if (trial % 10 == 0) {
      std::fill(s.begin(), s.end(), static_cast<std::uint32_t>(trial));
      ++degenerate;
    } else {
      std::uniform_int_distribution<std::uint32_t> sym(0, alpha(rng) - 1);
      for (auto& v : s) v = sym(rng);
    }
    ok += huffman_decode(huffman_encode(s)) == s;
  }
  report(10, ok == 1000, fmt("%d/1000 sequences round-tripped (%d single-symbol)", ok, degenerate));
}

}  // namespace

int main() {
  try {
    gradients();
    oracle_equivalence();
    const Trained t = convergence();
    decision_trend(t);
    speedup(t);
    compression();
    quant_bound();
    reward_algebra();
    decision_latency(t);
    codec();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
