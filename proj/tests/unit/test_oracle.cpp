#include "doctest.h"

#include <random>

#include "brute_force.hpp"
#include "coinfer/oracle.hpp"
#include "test_support.hpp"

using namespace coinfer;

TEST_CASE("oracle agrees with brute force on random toy profiles") {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<int> bits{4, 8, 16};
  for (int trial = 0; trial < 200; ++trial) {
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
    testing::BruteParams q;
    q.bandwidth = bw;
    q.shannon = mode == ChannelMode::kShannon;
    q.s = params.s_bps;
    q.b_max = params.b_max_bps;
    q.t_ref = rc.t_ref_ms;
    q.budget = rc.energy_budget_j;
    const auto want = testing::brute_force_best(p, bits, q);
    REQUIRE(got.action.ep == want.ep);
    REQUIRE(got.action.pp == want.pp);
    REQUIRE(got.action.bits == want.bits);
    REQUIRE(got.reward == doctest::Approx(want.reward).epsilon(1e-12));
  }
}

TEST_CASE("oracle trend on the bundled profile") {
  const SystemModel model(load_profile(testing::bundled_profile_path()));
  const RewardConfig rc = make_reward_config(model, {});
  const auto& dev = model.profile().device;
  for (double bw : {0.0, 1e3, 5e4, 1e5}) {
    const auto d = oracle_best(model, make_channel(dev, bw), rc);
    CHECK(d.action.pp == model.profile().topology.exit(d.action.ep).layer_count);
  }
  for (double bw : {9e6, 1e7}) CHECK(oracle_best(model, make_channel(dev, bw), rc).action.ep == 3);
  int prev_ep = 0;
  for (int i = 0; i <= 10; ++i) {
    const auto d = oracle_best(model, make_channel(dev, i * 1e6), rc);
    CHECK(d.action.ep >= prev_ep);
    prev_ep = d.action.ep;
  }
}

TEST_CASE("ties go to the first action") {
  ModelProfile p = testing::toy_profile();
  p.compressed_bytes[{1, 8}] = 100;
  p.compressed_bytes[{1, 16}] = 100;
  p.compressed_bytes[{2, 8}] = 100;
  p.compressed_bytes[{2, 16}] = 100;
  p.compressed_bytes[{3, 8}] = 100;
  p.compressed_bytes[{3, 16}] = 100;
  // Without quantization loss, the bit widths are indistinguishable.
  const auto drops = p.quant_accuracy.entries();
  for (const auto& [key, drop] : drops) {
    p.quant_accuracy.set(std::get<0>(key), std::get<1>(key), std::get<2>(key), 0.0);
  }
  const SystemModel model(p, {.bits_set = {8, 16}});
  const auto d = oracle_best(model, make_channel(p.device, 1e6), make_reward_config(model, {}));
  CHECK(d.action.bits == 8);
}
