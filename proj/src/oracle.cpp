#include "coinfer/oracle.hpp"

namespace coinfer {

OracleDecision oracle_best(const SystemModel& model, const ChannelConfig& channel,
                           const RewardConfig& reward_config) {
  OracleDecision best;
  bool found = false;
  for (const Action& a : model.enumerate_actions()) {
    if (!model.feasible(a, channel)) continue;
    const EvalResult r = model.evaluate(a, channel);
    const double value = reward(r, channel.bandwidth_bps, reward_config);
    if (!found || value > best.reward) {
      best = {a, value, r};
      found = true;
    }
  }
  // Fully on-device actions are always feasible, so found is always true.
  return best;
}

}  // namespace coinfer
