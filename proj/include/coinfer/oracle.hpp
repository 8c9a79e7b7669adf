#pragma once

#include <cstddef>

#include "coinfer/environment.hpp"

namespace coinfer {

struct OracleDecision {
  Action action;
  double reward = 0.0;
  EvalResult result;
};

// Exhaustive argmax of the reward over every feasible action. Ties go to the
// action that comes first in enumeration order (lowest flattened index).
OracleDecision oracle_best(const SystemModel& model, const ChannelConfig& channel,
                           const RewardConfig& reward_config);

}  // namespace coinfer
