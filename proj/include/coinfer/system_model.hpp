#pragma once

#include <compare>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "coinfer/profile.hpp"
#include "coinfer/quantization.hpp"

namespace coinfer {

// Decision triple: exit point, partition point, quantization bits.
// pp = k runs layers 1..k on the device; pp = 0 sends the raw input.
struct Action {
  int ep = 1;
  int pp = 0;
  int bits = 8;

  auto operator<=>(const Action&) const = default;
};

std::string to_string(const Action& a);

enum class ChannelMode { kRawRate, kShannon };

std::string_view to_string(ChannelMode mode);
ChannelMode parse_channel_mode(std::string_view name);

struct ChannelConfig {
  ChannelMode mode = ChannelMode::kRawRate;
  double bandwidth_bps = 0.0;  // bytes per second
  double tx_power_w = 0.5;
  double sinr = 1.0;

  // Bytes per second actually achieved on the link.
  double rate() const;
};

ChannelConfig make_channel(const DeviceProfile& device, double bandwidth_bps,
                           ChannelMode mode = ChannelMode::kRawRate);

struct EvalResult {
  double device_latency_ms = 0.0;
  double transmission_latency_ms = 0.0;
  double edge_latency_ms = 0.0;
  double total_latency_ms = 0.0;
  double compute_energy_j = 0.0;
  double transmission_energy_j = 0.0;
  double total_energy_j = 0.0;
  double accuracy = 0.0;
  double transmitted_bytes = 0.0;
};

class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SystemOptions {
  std::vector<int> bits_set{8, 12, 16};
  bool quantize_raw_input = false;
  QuantOptions quant;
  // Synthetic feature maps used to estimate compressed sizes.
  std::uint64_t synthetic_seed = 20220101;
  // Larger feature maps are estimated from a sample of this many elements and
  // the payload scaled up; the codebook overhead is not scaled.
  std::size_t max_sample_elements = 1u << 16;
};

// Deterministic evaluator over one immutable profile. Transmitted sizes for
// every (layer, bits) cell are computed once at construction.
class SystemModel {
 public:
  explicit SystemModel(ModelProfile profile, SystemOptions options = {});

  const ModelProfile& profile() const { return profile_; }
  const SystemOptions& options() const { return options_; }
  std::span<const int> bits_set() const { return options_.bits_set; }

  bool is_valid(const Action& a) const;
  // Bytes sent over the link for the action (0 when fully on-device).
  double transmitted_bytes(const Action& a) const;
  double compressed_layer_bytes(int layer, int bits) const;
  double accuracy(const Action& a) const;

  // Throws EvaluationError for an invalid action or a zero-rate channel that
  // would have to carry data.
  EvalResult evaluate(const Action& a, const ChannelConfig& channel) const;
  bool feasible(const Action& a, const ChannelConfig& channel) const;

  std::vector<Action> enumerate_actions() const;

  // Fully local run of the deepest exit.
  Action on_device_action() const;
  double on_device_latency_ms() const;
  double on_device_energy_j() const;

 private:
  ModelProfile profile_;
  SystemOptions options_;
  // (layer, bits) -> bytes, layer 0 being the raw input when quantized.
  std::map<std::pair<int, int>, double> compressed_;
  std::vector<double> device_prefix_ms_;
  std::vector<double> edge_prefix_ms_;
  std::vector<double> energy_prefix_j_;
};

// All (ep, pp, c) with pp <= layer_count(ep), ordered by ep, then pp, then c.
std::vector<Action> enumerate_actions(const ModelProfile& profile, std::span<const int> bits_set);

struct ParetoPoint {
  Action action;
  EvalResult result;
};

// Actions not dominated in (latency lower, accuracy higher, energy lower).
// Infeasible actions are skipped.
std::vector<ParetoPoint> pareto_front(const SystemModel& model, const ChannelConfig& channel);

}  // namespace coinfer
