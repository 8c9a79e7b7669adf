#include "coinfer/system_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace coinfer {

std::string to_string(const Action& a) {
  std::ostringstream os;
  os << "(ep=" << a.ep << ", pp=" << a.pp << ", c=" << a.bits << ")";
  return os.str();
}

std::string_view to_string(ChannelMode mode) {
  return mode == ChannelMode::kShannon ? "shannon" : "raw_rate";
}

ChannelMode parse_channel_mode(std::string_view name) {
  if (name == "raw_rate") return ChannelMode::kRawRate;
  if (name == "shannon") return ChannelMode::kShannon;
  throw std::invalid_argument("unknown channel mode '" + std::string(name) + "'");
}

double ChannelConfig::rate() const {
  if (mode == ChannelMode::kRawRate) return bandwidth_bps;
  return bandwidth_bps * std::log2(1.0 + tx_power_w * sinr);
}

ChannelConfig make_channel(const DeviceProfile& device, double bandwidth_bps, ChannelMode mode) {
  return {mode, bandwidth_bps, device.tx_power_w, device.sinr};
}

SystemModel::SystemModel(ModelProfile profile, SystemOptions options)
    : profile_(std::move(profile)), options_(std::move(options)) {
  auto violations = validate_profile(profile_);
  if (!violations.empty()) {
    throw ProfileError(ProfileError::Kind::kValidation,
                       "invalid profile: " + format_violations(violations),
                       std::move(violations));
  }
  if (options_.bits_set.empty()) throw std::invalid_argument("bits set is empty");
  for (int bits : options_.bits_set) options_.quant.check_bits(bits);
  {
    auto sorted = options_.bits_set;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw std::invalid_argument("bits set contains duplicates");
    }
  }

  const auto& layers = profile_.topology.layers;
  device_prefix_ms_.assign(layers.size() + 1, 0.0);
  edge_prefix_ms_.assign(layers.size() + 1, 0.0);
  energy_prefix_j_.assign(layers.size() + 1, 0.0);
  const auto& dev = profile_.device;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto& l = layers[i];
    device_prefix_ms_[i + 1] = device_prefix_ms_[i] + l.device_latency_ms;
    edge_prefix_ms_[i + 1] = edge_prefix_ms_[i] + l.edge_latency_ms;
    energy_prefix_j_[i + 1] =
        energy_prefix_j_[i] + dev.k0 * dev.cpu_hz * dev.cpu_hz * l.intensity * l.processed_bytes;
  }

  // Transmitted size of each layer's output at each bit width. The last layer
  // of the deepest exit never transmits, but shorter exits may split there.
  const int first = options_.quantize_raw_input ? 0 : 1;
  for (int layer = first; layer <= static_cast<int>(layers.size()); ++layer) {
    const double raw = layer == 0 ? profile_.topology.input_bytes : layers[layer - 1].output_bytes;
    const double sparsity = layer == 0 ? 0.0 : layers[layer - 1].effective_sparsity();
    const auto n = static_cast<std::size_t>(std::ceil(raw / 4.0));
    for (int bits : options_.bits_set) {
      auto measured = profile_.compressed_bytes.find({layer, bits});
      if (measured != profile_.compressed_bytes.end()) {
        compressed_[{layer, bits}] = measured->second;
        continue;
      }
      if (n == 0) {
        compressed_[{layer, bits}] = 0.0;
        continue;
      }
      const std::size_t sample = std::min(n, options_.max_sample_elements);
      const auto seed = options_.synthetic_seed + 7919u * static_cast<std::uint64_t>(layer);
      const auto data = synthetic_feature_map(sample, sparsity, seed);
      const QuantizedTensor q = quantize(data, bits, options_.quant);
      const CodeLengths lengths = huffman_code_lengths(q.symbols);
      std::vector<std::uint8_t> length_of(q.levels, 0);
      for (std::size_t i = 0; i < lengths.symbols.size(); ++i) {
        length_of[lengths.symbols[i]] = lengths.lengths[i];
      }
      double payload_bits = 0.0;
      for (auto s : q.symbols) payload_bits += length_of[s];
      payload_bits *= static_cast<double>(n) / static_cast<double>(sample);
      compressed_[{layer, bits}] =
          std::ceil(payload_bits / 8.0) +
          static_cast<double>(codebook_overhead_bytes(lengths.symbols.size(), bits));
    }
  }
}

bool SystemModel::is_valid(const Action& a) const {
  const auto& exits = profile_.topology.exits;
  if (a.ep < 1 || a.ep > static_cast<int>(exits.size())) return false;
  if (a.pp < 0 || a.pp > exits[a.ep - 1].layer_count) return false;
  return std::find(options_.bits_set.begin(), options_.bits_set.end(), a.bits) !=
         options_.bits_set.end();
}

double SystemModel::compressed_layer_bytes(int layer, int bits) const {
  auto it = compressed_.find({layer, bits});
  if (it == compressed_.end()) {
    throw EvaluationError("no compressed size for layer " + std::to_string(layer) + " at " +
                          std::to_string(bits) + " bits");
  }
  return it->second;
}

double SystemModel::transmitted_bytes(const Action& a) const {
  const int branch = profile_.topology.exit(a.ep).layer_count;
  if (a.pp == branch) return 0.0;
  if (a.pp == 0 && !options_.quantize_raw_input) return profile_.topology.input_bytes;
  return compressed_layer_bytes(a.pp, a.bits);
}

double SystemModel::accuracy(const Action& a) const {
  return accuracy_after(profile_, a.ep, a.pp, a.bits, options_.quantize_raw_input);
}

bool SystemModel::feasible(const Action& a, const ChannelConfig& channel) const {
  if (!is_valid(a)) return false;
  const double rate = channel.rate();
  return transmitted_bytes(a) == 0.0 || (std::isfinite(rate) && rate > 0.0);
}

EvalResult SystemModel::evaluate(const Action& a, const ChannelConfig& channel) const {
  if (!is_valid(a)) throw EvaluationError("invalid action " + to_string(a));
  const int branch = profile_.topology.exit(a.ep).layer_count;

  EvalResult r;
  r.device_latency_ms = device_prefix_ms_[a.pp];
  r.edge_latency_ms = edge_prefix_ms_[branch] - edge_prefix_ms_[a.pp];
  r.transmitted_bytes = transmitted_bytes(a);
  if (r.transmitted_bytes > 0.0) {
    const double rate = channel.rate();
    if (!(rate > 0.0) || !std::isfinite(rate)) {
      throw EvaluationError("zero link rate cannot carry " + std::to_string(r.transmitted_bytes) +
                            " bytes for " + to_string(a));
    }
    const double seconds = r.transmitted_bytes / rate;
    r.transmission_latency_ms = 1e3 * seconds;
    r.transmission_energy_j = channel.tx_power_w * seconds;
  }
  r.total_latency_ms = r.device_latency_ms + r.transmission_latency_ms + r.edge_latency_ms;
  r.compute_energy_j = energy_prefix_j_[a.pp];
  r.total_energy_j = r.compute_energy_j + r.transmission_energy_j;
  r.accuracy = accuracy(a);
  return r;
}

std::vector<Action> SystemModel::enumerate_actions() const {
  return coinfer::enumerate_actions(profile_, options_.bits_set);
}

Action SystemModel::on_device_action() const {
  const auto& last = profile_.topology.exits.back();
  return {last.id, last.layer_count, options_.bits_set.front()};
}

double SystemModel::on_device_latency_ms() const {
  return device_prefix_ms_[profile_.topology.exits.back().layer_count];
}

double SystemModel::on_device_energy_j() const {
  return energy_prefix_j_[profile_.topology.exits.back().layer_count];
}

std::vector<Action> enumerate_actions(const ModelProfile& profile, std::span<const int> bits_set) {
  if (bits_set.empty()) throw std::invalid_argument("bits set is empty");
  std::vector<Action> out;
  for (const auto& exit : profile.topology.exits) {
    for (int pp = 0; pp <= exit.layer_count; ++pp) {
      for (int bits : bits_set) out.push_back({exit.id, pp, bits});
    }
  }
  return out;
}

std::vector<ParetoPoint> pareto_front(const SystemModel& model, const ChannelConfig& channel) {
  std::vector<ParetoPoint> all;
  for (const auto& a : model.enumerate_actions()) {
    if (!model.feasible(a, channel)) continue;
    all.push_back({a, model.evaluate(a, channel)});
  }
  auto dominates = [](const EvalResult& x, const EvalResult& y) {
    const bool no_worse = x.total_latency_ms <= y.total_latency_ms && x.accuracy >= y.accuracy &&
                          x.total_energy_j <= y.total_energy_j;
    const bool better = x.total_latency_ms < y.total_latency_ms || x.accuracy > y.accuracy ||
                        x.total_energy_j < y.total_energy_j;
    return no_worse && better;
  };

  // Sort by latency so each candidate only needs to be compared with the
  // front built so far plus its latency ties.
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const auto& x = all[i].result;
    const auto& y = all[j].result;
    if (x.total_latency_ms != y.total_latency_ms) return x.total_latency_ms < y.total_latency_ms;
    if (x.accuracy != y.accuracy) return x.accuracy > y.accuracy;
    return x.total_energy_j < y.total_energy_j;
  });
  std::vector<std::size_t> kept;
  for (std::size_t idx : order) {
    bool dominated = false;
    for (std::size_t k : kept) {
      if (dominates(all[k].result, all[idx].result)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) kept.push_back(idx);
  }
  // Report in enumeration order.
  std::sort(kept.begin(), kept.end());
  std::vector<ParetoPoint> front;
  front.reserve(kept.size());
  for (std::size_t k : kept) front.push_back(all[k]);
  return front;
}

}  // namespace coinfer
