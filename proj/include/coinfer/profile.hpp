#pragma once

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "json.hpp"

namespace coinfer {

enum class LayerKind {
  kConvolution,
  kFullyConnected,
  kActivation,
  kPooling,
  kNormalization,
  kOther,
};

std::string_view to_string(LayerKind kind);
std::optional<LayerKind> parse_layer_kind(std::string_view name);

struct LayerProfile {
  std::string name;
  LayerKind kind = LayerKind::kOther;
  double device_latency_ms = 0.0;
  double edge_latency_ms = 0.0;
  // Size of the raw fp32 feature map emitted by this layer.
  double output_bytes = 0.0;
  // CPU cycles per processed byte.
  double intensity = 0.0;
  double processed_bytes = 0.0;
  // Fraction of exact zeros in the emitted feature map. Unset means the
  // kind default (0.9 for activations, 0 otherwise).
  std::optional<double> sparsity;

  double effective_sparsity() const;
  bool operator==(const LayerProfile&) const = default;
};

struct ExitBranch {
  int id = 0;
  // Exit k runs the first layer_count layers of the topology.
  int layer_count = 0;
  double accuracy = 0.0;

  bool operator==(const ExitBranch&) const = default;
};

struct BranchTopology {
  // Bytes sent when the whole network runs on the edge (partition point 0).
  double input_bytes = 0.0;
  std::vector<LayerProfile> layers;
  std::vector<ExitBranch> exits;

  const ExitBranch& exit(int exit_id) const;
  int max_layer_count() const;
  bool operator==(const BranchTopology&) const = default;
};

// Accuracy lost when the feature map after `layer` (1-based; 0 is the raw
// input) is quantized to `bits` on the way to exit `exit`.
class QuantAccuracyTable {
 public:
  using Key = std::tuple<int, int, int>;  // (exit, layer, bits)

  void set(int exit_id, int layer, int bits, double drop);
  std::optional<double> lookup(int exit_id, int layer, int bits) const;
  bool contains(int exit_id, int layer, int bits) const;
  const std::map<Key, double>& entries() const { return drops_; }
  std::size_t size() const { return drops_.size(); }

  bool operator==(const QuantAccuracyTable&) const = default;

 private:
  std::map<Key, double> drops_;
};

struct DeviceProfile {
  double k0 = 1e-27;        // J*s^2/cycle
  double cpu_hz = 1.5e9;    // cycles/s
  double tx_power_w = 0.5;  // W
  double sinr = 1.0;
  // Unbounded when infinite.
  double energy_budget_j = std::numeric_limits<double>::infinity();

  bool operator==(const DeviceProfile&) const = default;
};

struct ModelProfile {
  std::string name;
  BranchTopology topology;
  QuantAccuracyTable quant_accuracy;
  DeviceProfile device;
  // Optional measured transmitted sizes keyed by (layer, bits). When present
  // they replace the synthetic compression estimate for that cell.
  std::map<std::pair<int, int>, double> compressed_bytes;

  bool operator==(const ModelProfile&) const = default;
};

struct Violation {
  std::string field;
  std::string message;
};

std::string format_violations(const std::vector<Violation>& violations);

class ProfileError : public std::runtime_error {
 public:
  enum class Kind { kIo, kParse, kValidation };

  ProfileError(Kind kind, const std::string& what,
               std::vector<Violation> violations = {})
      : std::runtime_error(what), kind_(kind), violations_(std::move(violations)) {}

  Kind kind() const { return kind_; }
  const std::vector<Violation>& violations() const { return violations_; }

 private:
  Kind kind_;
  std::vector<Violation> violations_;
};

inline constexpr int kProfileFormatVersion = 1;

// Checks every data-model invariant. Never throws; an empty result means the
// profile is valid.
std::vector<Violation> validate_profile(const ModelProfile& profile);

// Parsing expands per-kind quantization defaults into per-layer entries and
// then validates. Throws ProfileError.
ModelProfile profile_from_json(const nlohmann::json& doc);
nlohmann::json profile_to_json(const ModelProfile& profile);

ModelProfile load_profile(const std::filesystem::path& path);
void save_profile(const ModelProfile& profile, const std::filesystem::path& path);

}  // namespace coinfer
