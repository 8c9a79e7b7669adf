#include "coinfer/profile.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>

namespace coinfer {

namespace {

constexpr std::array<std::pair<LayerKind, std::string_view>, 6> kKindNames{{
    {LayerKind::kConvolution, "convolution"},
    {LayerKind::kFullyConnected, "fully_connected"},
    {LayerKind::kActivation, "activation"},
    {LayerKind::kPooling, "pooling"},
    {LayerKind::kNormalization, "normalization"},
    {LayerKind::kOther, "other"},
}};

bool finite_non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

std::string layer_field(std::size_t i, std::string_view field) {
  std::ostringstream os;
  os << "layers[" << i << "]." << field;
  return os.str();
}

using json = nlohmann::json;

double get_number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) {
    throw ProfileError(ProfileError::Kind::kParse,
                       "missing field '" + std::string(key) + "' in " + where);
  }
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ProfileError(ProfileError::Kind::kParse,
                       "field '" + std::string(key) + "' in " + where + " is not a number");
  }
  return v.get<double>();
}

int get_int(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key) || !obj.at(key).is_number_integer()) {
    throw ProfileError(ProfileError::Kind::kParse,
                       "field '" + std::string(key) + "' in " + where + " must be an integer");
  }
  return obj.at(key).get<int>();
}

// Budget is either a number or null/"unbounded".
double parse_budget(const json& v) {
  if (v.is_null()) return std::numeric_limits<double>::infinity();
  if (v.is_string() && v.get<std::string>() == "unbounded") {
    return std::numeric_limits<double>::infinity();
  }
  if (v.is_number()) return v.get<double>();
  throw ProfileError(ProfileError::Kind::kParse,
                     "device.energy_budget_j must be a number, null or \"unbounded\"");
}

void expand_kind_defaults(const json& defaults, ModelProfile& profile,
                          const QuantAccuracyTable& explicit_entries) {
  // kind name -> (bits -> drop); the pseudo-kind "input" covers layer 0.
  std::map<std::string, std::map<int, double>> by_kind;
  for (auto it = defaults.begin(); it != defaults.end(); ++it) {
    if (it.key() != "input" && !parse_layer_kind(it.key())) {
      throw ProfileError(ProfileError::Kind::kParse,
                         "quant_accuracy.kind_defaults: unknown layer kind '" + it.key() + "'");
    }
    if (!it.value().is_object()) {
      throw ProfileError(ProfileError::Kind::kParse,
                         "quant_accuracy.kind_defaults." + it.key() + " must be an object");
    }
    for (auto b = it.value().begin(); b != it.value().end(); ++b) {
      int bits = 0;
      try {
        std::size_t used = 0;
        bits = std::stoi(b.key(), &used);
        if (used != b.key().size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ProfileError(ProfileError::Kind::kParse,
                           "quant_accuracy.kind_defaults." + it.key() + ": bad bits key '" +
                               b.key() + "'");
      }
      if (!b.value().is_number()) {
        throw ProfileError(ProfileError::Kind::kParse,
                           "quant_accuracy.kind_defaults." + it.key() + "." + b.key() +
                               " is not a number");
      }
      by_kind[it.key()][bits] = b.value().get<double>();
    }
  }

  const auto& layers = profile.topology.layers;
  for (const auto& exit : profile.topology.exits) {
    const int last = std::min<int>(exit.layer_count, static_cast<int>(layers.size()));
    for (int layer = 0; layer < last; ++layer) {
      const std::string kind =
          layer == 0 ? "input" : std::string(to_string(layers[layer - 1].kind));
      auto found = by_kind.find(kind);
      if (found == by_kind.end()) continue;
      for (const auto& [bits, drop] : found->second) {
        if (!explicit_entries.contains(exit.id, layer, bits)) {
          profile.quant_accuracy.set(exit.id, layer, bits, drop);
        }
      }
    }
  }
}

}  // namespace

std::string_view to_string(LayerKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "other";
}

std::optional<LayerKind> parse_layer_kind(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  return std::nullopt;
}

double LayerProfile::effective_sparsity() const {
  if (sparsity) return *sparsity;
  return kind == LayerKind::kActivation ? 0.9 : 0.0;
}

const ExitBranch& BranchTopology::exit(int exit_id) const {
  for (const auto& e : exits) {
    if (e.id == exit_id) return e;
  }
  throw std::out_of_range("unknown exit id " + std::to_string(exit_id));
}

int BranchTopology::max_layer_count() const {
  int best = 0;
  for (const auto& e : exits) best = std::max(best, e.layer_count);
  return best;
}

void QuantAccuracyTable::set(int exit_id, int layer, int bits, double drop) {
  drops_[{exit_id, layer, bits}] = drop;
}

std::optional<double> QuantAccuracyTable::lookup(int exit_id, int layer, int bits) const {
  auto it = drops_.find({exit_id, layer, bits});
  if (it == drops_.end()) return std::nullopt;
  return it->second;
}

bool QuantAccuracyTable::contains(int exit_id, int layer, int bits) const {
  return drops_.count({exit_id, layer, bits}) != 0;
}

std::string format_violations(const std::vector<Violation>& violations) {
  std::ostringstream os;
  for (std::size_t i = 0; i < violations.size(); ++i) {
    if (i) os << "; ";
    os << violations[i].field << ": " << violations[i].message;
  }
  return os.str();
}

std::vector<Violation> validate_profile(const ModelProfile& profile) {
  std::vector<Violation> out;
  auto flag = [&out](std::string field, std::string message) {
    out.push_back({std::move(field), std::move(message)});
  };

  const auto& topo = profile.topology;
  const int n_layers = static_cast<int>(topo.layers.size());

  if (!finite_non_negative(topo.input_bytes)) {
    flag("input_bytes", "must be finite and non-negative");
  }
  if (topo.layers.empty()) flag("layers", "layer list is empty");
  for (std::size_t i = 0; i < topo.layers.size(); ++i) {
    const auto& l = topo.layers[i];
    if (l.name.empty()) flag(layer_field(i, "name"), "must not be empty");
    const std::pair<const char*, double> numeric[] = {
        {"device_latency_ms", l.device_latency_ms},
        {"edge_latency_ms", l.edge_latency_ms},
        {"output_bytes", l.output_bytes},
        {"intensity", l.intensity},
        {"processed_bytes", l.processed_bytes},
    };
    for (const auto& [field, value] : numeric) {
      if (!finite_non_negative(value)) {
        flag(layer_field(i, field), "must be finite and non-negative");
      }
    }
    if (l.sparsity && !(*l.sparsity >= 0.0 && *l.sparsity <= 1.0)) {
      flag(layer_field(i, "sparsity"), "must lie in [0, 1]");
    }
  }

  if (topo.exits.empty()) flag("exits", "no exits defined");
  for (std::size_t k = 0; k < topo.exits.size(); ++k) {
    const auto& e = topo.exits[k];
    const std::string where = "exits[" + std::to_string(k) + "]";
    if (e.id != static_cast<int>(k) + 1) {
      flag(where + ".id", "exit ids must be 1, 2, ... in order");
    }
    if (e.layer_count < 1) flag(where + ".layer_count", "must be at least 1");
    if (e.layer_count > n_layers) {
      flag(where + ".layer_count", "exceeds the number of layers");
    }
    if (!(e.accuracy >= 0.0 && e.accuracy <= 1.0)) {
      flag(where + ".accuracy", "must lie in [0, 1]");
    }
    if (k > 0) {
      const auto& prev = topo.exits[k - 1];
      if (e.layer_count <= prev.layer_count) {
        flag(where + ".layer_count", "exit layer_counts not strictly increasing");
      }
      if (!(e.accuracy > prev.accuracy)) {
        flag(where + ".accuracy", "exit accuracies not strictly increasing");
      }
    }
  }
  if (!topo.exits.empty() && topo.exits.back().layer_count != n_layers) {
    flag("exits", "last exit layer_count must equal the number of layers");
  }

  // Quantization table: ranges per cell, then monotonicity per (exit, layer).
  std::map<std::pair<int, int>, std::vector<std::pair<int, double>>> by_cell;
  for (const auto& [key, drop] : profile.quant_accuracy.entries()) {
    const auto [exit_id, layer, bits] = key;
    std::ostringstream where;
    where << "quant_accuracy[exit=" << exit_id << ",layer=" << layer << ",bits=" << bits << "]";
    const ExitBranch* exit = nullptr;
    for (const auto& e : topo.exits) {
      if (e.id == exit_id) exit = &e;
    }
    if (!exit) {
      flag(where.str(), "refers to an unknown exit");
    } else if (layer < 0 || layer > exit->layer_count) {
      flag(where.str(), "layer index outside the exit's branch");
    }
    if (bits < 1) flag(where.str(), "bits must be positive");
    if (!(drop >= 0.0 && drop <= 1.0)) {
      flag(where.str(), "accuracy_drop must lie in [0, 1]");
    } else if (exit && drop > exit->accuracy) {
      flag(where.str(), "accuracy_drop exceeds the exit accuracy");
    }
    by_cell[{exit_id, layer}].push_back({bits, drop});
  }
  for (const auto& [cell, series] : by_cell) {
    // std::map iteration already orders the series by bits.
    for (std::size_t i = 1; i < series.size(); ++i) {
      if (series[i].second > series[i - 1].second) {
        std::ostringstream where;
        where << "quant_accuracy[exit=" << cell.first << ",layer=" << cell.second
              << ",bits=" << series[i].first << "]";
        flag(where.str(), "accuracy_drop increases with bits (was " +
                              std::to_string(series[i - 1].second) + " at " +
                              std::to_string(series[i - 1].first) + " bits)");
      }
    }
  }

  const auto& d = profile.device;
  if (!(std::isfinite(d.k0) && d.k0 > 0.0)) flag("device.k0", "must be finite and > 0");
  if (!(std::isfinite(d.cpu_hz) && d.cpu_hz > 0.0)) flag("device.cpu_hz", "must be finite and > 0");
  if (!(std::isfinite(d.tx_power_w) && d.tx_power_w > 0.0)) {
    flag("device.tx_power_w", "must be finite and > 0");
  }
  if (!finite_non_negative(d.sinr)) flag("device.sinr", "must be finite and non-negative");
  if (std::isnan(d.energy_budget_j) || d.energy_budget_j <= 0.0) {
    flag("device.energy_budget_j", "must be positive or unbounded");
  }

  for (const auto& [key, bytes] : profile.compressed_bytes) {
    std::ostringstream where;
    where << "compressed_bytes[layer=" << key.first << ",bits=" << key.second << "]";
    if (key.first < 0 || key.first > n_layers) flag(where.str(), "layer index out of range");
    if (key.second < 1) flag(where.str(), "bits must be positive");
    if (!finite_non_negative(bytes)) flag(where.str(), "must be finite and non-negative");
  }
  return out;
}

ModelProfile profile_from_json(const json& doc) {
  if (!doc.is_object()) {
    throw ProfileError(ProfileError::Kind::kParse, "profile must be a JSON object");
  }
  if (!doc.contains("version") || !doc.at("version").is_number_integer()) {
    throw ProfileError(ProfileError::Kind::kParse, "missing integer 'version' field");
  }
  const int version = doc.at("version").get<int>();
  if (version != kProfileFormatVersion) {
    throw ProfileError(ProfileError::Kind::kParse,
                       "unsupported profile version " + std::to_string(version));
  }

  ModelProfile p;
  p.name = doc.value("name", std::string{});
  p.topology.input_bytes = get_number(doc, "input_bytes", "profile");

  if (!doc.contains("layers") || !doc.at("layers").is_array()) {
    throw ProfileError(ProfileError::Kind::kParse, "'layers' must be an array");
  }
  std::size_t i = 0;
  for (const auto& jl : doc.at("layers")) {
    const std::string where = "layers[" + std::to_string(i++) + "]";
    if (!jl.is_object()) throw ProfileError(ProfileError::Kind::kParse, where + " is not an object");
    LayerProfile l;
    l.name = jl.value("name", std::string{});
    const std::string kind = jl.value("kind", std::string{});
    auto parsed = parse_layer_kind(kind);
    if (!parsed) {
      throw ProfileError(ProfileError::Kind::kParse,
                         where + ".kind: unknown layer kind '" + kind + "'");
    }
    l.kind = *parsed;
    l.device_latency_ms = get_number(jl, "device_latency_ms", where);
    l.edge_latency_ms = get_number(jl, "edge_latency_ms", where);
    l.output_bytes = get_number(jl, "output_bytes", where);
    l.intensity = get_number(jl, "intensity", where);
    l.processed_bytes = get_number(jl, "processed_bytes", where);
    if (jl.contains("sparsity") && !jl.at("sparsity").is_null()) {
      l.sparsity = get_number(jl, "sparsity", where);
    }
    p.topology.layers.push_back(std::move(l));
  }

  if (!doc.contains("exits") || !doc.at("exits").is_array()) {
    throw ProfileError(ProfileError::Kind::kParse, "'exits' must be an array");
  }
  i = 0;
  for (const auto& je : doc.at("exits")) {
    const std::string where = "exits[" + std::to_string(i++) + "]";
    p.topology.exits.push_back({get_int(je, "id", where), get_int(je, "layer_count", where),
                                get_number(je, "accuracy", where)});
  }

  if (doc.contains("device")) {
    const json& jd = doc.at("device");
    p.device.k0 = get_number(jd, "k0", "device");
    p.device.cpu_hz = get_number(jd, "cpu_hz", "device");
    p.device.tx_power_w = get_number(jd, "tx_power_w", "device");
    p.device.sinr = get_number(jd, "sinr", "device");
    if (jd.contains("energy_budget_j")) p.device.energy_budget_j = parse_budget(jd.at("energy_budget_j"));
  } else {
    throw ProfileError(ProfileError::Kind::kParse, "missing 'device' block");
  }

  if (doc.contains("quant_accuracy")) {
    const json& jq = doc.at("quant_accuracy");
    QuantAccuracyTable explicit_entries;
    if (jq.contains("entries")) {
      std::size_t k = 0;
      for (const auto& je : jq.at("entries")) {
        const std::string where = "quant_accuracy.entries[" + std::to_string(k++) + "]";
        explicit_entries.set(get_int(je, "exit", where), get_int(je, "layer", where),
                             get_int(je, "bits", where), get_number(je, "drop", where));
      }
    }
    p.quant_accuracy = explicit_entries;
    if (jq.contains("kind_defaults")) {
      expand_kind_defaults(jq.at("kind_defaults"), p, explicit_entries);
    }
  }

  if (doc.contains("compressed_bytes")) {
    std::size_t k = 0;
    for (const auto& jc : doc.at("compressed_bytes")) {
      const std::string where = "compressed_bytes[" + std::to_string(k++) + "]";
      p.compressed_bytes[{get_int(jc, "layer", where), get_int(jc, "bits", where)}] =
          get_number(jc, "bytes", where);
    }
  }

  auto violations = validate_profile(p);
  if (!violations.empty()) {
    throw ProfileError(ProfileError::Kind::kValidation,
                       "invalid profile: " + format_violations(violations),
                       std::move(violations));
  }
  return p;
}

json profile_to_json(const ModelProfile& p) {
  json doc;
  doc["version"] = kProfileFormatVersion;
  doc["name"] = p.name;
  doc["input_bytes"] = p.topology.input_bytes;
  doc["layers"] = json::array();
  for (const auto& l : p.topology.layers) {
    json jl = {
        {"name", l.name},
        {"kind", std::string(to_string(l.kind))},
        {"device_latency_ms", l.device_latency_ms},
        {"edge_latency_ms", l.edge_latency_ms},
        {"output_bytes", l.output_bytes},
        {"intensity", l.intensity},
        {"processed_bytes", l.processed_bytes},
    };
    if (l.sparsity) jl["sparsity"] = *l.sparsity;
    doc["layers"].push_back(std::move(jl));
  }
  doc["exits"] = json::array();
  for (const auto& e : p.topology.exits) {
    doc["exits"].push_back({{"id", e.id}, {"layer_count", e.layer_count}, {"accuracy", e.accuracy}});
  }
  doc["device"] = {
      {"k0", p.device.k0},
      {"cpu_hz", p.device.cpu_hz},
      {"tx_power_w", p.device.tx_power_w},
      {"sinr", p.device.sinr},
  };
  if (std::isinf(p.device.energy_budget_j)) {
    doc["device"]["energy_budget_j"] = nullptr;
  } else {
    doc["device"]["energy_budget_j"] = p.device.energy_budget_j;
  }
  json entries = json::array();
  for (const auto& [key, drop] : p.quant_accuracy.entries()) {
    const auto [exit_id, layer, bits] = key;
    entries.push_back({{"exit", exit_id}, {"layer", layer}, {"bits", bits}, {"drop", drop}});
  }
  doc["quant_accuracy"] = {{"entries", std::move(entries)}};
  if (!p.compressed_bytes.empty()) {
    json cb = json::array();
    for (const auto& [key, bytes] : p.compressed_bytes) {
      cb.push_back({{"layer", key.first}, {"bits", key.second}, {"bytes", bytes}});
    }
    doc["compressed_bytes"] = std::move(cb);
  }
  return doc;
}

ModelProfile load_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ProfileError(ProfileError::Kind::kIo, "cannot open profile '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ProfileError(ProfileError::Kind::kParse,
                       "malformed profile '" + path.string() + "': " + e.what());
  }
  try {
    return profile_from_json(doc);
  } catch (const json::exception& e) {
    throw ProfileError(ProfileError::Kind::kParse,
                       "malformed profile '" + path.string() + "': " + e.what());
  }
}

void save_profile(const ModelProfile& profile, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ProfileError(ProfileError::Kind::kIo, "cannot write '" + path.string() + "'");
  out << profile_to_json(profile).dump(2) << '\n';
}

}  // namespace coinfer
