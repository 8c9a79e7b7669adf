#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "coinfer/profile.hpp"

namespace coinfer::testing {

inline std::string bundled_profile_path() { return COINFER_TEST_DATA_DIR "/alexnet_branchy.profile"; }

// Small hand-checkable profile: four layers, exits after layers 2 and 4.
inline ModelProfile toy_profile() {
  ModelProfile p;
  p.name = "toy";
  p.topology.input_bytes = 4000;
  p.topology.layers = {
      {"conv", LayerKind::kConvolution, 10.0, 1.0, 8000, 100.0, 4000, std::nullopt},
      {"relu", LayerKind::kActivation, 2.0, 0.5, 8000, 10.0, 8000, std::nullopt},
      {"pool", LayerKind::kPooling, 3.0, 0.5, 2000, 20.0, 8000, 0.5},
      {"fc", LayerKind::kFullyConnected, 20.0, 2.0, 400, 300.0, 2000, std::nullopt},
  };
  p.topology.exits = {{1, 2, 0.7}, {2, 4, 0.8}};
  for (int exit_id : {1, 2}) {
    const int lc = exit_id == 1 ? 2 : 4;
    for (int layer = 0; layer <= lc; ++layer) {
      p.quant_accuracy.set(exit_id, layer, 8, 0.03);
      p.quant_accuracy.set(exit_id, layer, 16, 0.01);
    }
  }
  p.device = {1e-27, 1.5e9, 0.5, 1.0, std::numeric_limits<double>::infinity()};
  return p;
}

// Random profile with at most `max_layers` layers and 1-2 exits. Every
// (layer, bits) transmitted size is given explicitly so callers can evaluate
// actions without the compression estimator.
inline ModelProfile random_toy_profile(std::mt19937_64& rng, const std::vector<int>& bits,
                                       int max_layers = 3) {
  std::uniform_int_distribution<int> n_layers_dist(1, max_layers);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  ModelProfile p;
  p.name = "random_toy";
  const int n_layers = n_layers_dist(rng);
  p.topology.input_bytes = std::floor(1000.0 + 9e5 * u(rng));
  const LayerKind kinds[] = {LayerKind::kConvolution, LayerKind::kActivation, LayerKind::kPooling,
                             LayerKind::kFullyConnected};
  double processed = p.topology.input_bytes;
  for (int i = 0; i < n_layers; ++i) {
    LayerProfile l;
    l.name = "l" + std::to_string(i + 1);
    l.kind = kinds[i % 4];
    l.device_latency_ms = 1.0 + 200.0 * u(rng);
    l.edge_latency_ms = 0.1 + 10.0 * u(rng);
    l.output_bytes = std::floor(100.0 + 9e5 * u(rng));
    l.intensity = 1.0 + 500.0 * u(rng);
    l.processed_bytes = processed;
    processed = l.output_bytes;
    p.topology.layers.push_back(l);
  }
  const bool two_exits = n_layers >= 2 && u(rng) < 0.5;
  if (two_exits) {
    std::uniform_int_distribution<int> first(1, n_layers - 1);
    const double acc1 = 0.3 + 0.4 * u(rng);
    p.topology.exits = {{1, first(rng), acc1}, {2, n_layers, acc1 + 0.01 + 0.2 * u(rng)}};
  } else {
    p.topology.exits = {{1, n_layers, 0.5 + 0.4 * u(rng)}};
  }
  for (const auto& e : p.topology.exits) {
    for (int layer = 0; layer <= e.layer_count; ++layer) {
      double drop = 0.1 * u(rng);
      for (int b : bits) {  // bits ascending, drops non-increasing
        p.quant_accuracy.set(e.id, layer, b, drop);
        drop *= u(rng);
      }
    }
  }
  for (int layer = 0; layer <= n_layers; ++layer) {
    const double raw = layer == 0 ? p.topology.input_bytes : p.topology.layers[layer - 1].output_bytes;
    for (int b : bits) p.compressed_bytes[{layer, b}] = std::floor(raw * (0.02 + 0.3 * u(rng)) * b / 16.0);
  }
  p.device = {1e-27 * (0.5 + u(rng)), 1e9 * (0.5 + u(rng)), 0.1 + u(rng), 0.5 + u(rng),
              std::numeric_limits<double>::infinity()};
  return p;
}

inline double relative_error(double analytic, double numeric) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-6});
  return std::abs(analytic - numeric) / scale;
}

// Central differences of f over params, perturbing each coordinate in place.
inline std::vector<double> central_differences(std::vector<double>& params,
                                               const std::function<double()>& f,
                                               double h = 1e-5) {
  std::vector<double> out(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double plus = f();
    params[i] = saved - h;
    const double minus = f();
    params[i] = saved;
    out[i] = (plus - minus) / (2.0 * h);
  }
  return out;
}

// Fraction of coordinates whose relative error is within tol. Coordinates
// where both values are below `floor` count as matching.
inline double match_fraction(std::span<const double> analytic, std::span<const double> numeric,
                             double tol, double floor = 1e-7) {
  if (analytic.empty()) return 1.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    if ((std::abs(analytic[i]) < floor && std::abs(numeric[i]) < floor) ||
        relative_error(analytic[i], numeric[i]) <= tol) {
      ++ok;
    }
  }
  return static_cast<double>(ok) / static_cast<double>(analytic.size());
}

}  // namespace coinfer::testing
