#include "coinfer/quantization.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace coinfer {

std::uint32_t QuantOptions::levels(int bits) const {
  check_bits(bits);
  if (literal_eq4_levels) return static_cast<std::uint32_t>(bits) + 1u;
  return 1u << bits;
}

void QuantOptions::check_bits(int bits) const {
  if (bits < min_bits || bits > max_bits || bits < 1 || bits > 31) {
    throw std::invalid_argument("quantization bits " + std::to_string(bits) +
                                " outside the allowed range [" + std::to_string(min_bits) +
                                ", " + std::to_string(max_bits) + "]");
  }
}

QuantizedTensor quantize(std::span<const float> x, int bits, const QuantOptions& options) {
  if (x.empty()) throw std::invalid_argument("cannot quantize an empty tensor");
  QuantizedTensor q;
  q.bits = bits;
  q.levels = options.levels(bits);

  float lo = x[0];
  float hi = x[0];
  for (float v : x) {
    if (!std::isfinite(v)) throw std::invalid_argument("cannot quantize non-finite values");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  q.min = lo;
  q.max = hi;
  q.symbols.assign(x.size(), 0);
  if (hi == lo) return q;

  const double top = static_cast<double>(q.levels - 1);
  const double range = static_cast<double>(hi) - static_cast<double>(lo);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = top * (static_cast<double>(x[i]) - lo) / range;
    // std::round is half-away-from-zero; t >= 0 here.
    q.symbols[i] = static_cast<std::uint32_t>(std::clamp(std::round(t), 0.0, top));
  }
  return q;
}

std::vector<double> dequantize(const QuantizedTensor& q) {
  std::vector<double> out(q.symbols.size(), q.min);
  if (q.min == q.max || q.levels < 2) return out;
  const double lo = q.min;
  const double range = static_cast<double>(q.max) - lo;
  const std::uint32_t top = q.levels - 1;
  for (std::size_t i = 0; i < q.symbols.size(); ++i) {
    const std::uint32_t s = q.symbols[i];
    if (s == 0) {
      out[i] = lo;
    } else if (s == top) {
      out[i] = q.max;
    } else {
      out[i] = lo + range * (static_cast<double>(s) / top);
    }
  }
  return out;
}

std::size_t codebook_overhead_bytes(std::size_t alphabet_size, int bits) {
  const std::size_t symbol_bytes = (static_cast<std::size_t>(bits) + 7) / 8;
  return 2 + alphabet_size * (symbol_bytes + 1);
}

std::size_t compressed_size(std::span<const float> x, int bits, const QuantOptions& options) {
  const QuantizedTensor q = quantize(x, bits, options);
  const CodeLengths lengths = huffman_code_lengths(q.symbols);

  // Payload size from the code lengths directly; no need to pack the bits.
  std::vector<std::uint8_t> length_of(q.levels, 0);
  for (std::size_t i = 0; i < lengths.symbols.size(); ++i) {
    length_of[lengths.symbols[i]] = lengths.lengths[i];
  }
  std::size_t payload_bits = 0;
  for (auto s : q.symbols) payload_bits += length_of[s];
  return (payload_bits + 7) / 8 + codebook_overhead_bytes(lengths.symbols.size(), bits);
}

std::vector<float> synthetic_feature_map(std::size_t n, double sparsity, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<float> out(n, 0.0f);
  for (auto& v : out) {
    if (unit(rng) < sparsity) continue;
    v = static_cast<float>(std::abs(normal(rng)));
  }
  return out;
}

double accuracy_after(const ModelProfile& profile, int exit_id, int pp, int bits,
                      bool quantize_raw_input) {
  const ExitBranch& exit = profile.topology.exit(exit_id);
  if (pp < 0 || pp > exit.layer_count) {
    throw std::out_of_range("partition point " + std::to_string(pp) + " outside exit " +
                            std::to_string(exit_id) + " (0.." +
                            std::to_string(exit.layer_count) + ")");
  }
  if (pp == exit.layer_count) return exit.accuracy;
  if (pp == 0 && !quantize_raw_input) return exit.accuracy;
  const auto drop = profile.quant_accuracy.lookup(exit_id, pp, bits);
  if (!drop) {
    throw AccuracyLookupError("no accuracy-drop entry for exit " + std::to_string(exit_id) +
                              ", layer " + std::to_string(pp) + ", " + std::to_string(bits) +
                              " bits");
  }
  return std::max(0.0, exit.accuracy - *drop);
}

}  // namespace coinfer
