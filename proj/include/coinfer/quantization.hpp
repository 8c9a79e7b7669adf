#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "coinfer/huffman.hpp"
#include "coinfer/profile.hpp"

namespace coinfer {

struct QuantOptions {
  int min_bits = 1;
  int max_bits = 16;
  // Use c + 1 levels instead of 2^c (reads the bit count as a level count).
  bool literal_eq4_levels = false;

  std::uint32_t levels(int bits) const;
  void check_bits(int bits) const;
};

struct QuantizedTensor {
  std::vector<std::uint32_t> symbols;
  float min = 0.0f;
  float max = 0.0f;
  int bits = 0;
  std::uint32_t levels = 0;

  std::size_t size() const { return symbols.size(); }
};

// Min-max quantization to `levels` integer steps. Rounds half away from
// zero; a constant input maps to all-zero symbols.
QuantizedTensor quantize(std::span<const float> x, int bits, const QuantOptions& options = {});

std::vector<double> dequantize(const QuantizedTensor& q);

// Bytes the decoder needs besides the payload: alphabet size (2 bytes) plus,
// per codebook entry, the symbol (ceil(bits/8) bytes) and its code length (1 byte).
std::size_t codebook_overhead_bytes(std::size_t alphabet_size, int bits);

// ceil(payload bits / 8) + codebook overhead.
std::size_t compressed_size(std::span<const float> x, int bits, const QuantOptions& options = {});

// Point mass at zero with probability `sparsity`, half-normal otherwise.
std::vector<float> synthetic_feature_map(std::size_t n, double sparsity, std::uint64_t seed);

class AccuracyLookupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Branch accuracy minus the quantization loss at (exit, pp, bits). No loss
// applies when nothing is transmitted (pp equals the branch length) or when
// the raw input is sent unquantized (pp = 0 and !quantize_raw_input).
double accuracy_after(const ModelProfile& profile, int exit_id, int pp, int bits,
                      bool quantize_raw_input = false);

}  // namespace coinfer
