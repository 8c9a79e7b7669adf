#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace coinfer {

class HuffmanError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One canonical codeword. `bits` holds the code right-aligned, MSB first.
struct CodeWord {
  std::uint32_t symbol = 0;
  std::uint8_t length = 0;
  std::uint64_t bits = 0;

  std::string to_string() const;  // e.g. "0110"
  bool operator==(const CodeWord&) const = default;
};

struct HuffmanCode {
  // Sorted by (length, symbol); codes are assigned canonically from the lengths.
  std::vector<CodeWord> codebook;
  // Packed bitstream, MSB of each byte first.
  std::vector<std::uint8_t> payload;
  std::size_t bit_length = 0;
  std::size_t original_length = 0;
};

// Builds an optimal prefix code from the symbol frequencies and encodes the
// sequence. A single-symbol alphabet gets the 1-bit code "0".
HuffmanCode huffman_encode(std::span<const std::uint32_t> symbols);

// Throws HuffmanError on a malformed codebook or a corrupted bitstream.
std::vector<std::uint32_t> huffman_decode(const HuffmanCode& code);

// Code lengths only, keyed by position in the returned symbol list.
struct CodeLengths {
  std::vector<std::uint32_t> symbols;
  std::vector<std::uint8_t> lengths;
};
CodeLengths huffman_code_lengths(std::span<const std::uint32_t> symbols);

}  // namespace coinfer
