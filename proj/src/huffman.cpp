#include "coinfer/huffman.hpp"

#include <algorithm>
#include <queue>
#include <unordered_map>

namespace coinfer {

namespace {

constexpr int kMaxCodeLength = 64;

struct Node {
  std::uint64_t weight;
  std::uint64_t order;  // creation order, breaks weight ties deterministically
  int left;
  int right;
  int leaf;  // index into the alphabet, -1 for internal nodes
};

struct NodeGreater {
  const std::vector<Node>* nodes;
  bool operator()(int a, int b) const {
    const Node& na = (*nodes)[a];
    const Node& nb = (*nodes)[b];
    if (na.weight != nb.weight) return na.weight > nb.weight;
    return na.order > nb.order;
  }
};

std::vector<CodeWord> canonical_codebook(const CodeLengths& lengths) {
  std::vector<CodeWord> book(lengths.symbols.size());
  for (std::size_t i = 0; i < book.size(); ++i) {
    book[i].symbol = lengths.symbols[i];
    book[i].length = lengths.lengths[i];
  }
  std::sort(book.begin(), book.end(), [](const CodeWord& a, const CodeWord& b) {
    return a.length != b.length ? a.length < b.length : a.symbol < b.symbol;
  });
  std::uint64_t code = 0;
  std::uint8_t prev_len = book.empty() ? 0 : book.front().length;
  for (std::size_t i = 0; i < book.size(); ++i) {
    if (i > 0) {
      code = (code + 1) << (book[i].length - prev_len);
    }
    book[i].bits = code;
    prev_len = book[i].length;
  }
  return book;
}

// Decoding tables for a canonical code.
struct DecodeTable {
  std::vector<std::uint64_t> first_code;   // per length
  std::vector<std::size_t> first_index;    // per length
  std::vector<std::size_t> count;          // per length
  int max_length = 0;
};

DecodeTable build_decode_table(const std::vector<CodeWord>& book) {
  if (book.empty()) throw HuffmanError("empty codebook");
  DecodeTable t;
  t.max_length = book.back().length;
  t.first_code.assign(t.max_length + 1, 0);
  t.first_index.assign(t.max_length + 1, 0);
  t.count.assign(t.max_length + 1, 0);

  // The codebook must be exactly the canonical assignment of its own lengths.
  CodeLengths lengths;
  for (std::size_t i = 0; i < book.size(); ++i) {
    const auto& cw = book[i];
    if (cw.length == 0 || cw.length > kMaxCodeLength) {
      throw HuffmanError("codebook entry has invalid length");
    }
    if (i > 0) {
      const auto& prev = book[i - 1];
      if (cw.length < prev.length || (cw.length == prev.length && cw.symbol <= prev.symbol)) {
        throw HuffmanError("codebook is not in canonical order");
      }
    }
    lengths.symbols.push_back(cw.symbol);
    lengths.lengths.push_back(cw.length);
  }
  const auto expected = canonical_codebook(lengths);
  // Kraft sum must not exceed 1; checked via overflow of the canonical code.
  for (std::size_t i = 0; i < book.size(); ++i) {
    if (expected[i].bits != book[i].bits) throw HuffmanError("codebook is not canonical");
    if (book[i].length < 64 && (book[i].bits >> book[i].length) != 0) {
      throw HuffmanError("codebook violates the prefix condition");
    }
  }
  for (std::size_t i = 0; i < book.size(); ++i) {
    const int len = book[i].length;
    if (t.count[len] == 0) {
      t.first_code[len] = book[i].bits;
      t.first_index[len] = i;
    }
    ++t.count[len];
  }
  return t;
}

}  // namespace

std::string CodeWord::to_string() const {
  std::string s(length, '0');
  for (int i = 0; i < length; ++i) {
    if ((bits >> (length - 1 - i)) & 1u) s[i] = '1';
  }
  return s;
}

CodeLengths huffman_code_lengths(std::span<const std::uint32_t> symbols) {
  if (symbols.empty()) throw HuffmanError("cannot build a code for an empty sequence");

  std::unordered_map<std::uint32_t, std::uint64_t> freq;
  for (auto s : symbols) ++freq[s];

  CodeLengths out;
  out.symbols.reserve(freq.size());
  for (const auto& kv : freq) out.symbols.push_back(kv.first);
  std::sort(out.symbols.begin(), out.symbols.end());
  out.lengths.assign(out.symbols.size(), 0);

  if (out.symbols.size() == 1) {
    out.lengths[0] = 1;
    return out;
  }

  std::vector<Node> nodes;
  nodes.reserve(2 * out.symbols.size());
  std::priority_queue<int, std::vector<int>, NodeGreater> heap(NodeGreater{&nodes});
  for (std::size_t i = 0; i < out.symbols.size(); ++i) {
    nodes.push_back({freq[out.symbols[i]], nodes.size(), -1, -1, static_cast<int>(i)});
    heap.push(static_cast<int>(i));
  }
  while (heap.size() > 1) {
    const int a = heap.top();
    heap.pop();
    const int b = heap.top();
    heap.pop();
    nodes.push_back({nodes[a].weight + nodes[b].weight, nodes.size(), a, b, -1});
    heap.push(static_cast<int>(nodes.size() - 1));
  }

  // Iterative depth assignment.
  std::vector<std::pair<int, int>> stack{{heap.top(), 0}};
  while (!stack.empty()) {
    const auto [idx, depth] = stack.back();
    stack.pop_back();
    const Node& n = nodes[idx];
    if (n.leaf >= 0) {
      if (depth > kMaxCodeLength) throw HuffmanError("code length exceeds 64 bits");
      out.lengths[n.leaf] = static_cast<std::uint8_t>(depth);
    } else {
      stack.push_back({n.left, depth + 1});
      stack.push_back({n.right, depth + 1});
    }
  }
  return out;
}

HuffmanCode huffman_encode(std::span<const std::uint32_t> symbols) {
  HuffmanCode code;
  code.codebook = canonical_codebook(huffman_code_lengths(symbols));
  code.original_length = symbols.size();

  std::unordered_map<std::uint32_t, std::size_t> index;
  index.reserve(code.codebook.size());
  std::size_t total_bits = 0;
  for (std::size_t i = 0; i < code.codebook.size(); ++i) index[code.codebook[i].symbol] = i;
  for (auto s : symbols) total_bits += code.codebook[index[s]].length;

  code.bit_length = total_bits;
  code.payload.assign((total_bits + 7) / 8, 0);
  std::size_t pos = 0;
  for (auto s : symbols) {
    const CodeWord& cw = code.codebook[index[s]];
    for (int i = cw.length - 1; i >= 0; --i, ++pos) {
      if ((cw.bits >> i) & 1u) code.payload[pos >> 3] |= static_cast<std::uint8_t>(0x80u >> (pos & 7));
    }
  }
  return code;
}

std::vector<std::uint32_t> huffman_decode(const HuffmanCode& code) {
  const DecodeTable table = build_decode_table(code.codebook);
  if (code.payload.size() != (code.bit_length + 7) / 8) {
    throw HuffmanError("payload size does not match the declared bit length");
  }

  // Every codeword is at least one bit long.
  if (code.original_length > code.bit_length) {
    throw HuffmanError("declared length exceeds what the bitstream can hold");
  }
  std::vector<std::uint32_t> out;
  out.reserve(code.original_length);
  std::size_t pos = 0;
  while (out.size() < code.original_length) {
    std::uint64_t value = 0;
    int len = 0;
    for (;;) {
      if (pos >= code.bit_length) throw HuffmanError("bitstream ends inside a codeword");
      const unsigned bit = (code.payload[pos >> 3] >> (7 - (pos & 7))) & 1u;
      ++pos;
      value = (value << 1) | bit;
      ++len;
      if (len > table.max_length) throw HuffmanError("invalid codeword in bitstream");
      if (table.count[len] != 0 && value >= table.first_code[len] &&
          value - table.first_code[len] < table.count[len]) {
        out.push_back(code.codebook[table.first_index[len] + (value - table.first_code[len])].symbol);
        break;
      }
    }
  }
  if (pos != code.bit_length) throw HuffmanError("trailing bits after the last symbol");
  return out;
}

}  // namespace coinfer
