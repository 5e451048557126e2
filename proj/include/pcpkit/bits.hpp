#pragma once

#include <cstdint>
#include <vector>

namespace pcpkit {

// One byte per bit; coordinate i of a vector is bit i of its table index.
using Bits = std::vector<std::uint8_t>;

inline std::uint64_t bits_to_index(const Bits& b) {
  std::uint64_t x = 0;
  for (std::size_t i = 0; i < b.size(); ++i)
    if (b[i]) x |= std::uint64_t{1} << i;
  return x;
}

inline Bits index_to_bits(std::uint64_t x, unsigned k) {
  Bits b(k);
  for (unsigned i = 0; i < k; ++i) b[i] = static_cast<std::uint8_t>((x >> i) & 1U);
  return b;
}

inline unsigned parity(std::uint64_t x) { return static_cast<unsigned>(__builtin_parityll(x)); }

}  // namespace pcpkit
