#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pcpkit/bits.hpp"

namespace pcpkit {

// DIMACS-style literals: +v / -v for variable v in [1, num_vars].
struct Cnf {
  std::uint32_t num_vars = 0;
  std::vector<std::vector<int>> clauses;

  void validate() const;
  bool satisfies(const Bits& x) const;
  std::size_t satisfied_count(const Bits& x) const;
  std::size_t max_width() const;

  friend bool operator==(const Cnf&, const Cnf&) = default;
};

// Exhaustive search; throws ResourceError past 2^max_vars assignments.
std::optional<Bits> solve_brute_force(const Cnf& cnf, unsigned max_vars = 24);

Cnf read_dimacs(std::istream& is);
void write_dimacs(std::ostream& os, const Cnf& cnf);

}  // namespace pcpkit
