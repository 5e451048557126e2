#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcpkit/exactmath.hpp"
#include "pcpkit/rng.hpp"
#include "pcpkit/specgraph.hpp"

namespace pcpkit {

using Symbol = std::uint32_t;

// Truth table over an ordered scope; the first scope variable is the most significant digit.
struct Constraint {
  std::vector<std::uint32_t> scope;
  std::vector<std::uint8_t> table;

  static Constraint null(std::vector<std::uint32_t> scope, std::uint32_t W);
  static Constraint equality(std::uint32_t a, std::uint32_t b, std::uint32_t W);

  std::size_t index_of(std::span<const Symbol> values, std::uint32_t W) const;
  bool accepts(std::span<const Symbol> values, std::uint32_t W) const { return table[index_of(values, W)] != 0; }
  bool is_null() const;

  friend bool operator==(const Constraint&, const Constraint&) = default;
};

struct Assignment {
  std::vector<Symbol> values;
  friend bool operator==(const Assignment&, const Assignment&) = default;
};

class CspInstance {
 public:
  CspInstance() = default;
  CspInstance(std::uint32_t q, std::uint32_t W, std::uint32_t n, std::vector<Constraint> constraints);

  std::uint32_t q() const { return q_; }
  std::uint32_t W() const { return W_; }
  std::uint32_t n() const { return n_; }
  std::size_t m() const { return constraints_.size(); }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const Constraint& constraint(std::size_t i) const { return constraints_[i]; }

  bool satisfies(std::size_t i, const Assignment& u) const;
  std::size_t satisfied_count(const Assignment& u) const;
  void check_assignment(const Assignment& u) const;

  friend bool operator==(const CspInstance&, const CspInstance&) = default;

 private:
  std::uint32_t q_ = 0;
  std::uint32_t W_ = 2;
  std::uint32_t n_ = 0;
  std::vector<Constraint> constraints_;
};

inline constexpr std::uint64_t kDefaultValBudget = std::uint64_t{1} << 24;

Rat frac_satisfied(const CspInstance& phi, const Assignment& u);
Rat frac_unsatisfied(const CspInstance& phi, const Assignment& u);

struct ValResult {
  Rat value;
  Assignment best;
};
ValResult val_exact(const CspInstance& phi, std::uint64_t budget = kDefaultValBudget);

struct LocalSearchOptions {
  std::uint64_t seed = 1;
  unsigned restarts = 16;
  unsigned max_passes = 64;
  std::vector<Assignment> starts;
};
ValResult val_lower(const CspInstance& phi, const LocalSearchOptions& opt = {});

struct ConstraintGraph {
  std::vector<std::uint32_t> degree;
  bool regular = false;
  // Present only when every vertex has the same degree.
  std::optional<RotationGraph> graph;
  // Constraint index behind each port, indexed v*d + i.
  std::vector<std::uint32_t> port_constraint;
};
// Unary constraints become fixed-point loops, binary ones edges; ports are numbered in constraint order.
ConstraintGraph constraint_graph(const CspInstance& phi);

struct NiceReport {
  bool nice = false;
  std::vector<std::string> failures;
  std::optional<SpectralEstimate> lambda;
};
NiceReport is_nice(const CspInstance& phi, const SpectralOptions& opt = {});

CspInstance random_csp(std::uint32_t q, std::uint32_t W, std::uint32_t n, std::size_t m, Rng& rng,
                       double accept_density = 0.5);

void write_csp(std::ostream& os, const CspInstance& phi);
CspInstance read_csp(std::istream& is);

}  // namespace pcpkit
