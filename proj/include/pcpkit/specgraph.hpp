#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcpkit/exactmath.hpp"
#include "pcpkit/rng.hpp"

namespace pcpkit {

struct Port {
  std::uint32_t v = 0;
  std::uint32_t i = 0;
  friend bool operator==(const Port&, const Port&) = default;
};

// Undirected d-regular multigraph given by an involution on vertex-port pairs.
// A fixed point (v,i) -> (v,i) is a self-loop using a single port.
class RotationGraph {
 public:
  RotationGraph() = default;
  // rot[v*d + i] = rot(v,i); throws unless rot is an involution.
  RotationGraph(std::uint32_t n, std::uint32_t d, std::vector<Port> rot);

  // One vertex with d fixed-point loops.
  static RotationGraph single_vertex(std::uint32_t d);
  // n-cycle with d = 2 (n = 1 gives two loops, n = 2 a double edge).
  static RotationGraph cycle(std::uint32_t n);
  static RotationGraph complete(std::uint32_t n);
  // Ports are filled in edge order; (u,u) is a fixed-point loop. Every vertex must end up with d ports.
  static RotationGraph from_edges(std::uint32_t n, std::uint32_t d,
                                  std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

  std::uint32_t n() const { return n_; }
  std::uint32_t d() const { return d_; }
  Port rot(std::uint32_t v, std::uint32_t i) const { return rot_[std::size_t{v} * d_ + i]; }
  std::uint32_t neighbor(std::uint32_t v, std::uint32_t i) const { return rot(v, i).v; }
  bool is_fixed(std::uint32_t v, std::uint32_t i) const { return rot(v, i) == Port{v, i}; }
  std::span<const Port> table() const { return rot_; }

  friend bool operator==(const RotationGraph&, const RotationGraph&) = default;

 private:
  std::uint32_t n_ = 0;
  std::uint32_t d_ = 0;
  std::vector<Port> rot_;
};

// Dense exact random-walk matrix.
class RWMatrix {
 public:
  RWMatrix(std::uint32_t n, std::vector<Rat> entries);
  std::uint32_t n() const { return n_; }
  const Rat& at(std::uint32_t i, std::uint32_t j) const { return entries_[std::size_t{i} * n_ + j]; }
  std::span<const Rat> entries() const { return entries_; }
  RWMatrix operator*(const RWMatrix& o) const;
  friend bool operator==(const RWMatrix&, const RWMatrix&) = default;

 private:
  std::uint32_t n_;
  std::vector<Rat> entries_;
};

// counts[i*n + j] = number of ports at i whose edge ends at j (a fixed point counts once).
std::vector<std::uint32_t> multiplicity_matrix(const RotationGraph& g);
RWMatrix rw_matrix(const RotationGraph& g);
RWMatrix kronecker(const RWMatrix& a, const RWMatrix& b);

inline constexpr std::uint64_t kDefaultPortBudget = std::uint64_t{1} << 26;

// Labels of the result enumerate length-k label sequences, first step most significant.
RotationGraph graph_power(const RotationGraph& g, unsigned k, std::uint64_t port_budget = kDefaultPortBudget);
// Vertex (v,v') is v*n' + v', label (i,i') is i*d' + i'.
RotationGraph tensor(const RotationGraph& g, const RotationGraph& g2);
// Vertex (v,a) is v*D + a. Labels [0,d) follow H inside the cloud, labels [d,2d) are
// parallel copies of the G edge leaving port a.
RotationGraph replacement(const RotationGraph& g, const RotationGraph& h);

enum class SpectralMethod { ExactSmallN, PowerIteration, RayleighSample };
std::string to_string(SpectralMethod m);

struct SpectralEstimate {
  Rat lambda_upper;
  SpectralMethod method = SpectralMethod::ExactSmallN;
  Rat residual;
  bool certified() const { return method == SpectralMethod::ExactSmallN; }
};

struct SpectralOptions {
  std::uint32_t exact_cap = 64;
  // Initial safety margin 2^-margin_bits added to the floating estimate before certification.
  unsigned margin_bits = 30;
  unsigned iterations = 2000;
  unsigned samples = 64;
  std::uint64_t seed = 1;
};

// Largest |eigenvalue| of A - J computed in double precision (no certificate).
double lambda_float(const RotationGraph& g);
SpectralEstimate lambda_upper(const RotationGraph& g, SpectralMethod mode, const SpectralOptions& opt = {});
// Certified when n fits the exact cap, power iteration otherwise.
SpectralEstimate lambda_auto(const RotationGraph& g, const SpectralOptions& opt = {});

// True iff the symmetric integer matrix (row-major, n x n) is positive definite,
// decided exactly from its leading principal minors.
bool positive_definite(std::span<const mpz_class> m, std::uint32_t n);

std::uint64_t edge_cut(const RotationGraph& g, std::span<const std::uint32_t> s);
Rat collision_prob(const RotationGraph& g, unsigned l, std::span<const std::uint32_t> s);

struct CertifiedGraph {
  RotationGraph graph;
  SpectralEstimate lambda;
  std::uint64_t attempts = 0;
};

// Uniformly random perfect matching of the n*d ports (one fixed point if n*d is odd).
RotationGraph random_regular(std::uint32_t n, std::uint32_t d, Rng& rng);

CertifiedGraph find_base_expander(std::uint32_t n, std::uint32_t d, const Rat& target_lambda,
                                  std::uint64_t seed, std::uint64_t max_attempts = 20000,
                                  const SpectralOptions& opt = {});

struct FamilyConfig {
  RotationGraph h;
  RotationGraph g1;
  RotationGraph g2;
  unsigned b = 1;
  Rat target_lambda{Rat(9) / Rat(10)};
  std::uint64_t port_budget = kDefaultPortBudget;
  SpectralOptions spectral;
};

// Checks the shape compatibility of the base graphs.
void validate_family(const FamilyConfig& cfg);
// Vertex count of level k from the recursion alone.
mpz_class family_vertex_count(unsigned k, const FamilyConfig& cfg);
RotationGraph build_family(unsigned k, const FamilyConfig& cfg);

// Memoized family levels.
class ExpanderFamily {
 public:
  explicit ExpanderFamily(FamilyConfig cfg);
  const FamilyConfig& config() const { return cfg_; }
  const RotationGraph& level(unsigned k);
  const SpectralEstimate& lambda(unsigned k);

 private:
  FamilyConfig cfg_;
  std::map<unsigned, std::shared_ptr<const RotationGraph>> graphs_;
  std::map<unsigned, SpectralEstimate> lambdas_;
};

void write_rotgraph(std::ostream& os, const RotationGraph& g);
RotationGraph read_rotgraph(std::istream& is);

}  // namespace pcpkit
