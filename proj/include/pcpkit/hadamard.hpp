#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcpkit/bits.hpp"
#include "pcpkit/cnf.hpp"
#include "pcpkit/exactmath.hpp"
#include "pcpkit/rng.hpp"
#include "pcpkit/stats.hpp"

namespace pcpkit {

inline constexpr unsigned kMaxTableBits = 26;

// Truth table of a function {0,1}^k -> {0,1}; entry x holds f at the point whose coordinate i is bit i of x.
class BoolFn {
 public:
  BoolFn() : table_(1, 0) {}
  explicit BoolFn(unsigned k);
  BoolFn(unsigned k, std::vector<std::uint8_t> table);

  unsigned k() const { return k_; }
  std::uint64_t size() const { return table_.size(); }
  bool operator()(std::uint64_t x) const { return table_[x] != 0; }
  void set(std::uint64_t x, bool v) { table_[x] = v ? 1 : 0; }
  void flip(std::uint64_t x) { table_[x] ^= 1U; }
  const std::vector<std::uint8_t>& table() const { return table_; }

  friend bool operator==(const BoolFn&, const BoolFn&) = default;

 private:
  unsigned k_ = 0;
  std::vector<std::uint8_t> table_;
};

BoolFn wh_encode(const Bits& u);
// Same codeword addressed by the index form of u.
BoolFn wh_encode_index(std::uint64_t u, unsigned k);

// Exhaustive over all 4^k pairs; k <= 14.
Rat blr_pass_rate(const BoolFn& f);

// Sum over x of (-1)^(f(x) + <u,x>) for every u.
std::vector<std::int64_t> walsh_spectrum(const BoolFn& f);

struct LinearFit {
  Bits u;
  Rat agreement;
};
// Ties go to the lexicographically least u = (u_1, ..., u_k).
LinearFit nearest_linear(const BoolFn& f);

inline bool self_correct(const BoolFn& f, std::uint64_t x, std::uint64_t r) { return f(x ^ r) != f(r); }

// g(x) = 1 iff f(y) + f(x+y) = 1 for at least half of all y.
BoolFn majority_correction(const BoolFn& f);

Rat distance(const BoolFn& f, const BoolFn& g);

// A (u (x) u) = b over GF(2). Row entry i*n1 + j multiplies u_i u_j.
struct QuadSystem {
  unsigned n1 = 0;
  std::vector<Bits> A;
  Bits b;

  std::size_t m() const { return A.size(); }
  void validate() const;
  bool satisfied_by(const Bits& u) const;

  friend bool operator==(const QuadSystem&, const QuadSystem&) = default;
};

std::uint64_t tensor_index(std::uint64_t r1, std::uint64_t r2, unsigned n1);
Bits tensor(const Bits& u, const Bits& v);

// Variables are the CNF variables in order, then one auxiliary per width-3 clause.
QuadSystem cnf_to_quadsys(const Cnf& cnf);
Bits quadsys_witness(const Cnf& cnf, const Bits& x);
std::optional<Bits> solve_quadsys(const QuadSystem& sys, unsigned max_vars = 24);

struct ExpPcpProof {
  unsigned n1 = 0;
  BoolFn f;
  BoolFn g;

  void validate() const;
  friend bool operator==(const ExpPcpProof&, const ExpPcpProof&) = default;
};

// Honest proof; throws PreconditionError unless u solves sys.
ExpPcpProof exp_pcp_prove(const QuadSystem& sys, const Bits& u);
// f = WH(u), g = WH(u (x) u) regardless of whether u is a solution.
ExpPcpProof tensor_proof(const Bits& u);
// f = WH(u), g = WH(v) with v of length n1^2.
ExpPcpProof linear_proof(const Bits& u, const Bits& v);

struct RoundRandomness {
  std::uint64_t r1 = 0, r2 = 0, r3 = 0;
  std::uint64_t r4 = 0, r5 = 0, r6 = 0;
  std::uint64_t r7 = 0;
  friend bool operator==(const RoundRandomness&, const RoundRandomness&) = default;
};

unsigned round_bits(const QuadSystem& sys);
// Fields packed r1 (least significant) through r7.
RoundRandomness decode_round(const QuadSystem& sys, std::uint64_t w);
RoundRandomness random_round(const QuadSystem& sys, Rng& rng);

// Index z with WH(v)(z) = sum_i (r7)_i A_i v.
std::uint64_t row_sum_index(const QuadSystem& sys, std::uint64_t r7);

bool exp_pcp_verify_round(const QuadSystem& sys, const ExpPcpProof& proof, const RoundRandomness& w);
bool exp_pcp_verify(const QuadSystem& sys, const ExpPcpProof& proof, std::span<const RoundRandomness> rounds);

inline constexpr unsigned kDefaultVerifierRounds = 8;
inline constexpr unsigned kEnumerateBitBudget = 26;

enum class AcceptMode { Enumerate, Exact, Sample };

struct SampleOptions {
  std::uint64_t samples = 10000;
  std::uint64_t seed = 1;
  double confidence = 0.99;
};

struct AcceptResult {
  AcceptMode mode = AcceptMode::Exact;
  std::optional<Rat> exact;
  double estimate = 0;
  Interval ci;
  std::uint64_t trials = 0;
};

// Enumerate walks every random string; Exact multiplies the factored single-round probability.
AcceptResult exp_pcp_accept_prob(const QuadSystem& sys, const ExpPcpProof& proof, unsigned rounds, AcceptMode mode,
                                 const SampleOptions& sample = {});

// Exact single-round acceptance with cheap updates after flipping one bit of g.
// Needs n1^2 <= 20 and 2^(n1^2 + m) <= 2^30.
class RoundAcceptance {
 public:
  RoundAcceptance(const QuadSystem& sys, ExpPcpProof proof);

  Rat value() const;
  void flip_g(std::uint64_t p);
  void flip_f(std::uint64_t x);
  const ExpPcpProof& proof() const { return proof_; }

 private:
  void rebuild_f_counts();
  void rebuild_s();
  void rebuild_g_sums();
  void sum_total();
  std::uint64_t pair_passes_through(std::uint64_t p) const;

  unsigned n1_;
  unsigned K_;
  unsigned m_;
  std::uint64_t bmask_ = 0;
  std::vector<std::uint64_t> z_;
  ExpPcpProof proof_;
  // Every distinct tensor point r1 (x) r2, with the number of (r1,r2,r3) passing f-linearity whose
  // self-corrected product is 0 or 1.
  std::vector<std::uint64_t> xs_;
  std::vector<std::uint64_t> n0_, n1c_;
  // Weighted by s, the r6 with g(r6 + x) = g(r6) and those with g(r6 + x) != g(r6).
  std::vector<std::uint64_t> same_, diff_;
  std::vector<std::uint32_t> s_;
  std::uint64_t lin_g_pass_ = 0;
  unsigned __int128 total_ = 0;
};

Rat single_round_accept(const QuadSystem& sys, const ExpPcpProof& proof);

// Closed form for f = WH(u), g = WH(v): P = P_tensor * P_sat.
Rat linear_pair_accept(const QuadSystem& sys, const Bits& u, const Bits& v);

struct LinearPairScan {
  Rat best;
  std::vector<std::pair<Bits, Bits>> maximizers;
  std::uint64_t pairs = 0;
};
// Every (u, v); keeps up to max_keep maximizers in enumeration order.
LinearPairScan scan_linear_pairs(const QuadSystem& sys, std::size_t max_keep = 4);

struct AdversaryOptions {
  std::uint64_t seed = 1;
  // Single g flips are exhaustive up to this table size, sampled above it.
  std::uint64_t exhaustive_flip_limit = std::uint64_t{1} << 10;
  std::size_t sampled_flips = 256;
  std::size_t double_flips = 128;
  std::size_t random_proofs = 16;
  unsigned hill_steps = 16;
  unsigned hill_candidates = 64;
};

struct AdversaryReport {
  Rat worst;
  std::string worst_family;
  std::uint64_t proofs = 0;
  Rat linear_pairs_best;
};

// Worst single-round acceptance over linear pairs, tensor proofs, their one- and two-bit perturbations,
// random tables and greedy hill climbing.
AdversaryReport adversary_sweep(const QuadSystem& sys, const AdversaryOptions& opt = {});

// Predicate over 2*n1 bits; entry u1 | (u2 << n1).
struct Predicate {
  unsigned n1 = 1;
  std::vector<std::uint8_t> table;

  bool operator()(std::uint64_t u1, std::uint64_t u2) const { return table[u1 | (u2 << n1)] != 0; }
  friend bool operator==(const Predicate&, const Predicate&) = default;
};

struct CircuitSystem {
  QuadSystem sys;
  // Auxiliary variable 2*n1 + k equals the product of variables aux[k].first and aux[k].second.
  std::vector<std::pair<unsigned, unsigned>> aux;
  unsigned n1 = 1;

  Bits witness(std::uint64_t u1, std::uint64_t u2) const;
};

// One quadratic equation from the algebraic normal form of C, chaining products for higher degrees.
CircuitSystem circuit_to_quadsys(const Predicate& c);

struct TesterProof {
  BoolFn pi1;
  BoolFn pi2;
  ExpPcpProof pi3;
  friend bool operator==(const TesterProof&, const TesterProof&) = default;
};

struct TesterRound {
  std::uint64_t lin1_x = 0, lin1_y = 0;
  std::uint64_t lin2_x = 0, lin2_y = 0;
  RoundRandomness exp;
  std::uint64_t cat_x = 0, cat_y = 0;
  friend bool operator==(const TesterRound&, const TesterRound&) = default;
};

using TesterRandomness = std::vector<TesterRound>;

inline constexpr unsigned kDefaultTesterRepetitions = 4;
inline constexpr unsigned kTesterQueriesPerRound = 21;

// Checks that pi1, pi2 encode inputs accepted by C; repeats independent rounds of the four sub-tests.
class AssignmentTester {
 public:
  explicit AssignmentTester(Predicate c, unsigned repetitions = kDefaultTesterRepetitions);

  const Predicate& predicate() const { return pred_; }
  const CircuitSystem& circuit() const { return circuit_; }
  unsigned repetitions() const { return reps_; }
  unsigned n1() const { return pred_.n1; }

  TesterProof honest(std::uint64_t u1, std::uint64_t u2) const;

  // Flat layout: pi1, pi2, pi3.f, pi3.g.
  std::uint64_t proof_bits() const;
  std::vector<std::uint8_t> flatten(const TesterProof& p) const;
  TesterProof unflatten(std::span<const std::uint8_t> bits) const;

  std::vector<std::uint64_t> queries(const TesterRandomness& w) const;
  bool decide(const TesterRandomness& w, std::span<const std::uint8_t> answers) const;
  bool run(const TesterProof& p, const TesterRandomness& w) const;

  unsigned round_bits() const;
  TesterRound decode_round(std::uint64_t w) const;
  TesterRandomness random_string(Rng& rng) const;

  Rat round_accept(const TesterProof& p) const;
  Rat accept_prob(const TesterProof& p) const;

  // Nearest codewords of pi1 and pi2 as indices.
  std::pair<std::uint64_t, std::uint64_t> decode(const TesterProof& p) const;

 private:
  void check_shape(const TesterProof& p) const;

  Predicate pred_;
  unsigned reps_;
  CircuitSystem circuit_;
};

void write_quadsys(std::ostream& os, const QuadSystem& sys);
QuadSystem read_quadsys(std::istream& is);
void write_proof(std::ostream& os, const ExpPcpProof& proof);
ExpPcpProof read_proof(std::istream& is);

}  // namespace pcpkit
