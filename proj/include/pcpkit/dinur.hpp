#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcpkit/cnf.hpp"
#include "pcpkit/csp.hpp"
#include "pcpkit/exactmath.hpp"
#include "pcpkit/hadamard.hpp"
#include "pcpkit/specgraph.hpp"

namespace pcpkit {

struct PipelineConfig {
  std::uint32_t q0 = 3;
  unsigned l = 6;
  unsigned t = 1;
  // Degree of the equality expanders inside each cloud; regularized instances are (cloud_degree + 1)-regular.
  std::uint32_t cloud_degree = 3;
  // Nice instances are 4d-regular.
  std::uint32_t d = 4;
  // Clouds and the padded vertex set have sizes e^k; e = 1 means exact sizes.
  std::uint32_t cloud_base = 1;
  std::uint32_t pad_base = 1;
  Rat cloud_lambda{Rat(9) / Rat(10)};
  Rat nice_lambda{Rat(9) / Rat(10)};
  // Largest alphabet alphabet_reduce accepts.
  std::uint32_t W = 2;
  unsigned m0 = kDefaultVerifierRounds;
  unsigned tester_repetitions = kDefaultTesterRepetitions;
  unsigned b = 1;
  std::uint64_t L = 1u << 20;
  Rat epsilon0{Rat(1) / Rat(16)};
  std::uint64_t seed = 1;
  unsigned max_rounds = 4;
  std::uint64_t val_budget = kDefaultValBudget;
  std::uint64_t path_budget = std::uint64_t{1} << 24;
  std::uint64_t tableau_budget = std::uint64_t{1} << 20;
  std::uint64_t expander_attempts = 2000;
  std::uint32_t spectral_exact_cap = 160;

  void validate() const;
  Rat delta() const { return Rat(1) / Rat(1000 * W); }
  SpectralOptions spectral() const;

  friend bool operator==(const PipelineConfig&, const PipelineConfig&) = default;
};

// Line-oriented "pcpconfig v1" text; unknown keys are errors, missing keys keep their defaults.
void write_config(std::ostream& os, const PipelineConfig& cfg);
PipelineConfig read_config(std::istream& is);

struct TmTransition {
  std::uint32_t state = 0;
  std::uint32_t symbol = 0;
  std::uint32_t next_state = 0;
  std::uint32_t write = 0;
  int move = 1;
  friend bool operator==(const TmTransition&, const TmTransition&) = default;
};

// Symbols 0 and 1 are the input bits.
struct TmSpec {
  std::uint32_t states = 1;
  std::uint32_t symbols = 2;
  std::uint32_t initial = 0;
  std::vector<std::uint32_t> accepting;
  std::vector<TmTransition> rho;
  unsigned k = 1;

  void validate() const;
  bool is_accepting(std::uint32_t q) const;
  // Entries of the tuple (Q, Sigma, b, F, rho), five per transition.
  std::uint64_t encoded_size() const;
};

// Atom numbering of the tableau formula; steps and cells both range over [0, N).
struct Tableau {
  std::uint32_t N = 1;
  std::uint32_t states = 1;
  std::uint32_t symbols = 2;

  std::uint32_t T(std::uint32_t cell, std::uint32_t sym, std::uint32_t step) const;
  std::uint32_t H(std::uint32_t cell, std::uint32_t step) const;
  std::uint32_t Q(std::uint32_t state, std::uint32_t step) const;
  std::uint32_t atoms() const;
};

struct CookLevinResult {
  Cnf cnf;
  Tableau tableau;
};

// Throws ResourceError when the variable count exceeds budget.
CookLevinResult cooklevin(const TmSpec& tm, const Bits& x, std::uint64_t budget = std::uint64_t{1} << 20);

// Clauses wider than 3 become chains over fresh variables appended after the original ones.
Cnf split_clauses(const Cnf& cnf);
// Extends an assignment of cnf to one of split_clauses(cnf).
Bits extend_split_assignment(const Cnf& cnf, const Bits& x);

// One constraint per clause of split_clauses(cnf) over the same variables.
CspInstance to_qcsp(const Cnf& cnf, std::uint32_t q0 = 3);

// Variables u_0..u_{n-1} then one y per constraint; alphabet W^q; exactly q constraints per source constraint.
CspInstance qcsp_to_2cspW(const CspInstance& phi);
// Source symbols outside [0, W) decode to 0.
Assignment project_source(const CspInstance& phi, const Assignment& psi_assignment);
Assignment lift_to_2cspW(const CspInstance& phi, const Assignment& u);

struct RegularizedInstance {
  CspInstance psi;
  // Source variables that appear in some constraint, in order; cloud k belongs to kept[k].
  std::vector<std::uint32_t> kept;
  std::vector<std::uint32_t> cloud_start;
  std::vector<std::uint32_t> cloud_size;
  std::size_t source_constraints = 0;
  std::uint32_t source_n = 0;
};

RegularizedInstance regularize(const CspInstance& phi, const PipelineConfig& cfg);
// Plurality of each cloud, ties to the smallest symbol; dropped variables get 0.
Assignment cloud_plurality(const RegularizedInstance& r, const Assignment& y);
Assignment spread_to_clouds(const RegularizedInstance& r, const Assignment& u);

struct NiceInstance {
  CspInstance psi;
  std::uint32_t source_n = 0;
  std::size_t source_constraints = 0;
  RotationGraph expander;
  std::optional<SpectralEstimate> lambda;
  std::uint64_t attempts = 0;
};

NiceInstance make_nice(const CspInstance& phi, const PipelineConfig& cfg);
Assignment pad_assignment(const NiceInstance& nice, const Assignment& u);
Assignment restrict_assignment(const NiceInstance& nice, const Assignment& y);

// Value of every vertex's ball, in the canonical order of PoweredInstance::ball.
struct PoweredAssignment {
  std::vector<std::vector<Symbol>> values;
  friend bool operator==(const PoweredAssignment&, const PoweredAssignment&) = default;
};

// One constraint per walk of 2t+1 steps, indexed by its start vertex and port sequence (first port most
// significant). The ball of a vertex lists everything within t + sqrt(t) steps in BFS order, visiting ports in order.
class PoweredInstance {
 public:
  PoweredInstance(CspInstance psi, unsigned t, std::uint64_t path_budget);

  const CspInstance& base() const { return psi_; }
  const RotationGraph& graph() const { return graph_; }
  unsigned t() const { return t_; }
  unsigned radius() const { return radius_; }
  std::uint32_t n() const { return psi_.n(); }
  std::uint64_t m() const { return paths_; }
  std::uint32_t degree() const { return graph_.d(); }
  const std::vector<std::uint32_t>& ball(std::uint32_t v) const { return balls_[v]; }
  std::size_t max_ball() const;
  // Slot of u in the ball of v, or -1.
  std::int64_t slot(std::uint32_t v, std::uint32_t u) const;
  // log2 of the alphabet size, W^(largest ball).
  double alphabet_log2() const;

  PoweredAssignment induced(const Assignment& u) const;
  PoweredAssignment random_assignment(Rng& rng) const;
  void check_assignment(const PoweredAssignment& y) const;

  std::vector<std::uint32_t> path(std::uint64_t p) const;
  bool accepts(std::uint64_t p, const PoweredAssignment& y) const;
  std::uint64_t violated_count(const PoweredAssignment& y) const;
  Rat frac_unsatisfied(const PoweredAssignment& y) const;

  // Number of t-step walks from v ending at each vertex.
  std::vector<std::uint64_t> walk_counts(std::uint32_t v) const;

 private:
  bool edge_violated(std::uint32_t c, std::uint32_t a, std::uint32_t b, Symbol va, Symbol vb) const;

  CspInstance psi_;
  RotationGraph graph_;
  std::vector<std::uint32_t> port_constraint_;
  unsigned t_;
  unsigned radius_;
  std::uint64_t paths_;
  std::vector<std::vector<std::uint32_t>> balls_;
  std::vector<std::int32_t> slots_;
};

PoweredInstance power_t(const NiceInstance& nice, unsigned t, std::uint64_t path_budget = std::uint64_t{1} << 24);
Assignment plurality_assignment(const PoweredInstance& p, const PoweredAssignment& y);

// Each variable becomes its Hadamard codeword; each constraint gets a tester proof block.
// The constraints are the tester's random strings, kept implicit.
class ReducedInstance {
 public:
  ReducedInstance(CspInstance phi, unsigned repetitions);

  const CspInstance& source() const { return phi_; }
  unsigned repetitions() const { return reps_; }
  std::uint64_t proof_bits() const { return total_bits_; }
  std::uint64_t block_offset(std::size_t c) const { return block_offset_[c]; }
  std::uint64_t block_bits(std::size_t c) const;
  // Queries per constraint and random bits per block.
  unsigned arity() const { return kTesterQueriesPerRound * reps_; }
  unsigned block_random_bits(std::size_t c) const;
  const AssignmentTester& tester(std::size_t c) const { return testers_[tester_of_[c]]; }
  // Every block replicated up to the widest block's random strings.
  mpz_class constraint_count() const;

  std::vector<std::uint8_t> honest(const Assignment& u) const;
  std::vector<std::uint8_t> random_proof(Rng& rng) const;
  TesterProof block(const std::vector<std::uint8_t>& bits, std::size_t c) const;
  // Acceptance of block c, exact.
  Rat block_accept(const std::vector<std::uint8_t>& bits, std::size_t c) const;
  // Blocks weigh equally, as if each were replicated up to the largest block's random-string count.
  Rat frac_satisfied(const std::vector<std::uint8_t>& bits) const;
  Rat frac_unsatisfied(const std::vector<std::uint8_t>& bits) const { return Rat(1) - frac_satisfied(bits); }
  // Nearest codeword when it agrees on at least 99% of positions, 0 otherwise.
  Assignment decode(const std::vector<std::uint8_t>& bits) const;

  // Nonadaptive positions read by constraint (c, w) and its decision.
  std::vector<std::uint64_t> queries(std::size_t c, const TesterRandomness& w) const;
  bool accepts(const std::vector<std::uint8_t>& bits, std::size_t c, const TesterRandomness& w) const;

 private:
  CspInstance phi_;
  unsigned reps_;
  std::vector<AssignmentTester> testers_;
  std::vector<std::size_t> tester_of_;
  std::vector<std::uint64_t> block_offset_;
  std::uint64_t total_bits_ = 0;
};

ReducedInstance alphabet_reduce(const CspInstance& phi, const PipelineConfig& cfg);

struct StageSize {
  std::string stage;
  std::uint32_t n = 0;
  std::uint64_t m = 0;
  double alphabet_log2 = 1;
  std::uint32_t arity = 0;
};

struct AmplifyStages {
  CspInstance two_csp;
  RegularizedInstance regular;
  NiceInstance nice;
  std::optional<PoweredInstance> powered;
  std::vector<StageSize> sizes;
};

// The stages of one amplification round through powering.
AmplifyStages amplify_stages(const CspInstance& phi, const PipelineConfig& cfg);
// Composite through alphabet reduction; throws ResourceError when the powered alphabet exceeds the cap.
ReducedInstance amplify_once(const CspInstance& phi, const PipelineConfig& cfg);

struct PcpProof {
  std::vector<std::uint8_t> bits;
};

// Randomness w < m^parallel picks `parallel` constraints (base-m digits, most significant first).
struct VerifierDescriptor {
  std::uint64_t proof_bits = 0;
  unsigned parallel = 1;
  std::vector<std::vector<std::uint64_t>> query_map;
  std::vector<std::vector<std::uint8_t>> tables;

  std::uint64_t base_constraints() const { return query_map.size(); }
  // Throws ResourceError when m^parallel does not fit in 62 bits.
  std::uint64_t index_space() const;
  std::vector<std::uint64_t> constraints_of(std::uint64_t w) const;
  std::vector<std::uint64_t> queries(std::uint64_t w) const;
  bool decide(std::uint64_t w, std::span<const std::uint8_t> answers) const;
  void validate() const;

  friend bool operator==(const VerifierDescriptor&, const VerifierDescriptor&) = default;
};

VerifierDescriptor make_descriptor(const CspInstance& binary, unsigned parallel);
// Smallest k with (1 - gap)^k <= 1/2.
unsigned parallel_for_gap(const Rat& gap);

bool pcp_verify(const VerifierDescriptor& desc, const PcpProof& proof, std::uint64_t w);
// Acceptance over all w; equals (satisfied fraction)^parallel.
Rat pcp_accept_prob(const VerifierDescriptor& desc, const PcpProof& proof);
// Accepts iff the verifier accepts for every w.
bool np_witness_check(const VerifierDescriptor& desc, const PcpProof& proof, std::uint64_t enumerate_budget = 1u << 20);

void write_descriptor(std::ostream& os, const VerifierDescriptor& desc);
VerifierDescriptor read_descriptor(std::istream& is);

enum class GapMethod { Exact, LowerBound };

struct GapEvidence {
  GapMethod method = GapMethod::Exact;
  // Exact gap 1 - val, or 1 - (best value found) which bounds the gap from above.
  Rat gap;
  Assignment best;
};

GapEvidence measure_gap(const CspInstance& phi, const PipelineConfig& cfg);

struct PipelineResult {
  CspInstance final;
  VerifierDescriptor descriptor;
  GapEvidence gap;
  unsigned rounds_run = 0;
  bool reached_epsilon0 = false;
  std::vector<StageSize> stages;
  std::vector<std::string> notes;
};

// Iterates amplification until the measured gap reaches epsilon0 or `rounds` are spent.
// When out_dir is set, artifacts are written there, also before a ResourceError propagates.
PipelineResult run_pipeline(const Cnf& cnf, unsigned rounds, const PipelineConfig& cfg,
                            const std::optional<std::string>& out_dir = std::nullopt);
// Proof for the final instance of a round-0 pipeline from a satisfying assignment of cnf.
PcpProof honest_pcp_proof(const Cnf& cnf, const Bits& x);

std::string pipeline_manifest(const PipelineResult& r, const PipelineConfig& cfg);

}  // namespace pcpkit
