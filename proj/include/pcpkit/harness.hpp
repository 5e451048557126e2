#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pcpkit/cnf.hpp"
#include "pcpkit/csp.hpp"
#include "pcpkit/dinur.hpp"
#include "pcpkit/exactmath.hpp"
#include "pcpkit/stats.hpp"

namespace pcpkit {

struct BinomDist {
  unsigned t = 0;
  // Entry k is C(t,k)/2^t.
  std::vector<Rat> probabilities;
};

BinomDist binom_dist(unsigned t);
// max over the sign of sum_k |Pr[S_t = k] - Pr[S_{t +- shift} = k]|; t a perfect square, shift < sqrt(t).
Rat binom_statdist(unsigned t, unsigned shift);

struct SecondMoment {
  // Fraction of positive values, and E[V]^2 / E[V^2].
  Rat lhs;
  Rat rhs;
};
SecondMoment second_moment_bound(std::span<const Rat> values);

enum class ProbMethod { Exact, Sampled };
std::string to_string(ProbMethod m);

struct ProbEstimate {
  ProbMethod method = ProbMethod::Exact;
  std::optional<Rat> exact;
  double estimate = 0;
  Interval ci;
  std::uint64_t trials = 0;
  std::uint64_t successes = 0;
};

struct SampleConfig {
  std::uint64_t samples = 10000;
  double confidence = 0.99;
};

// Exact when space <= budget, else seeded uniform sampling with a Clopper-Pearson interval.
ProbEstimate enumerate_or_sample(std::uint64_t space, const std::function<bool(std::uint64_t)>& accept,
                                 std::uint64_t budget, std::uint64_t seed, const SampleConfig& sample = {});

struct LawTally {
  LawTally() = default;
  explicit LawTally(std::string name) : law(std::move(name)) {}

  std::string law;
  std::uint64_t checks = 0;
  std::uint64_t failures = 0;
  // Smallest lhs - rhs seen.
  std::optional<Rat> min_slack;

  void record(const Rat& lhs, const Rat& rhs);
};

struct PlantedCsp {
  CspInstance phi;
  Assignment plant;
};
// Random tables with the planted assignment accepted by every constraint.
PlantedCsp planted_csp(std::uint32_t q, std::uint32_t W, std::uint32_t n, std::size_t m, Rng& rng);

struct StageLawReport {
  std::vector<LawTally> laws;
  std::vector<std::string> completeness_failures;
  std::vector<StageSize> sizes;

  bool ok() const;
};

// Completeness of each stage from the planted assignment, and the per-assignment soundness laws of
// qCSP -> 2CSP, regularize, make_nice and powering on `assignments` seeded assignments each.
StageLawReport check_stage_laws(const PlantedCsp& in, const PipelineConfig& cfg, unsigned assignments,
                                std::uint64_t seed);
// Completeness and the decode law of alphabet reduction on a binary-alphabet 2CSP.
StageLawReport check_reduction_law(const PlantedCsp& in, const PipelineConfig& cfg, unsigned proofs,
                                   std::uint64_t seed);

struct BlowupRow {
  std::uint32_t n = 0;
  std::vector<StageSize> sizes;
  // Constraint count of the alphabet reduction of the binary ring with n variables.
  mpz_class reduced_constraints;
  std::size_t reduced_source_constraints = 0;
};

struct BlowupSweep {
  std::vector<BlowupRow> rows;
  // Per stage transition: name, factor per row, and max/min - 1.
  std::vector<std::string> names;
  std::vector<std::vector<double>> factors;
  std::vector<double> spread;
};

// Circulant q0-CSP family: constraint i reads variables i, i+1, i+3 (mod n).
CspInstance circulant_qcsp(std::uint32_t n, std::uint32_t W, Rng& rng);
BlowupSweep measure_blowup(std::span<const std::uint32_t> ns, std::uint32_t W, const PipelineConfig& cfg,
                           std::uint64_t seed);

struct Fixture {
  std::string name;
  Cnf cnf;
  bool satisfiable = false;
};
std::vector<Fixture> builtin_fixtures();

struct ProbabilityRecord {
  std::string name;
  ProbEstimate p;
};

struct ExperimentReport {
  ExperimentReport() = default;
  ExperimentReport(std::string n, std::uint64_t s) : name(std::move(n)), seed(s) {}

  std::string name;
  std::uint64_t seed = 0;
  std::vector<StageSize> stages;
  std::vector<LawTally> laws;
  std::vector<ProbabilityRecord> probabilities;
  std::vector<std::pair<std::string, std::string>> metrics;
  std::vector<std::string> artifacts;
  std::vector<std::string> failures;
  double wall_seconds = 0;

  bool passed() const { return failures.empty(); }
  void metric(const std::string& key, const std::string& value) { metrics.emplace_back(key, value); }
  void check(bool ok, const std::string& what);
};

struct SuiteOptions {
  std::optional<std::string> out_dir;
  std::uint64_t budget = std::uint64_t{1} << 20;
  unsigned law_assignments = 100;
  bool include_timing = false;
};

std::vector<ExperimentReport> run_suite(const PipelineConfig& cfg, const SuiteOptions& opt);

// Schema "pcpkit report v1"; wall-clock only when include_timing is set.
std::string reports_json(const std::vector<ExperimentReport>& reports, const PipelineConfig& cfg, bool include_timing);
std::string reports_csv(const std::vector<ExperimentReport>& reports);

}  // namespace pcpkit
