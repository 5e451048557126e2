#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "pcpkit/errors.hpp"
#include "pcpkit/harness.hpp"

using namespace pcpkit;

namespace {

// Row t of Pascal's triangle over 2^t, built by repeated addition.
std::vector<Rat> pascal_row(unsigned t) {
  std::vector<Rat> row{Rat(1)};
  for (unsigned i = 0; i < t; ++i) {
    std::vector<Rat> next(row.size() + 1);
    for (std::size_t k = 0; k < row.size(); ++k) {
      next[k] += row[k] / Rat(2);
      next[k + 1] += row[k] / Rat(2);
    }
    row = std::move(next);
  }
  return row;
}

Rat statdist_oracle(unsigned t, unsigned shift) {
  auto base = pascal_row(t);
  Rat best;
  for (unsigned other : {t + shift, t - shift}) {
    auto row = pascal_row(other);
    Rat sum;
    for (std::size_t k = 0; k < std::max(base.size(), row.size()); ++k) {
      Rat a = k < base.size() ? base[k] : Rat(0);
      Rat b = k < row.size() ? row[k] : Rat(0);
      sum += abs(a - b);
    }
    best = std::max(best, sum);
  }
  return best;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

}  // namespace

TEST_CASE("binomial distribution entries") {
  for (unsigned t : {0U, 1U, 5U, 16U, 40U}) {
    BinomDist d = binom_dist(t);
    CHECK(d.t == t);
    CHECK(d.probabilities == pascal_row(t));
    Rat total;
    for (const auto& p : d.probabilities) total += p;
    CHECK(total == Rat(1));
  }
}

TEST_CASE("binomial shift distance") {
  CHECK(binom_statdist(16, 0) == Rat(0));
  CHECK(binom_statdist(16, 2) == statdist_oracle(16, 2));
  CHECK(binom_statdist(16, 2) <= Rat(10));
  CHECK(binom_statdist(64, 1) == statdist_oracle(64, 1));
  CHECK(binom_statdist(64, 1) <= Rat(20) / Rat(8));
  for (unsigned t : {4U, 9U, 25U})
    for (unsigned s = 0; s * s < t; ++s) CHECK(binom_statdist(t, s) == statdist_oracle(t, s));

  for (unsigned t : {4U, 16U, 64U, 256U}) {
    unsigned root = 2;
    while (root * root < t) ++root;
    for (unsigned k = 1; k <= 99; ++k) CHECK(binom_statdist(t, k * root / 100) <= Rat(20 * k) / Rat(100));
  }

  CHECK_THROWS_AS(binom_statdist(15, 1), ParameterError);
  CHECK_THROWS_AS(binom_statdist(16, 4), ParameterError);
  CHECK_THROWS_AS(binom_statdist(0, 0), ParameterError);
}

TEST_CASE("second moment bound") {
  std::vector<Rat> ones(5, Rat(1));
  SecondMoment c = second_moment_bound(ones);
  CHECK(c.lhs == Rat(1));
  CHECK(c.rhs == Rat(1));
  std::vector<Rat> two{Rat(0), Rat(2)};
  SecondMoment h = second_moment_bound(two);
  CHECK(h.lhs == Rat(1) / Rat(2));
  CHECK(h.rhs == Rat(1) / Rat(2));

  Rng rng(7);
  for (int i = 0; i < 2000; ++i) {
    std::vector<Rat> v;
    for (std::uint64_t j = 0, n = 1 + rng.below(10); j < n; ++j)
      v.push_back(rng.coin() ? Rat(0) : Rat(rng.below(50)) / Rat(1 + rng.below(7)));
    v.push_back(Rat(1 + rng.below(3)));
    SecondMoment s = second_moment_bound(v);
    CHECK(s.lhs >= s.rhs);
  }

  std::vector<Rat> none;
  std::vector<Rat> zeros(3, Rat(0));
  std::vector<Rat> neg{Rat(1), Rat(-1)};
  CHECK_THROWS_AS(second_moment_bound(none), ParameterError);
  CHECK_THROWS_AS(second_moment_bound(zeros), DomainError);
  CHECK_THROWS_AS(second_moment_bound(neg), DomainError);
}

TEST_CASE("enumerate or sample") {
  auto yes = [](std::uint64_t) { return true; };
  ProbEstimate all = enumerate_or_sample(100, yes, 1000, 1);
  CHECK(all.method == ProbMethod::Exact);
  CHECK(*all.exact == Rat(1));

  auto low = [](std::uint64_t w) { return w < 300; };
  ProbEstimate e = enumerate_or_sample(1024, low, std::uint64_t{1} << 20, 1);
  CHECK(e.method == ProbMethod::Exact);
  CHECK(*e.exact == Rat(300) / Rat(1024));
  CHECK(e.trials == 1024);

  ProbEstimate s1 = enumerate_or_sample(1024, low, 10, 5, {500, 0.99});
  ProbEstimate s2 = enumerate_or_sample(1024, low, 10, 5, {500, 0.99});
  CHECK(s1.method == ProbMethod::Sampled);
  CHECK_FALSE(s1.exact.has_value());
  CHECK(s1.successes == s2.successes);
  CHECK(s1.trials == 500);
  CHECK(s1.ci.lo <= s1.estimate);
  CHECK(s1.estimate <= s1.ci.hi);

  // Coverage of the sampled interval on spaces small enough to enumerate.
  unsigned covered = 0;
  const unsigned trials = 1000;
  for (unsigned i = 0; i < trials; ++i) {
    const std::uint64_t space = 512 + i;
    const std::uint64_t cut = (i * 37) % space;
    auto acc = [cut](std::uint64_t w) { return w < cut; };
    double exact = enumerate_or_sample(space, acc, space, 0).exact->to_double();
    ProbEstimate s = enumerate_or_sample(space, acc, 0, 1000 + i, {100, 0.99});
    covered += s.ci.lo <= exact && exact <= s.ci.hi ? 1 : 0;
  }
  CHECK(covered * 100 >= trials * 99);

  CHECK_THROWS_AS(enumerate_or_sample(0, yes, 10, 1), ParameterError);
  CHECK_THROWS_AS(enumerate_or_sample(100, yes, 10, 1, {0, 0.99}), ParameterError);
}

TEST_CASE("law tally keeps the smallest slack") {
  LawTally t("demo");
  t.record(Rat(3), Rat(1));
  t.record(Rat(1), Rat(1));
  CHECK(t.failures == 0);
  t.record(Rat(0), Rat(1) / Rat(2));
  CHECK(t.checks == 3);
  CHECK(t.failures == 1);
  CHECK(*t.min_slack == Rat(-1) / Rat(2));
}

TEST_CASE("stage laws on planted instances") {
  Rng rng(81);
  PipelineConfig cfg;
  for (int i = 0; i < 3; ++i) {
    PlantedCsp in = planted_csp(3, 2 + static_cast<std::uint32_t>(i), 5, 5, rng);
    CHECK(in.phi.satisfied_count(in.plant) == in.phi.m());
    StageLawReport rep = check_stage_laws(in, cfg, 60, 100 + static_cast<std::uint64_t>(i));
    CHECK(rep.completeness_failures.empty());
    REQUIRE(rep.laws.size() == 4);
    for (const auto& l : rep.laws) {
      CHECK(l.checks == 60);
      CHECK(l.failures == 0);
    }
    CHECK(rep.ok());
    CHECK(rep.sizes.size() == 5);
  }
  PlantedCsp bad = planted_csp(3, 2, 4, 4, rng);
  bad.plant.values[0] ^= 1U;
  if (bad.phi.satisfied_count(bad.plant) != bad.phi.m()) CHECK_THROWS_AS(check_stage_laws(bad, cfg, 1, 1), PreconditionError);

  PlantedCsp bin = planted_csp(2, 2, 4, 4, rng);
  StageLawReport red = check_reduction_law(bin, cfg, 12, 5);
  CHECK(red.ok());
  CHECK(red.laws.front().checks == 12);
  CHECK_THROWS_AS(check_reduction_law(planted_csp(2, 3, 4, 4, rng), cfg, 1, 1), PreconditionError);
}

TEST_CASE("circulant family and blowup factors") {
  Rng rng(82);
  CspInstance c = circulant_qcsp(6, 2, rng);
  CHECK(c.m() == 6);
  std::vector<int> occ(6, 0);
  for (const auto& k : c.constraints())
    for (auto v : k.scope) ++occ[v];
  CHECK(occ == std::vector<int>(6, 3));
  CHECK_THROWS_AS(circulant_qcsp(3, 2, rng), ParameterError);

  PipelineConfig cfg;
  const std::uint32_t ns[] = {4, 6, 8};
  BlowupSweep sw = measure_blowup(ns, 2, cfg, 9);
  REQUIRE(sw.rows.size() == 3);
  REQUIRE(sw.names.size() == 5);
  for (const auto& row : sw.rows) {
    const auto& s = row.sizes;
    CHECK(s[1].m == 3 * s[0].m);
    // Nice: one edge per pair of superimposed ports plus 2d self-loops per vertex.
    CHECK(s[3].m == s[2].m + (cfg.d / 2 + 2 * cfg.d) * s[2].n);
    CHECK(s[4].m == std::uint64_t{s[3].n} * 16 * 16 * 16);
  }
  for (double sp : sw.spread) CHECK(sp == doctest::Approx(0.0));
  CHECK(sw.factors[0][0] == doctest::Approx(3.0));
}

TEST_CASE("builtin fixtures match the DIMACS files") {
  const std::filesystem::path dir(PCPKIT_FIXTURE_DIR);
  for (const auto& fx : builtin_fixtures()) {
    auto path = dir / (fx.satisfiable ? "sat" : "unsat") / (fx.name + ".cnf");
    std::ifstream is(path);
    REQUIRE_MESSAGE(is.good(), path.string());
    CHECK(read_dimacs(is) == fx.cnf);
    CHECK(solve_brute_force(fx.cnf).has_value() == fx.satisfiable);
  }
}

TEST_CASE("suite passes and is byte-identical across runs") {
  PipelineConfig cfg;
  SuiteOptions opt;
  opt.law_assignments = 20;
  auto quiet = run_suite(cfg, opt);
  for (const auto& r : quiet) CHECK_MESSAGE(r.passed(), r.name);

  const auto base = std::filesystem::temp_directory_path() / "pcpkit_suite_test";
  std::filesystem::remove_all(base);
  opt.out_dir = (base / "a").string();
  auto a = run_suite(cfg, opt);
  opt.out_dir = (base / "b").string();
  auto b = run_suite(cfg, opt);
  std::size_t files = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(base / "a")) {
    if (!entry.is_regular_file()) continue;
    auto rel = std::filesystem::relative(entry.path(), base / "a");
    CHECK_MESSAGE(slurp(entry.path()) == slurp(base / "b" / rel), rel.string());
    ++files;
  }
  CHECK(files > 10);
  std::string manifest = slurp(base / "a" / "manifest.json");
  CHECK(manifest.find("wall_seconds") == std::string::npos);
  CHECK(reports_json(a, cfg, true).find("wall_seconds") != std::string::npos);
  CHECK(reports_csv(a).rfind("experiment,kind,key,value\n", 0) == 0);
  std::filesystem::remove_all(base);
}
