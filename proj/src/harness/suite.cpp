#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pcpkit/errors.hpp"
#include "pcpkit/hadamard.hpp"
#include "pcpkit/harness.hpp"
#include "pcpkit/rng.hpp"
#include "pcpkit/specgraph.hpp"

namespace pcpkit {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

void ExperimentReport::check(bool ok, const std::string& what) {
  if (!ok) failures.push_back(what);
}

namespace {

void write_file(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ResourceError("cannot write " + path.string());
  os << text;
}

// Artifacts are written only when the suite has an output directory.
struct Sink {
  std::optional<fs::path> root;

  void put(ExperimentReport& r, const std::string& rel, const std::string& text) const {
    if (!root) return;
    write_file(*root / rel, text);
    r.artifacts.push_back(rel);
  }
  std::optional<std::string> dir(ExperimentReport& r, const std::string& rel) const {
    if (!root) return std::nullopt;
    r.artifacts.push_back(rel + "/");
    return (*root / rel).string();
  }
};

void add_law(ExperimentReport& r, const LawTally& law) {
  r.laws.push_back(law);
  r.check(law.failures == 0, "law " + law.law + " failed on " + std::to_string(law.failures) + " assignments");
}

ExperimentReport statistics(std::uint64_t seed, const Sink& sink) {
  ExperimentReport r{"statistics", seed};
  std::ostringstream csv;
  csv << "t,shift,delta,statdist,bound\n";
  unsigned points = 0;
  for (unsigned t : {4U, 16U, 64U, 256U}) {
    unsigned root = 1;
    while ((root + 1) * (root + 1) <= t) ++root;
    for (unsigned k = 1; k <= 99; ++k) {
      unsigned shift = k * root / 100;
      Rat v = binom_statdist(t, shift);
      Rat bound = Rat(20 * k) / Rat(100);
      r.check(v <= bound, "binom_statdist(" + std::to_string(t) + ", " + std::to_string(shift) + ") above 20 delta");
      csv << t << ',' << shift << ',' << k << "/100," << v.str() << ',' << bound.str() << '\n';
      ++points;
    }
  }
  r.metric("binom_grid_points", std::to_string(points));
  sink.put(r, "statistics/binom_statdist.csv", csv.str());

  Rng rng(Rng(seed).split(1).next());
  unsigned multisets = 1000;
  for (unsigned i = 0; i < multisets; ++i) {
    std::vector<Rat> vals;
    std::size_t size = 1 + rng.below(12);
    for (std::size_t j = 0; j < size; ++j)
      vals.push_back(rng.below(3) == 0 ? Rat(0) : Rat(rng.below(20)) / Rat(1 + rng.below(5)));
    bool any = false;
    for (const auto& v : vals) any = any || !v.is_zero();
    if (!any) vals.front() = Rat(1);
    SecondMoment sm = second_moment_bound(vals);
    r.check(sm.lhs >= sm.rhs, "second moment inequality failed on multiset " + std::to_string(i));
  }
  r.metric("second_moment_multisets", std::to_string(multisets));

  // Sampled intervals against exact values on an enumerable control space.
  const std::uint64_t space = 4096;
  unsigned covered = 0, trials = 400;
  for (unsigned i = 0; i < trials; ++i) {
    std::uint64_t cut = (i * 97) % (space + 1);
    auto acc = [cut](std::uint64_t w) { return w < cut; };
    ProbEstimate s = enumerate_or_sample(space, acc, 0, seed + i, {200, 0.99});
    double exact = static_cast<double>(cut) / static_cast<double>(space);
    covered += s.ci.lo <= exact && exact <= s.ci.hi ? 1 : 0;
  }
  r.metric("sampling_coverage", std::to_string(covered) + "/" + std::to_string(trials));
  r.check(covered * 100 >= trials * 99, "sampled interval coverage below 99%");
  auto third = [](std::uint64_t w) { return w % 3 == 0; };
  r.probabilities.push_back({"control_exact", enumerate_or_sample(space, third, space, seed)});
  r.probabilities.push_back({"control_sampled", enumerate_or_sample(space, third, 0, seed, {1000, 0.99})});
  return r;
}

ExperimentReport expander(std::uint64_t seed, const Sink& sink) {
  ExperimentReport r{"expander", seed};
  CertifiedGraph g = find_base_expander(16, 4, Rat(9) / Rat(10), seed);
  r.metric("vertices", std::to_string(g.graph.n()));
  r.metric("degree", std::to_string(g.graph.d()));
  r.metric("lambda_upper", g.lambda.lambda_upper.str());
  r.metric("lambda_method", to_string(g.lambda.method));
  r.metric("attempts", std::to_string(g.attempts));
  r.check(g.lambda.certified() && g.lambda.lambda_upper <= Rat(9) / Rat(10), "base expander not certified at 9/10");
  std::ostringstream os;
  write_rotgraph(os, g.graph);
  sink.put(r, "expander/base_16_4.rot", os.str());
  return r;
}

ExperimentReport blr(std::uint64_t seed) {
  ExperimentReport r{"blr", seed};
  LawTally law{"blr_soundness"};
  for (std::uint64_t code = 0; code < 256; ++code) {
    std::vector<std::uint8_t> table(8);
    for (unsigned x = 0; x < 8; ++x) table[x] = (code >> x) & 1U;
    BoolFn f(3, table);
    Rat agree = nearest_linear(f).agreement;
    law.record(std::max(Rat(29) / Rat(32), Rat(1) / Rat(2) + agree / Rat(2)), blr_pass_rate(f));
  }
  add_law(r, law);
  return r;
}

ExperimentReport exp_pcp(std::uint64_t seed, const PipelineConfig& cfg) {
  ExperimentReport r{"exp_pcp", seed};
  for (const auto& fx : builtin_fixtures()) {
    if (fx.cnf.num_vars > 3 || fx.cnf.max_width() > 3 || fx.cnf.clauses.size() > 4) continue;
    QuadSystem sys = cnf_to_quadsys(fx.cnf);
    if (fx.satisfiable) {
      auto x = solve_brute_force(fx.cnf);
      ExpPcpProof p = exp_pcp_prove(sys, quadsys_witness(fx.cnf, *x));
      AcceptResult a = exp_pcp_accept_prob(sys, p, 1, AcceptMode::Exact);
      r.metric(fx.name + ".honest_accept", a.exact->str());
      r.check(*a.exact == Rat(1), fx.name + ": honest proof rejected");
      continue;
    }
    AdversaryOptions opt;
    opt.seed = seed;
    AdversaryReport adv = adversary_sweep(sys, opt);
    Rat rounds = pow(adv.worst, cfg.m0);
    r.metric(fx.name + ".worst_single_round", adv.worst.str());
    r.metric(fx.name + ".worst_family", adv.worst_family);
    r.metric(fx.name + ".worst_all_rounds", rounds.str());
    r.metric(fx.name + ".proofs", std::to_string(adv.proofs));
    r.check(adv.worst <= Rat(63) / Rat(64), fx.name + ": single round above 63/64");
    r.check(rounds <= Rat(1) / Rat(2), fx.name + ": rounds above 1/2");
  }
  return r;
}

ExperimentReport stage_laws(std::uint64_t seed, const PipelineConfig& cfg, unsigned assignments) {
  ExperimentReport r{"stage_laws", seed};
  Rng rng(seed);
  for (int i = 0; i < 2; ++i) {
    PlantedCsp in = planted_csp(3, 2, 4 + 2 * i, 4 + 2 * i, rng);
    StageLawReport rep = check_stage_laws(in, cfg, assignments, rng.next());
    for (const auto& c : rep.completeness_failures) r.check(false, "completeness lost at " + c);
    for (const auto& l : rep.laws) add_law(r, l);
    if (i == 0) r.stages = rep.sizes;
  }
  PlantedCsp bin = planted_csp(2, 2, 4, 5, rng);
  StageLawReport red = check_reduction_law(bin, cfg, std::max(1U, assignments / 10), rng.next());
  for (const auto& c : red.completeness_failures) r.check(false, "completeness lost at " + c);
  for (const auto& l : red.laws) add_law(r, l);
  return r;
}

ExperimentReport blowup(std::uint64_t seed, const PipelineConfig& cfg, const Sink& sink) {
  ExperimentReport r{"blowup", seed};
  const std::uint32_t ns[] = {4, 6, 8};
  BlowupSweep sw = measure_blowup(ns, 2, cfg, seed);
  std::ostringstream csv;
  csv << "n";
  for (const auto& name : sw.names) csv << ',' << name;
  csv << '\n';
  for (std::size_t i = 0; i < sw.rows.size(); ++i) {
    csv << sw.rows[i].n;
    for (const auto& f : sw.factors) csv << ',' << f[i];
    csv << '\n';
  }
  for (std::size_t k = 0; k < sw.names.size(); ++k) {
    std::ostringstream v;
    v << sw.factors[k].front() << " spread " << sw.spread[k];
    r.metric(sw.names[k] + ".factor", v.str());
    r.check(sw.spread[k] <= 0.01, sw.names[k] + ": blowup factor varies by more than 1%");
  }
  r.stages = sw.rows.back().sizes;
  sink.put(r, "blowup/factors.csv", csv.str());
  return r;
}

ExperimentReport pipeline(const Fixture& fx, const PipelineConfig& cfg, const SuiteOptions& opt, const Sink& sink) {
  ExperimentReport r{"pipeline/" + fx.name, cfg.seed};
  PipelineResult res = run_pipeline(fx.cnf, cfg.max_rounds, cfg, sink.dir(r, "pipeline/" + fx.name));
  r.stages = res.stages;
  r.metric("gap", res.gap.gap.str());
  r.metric("gap_method", res.gap.method == GapMethod::Exact ? "exact" : "local_search");
  r.metric("parallel", std::to_string(res.descriptor.parallel));
  r.metric("proof_bits", std::to_string(res.descriptor.proof_bits));
  const VerifierDescriptor& desc = res.descriptor;
  std::uint64_t space = 0;
  try {
    space = desc.index_space();
  } catch (const ResourceError&) {
    space = 0;
  }
  if (fx.satisfiable) {
    r.check(res.gap.gap.is_zero(), "satisfiable fixture has a positive gap");
    auto x = solve_brute_force(fx.cnf);
    PcpProof proof = honest_pcp_proof(fx.cnf, *x);
    r.check(np_witness_check(desc, proof, opt.budget), "honest proof rejected");
    r.probabilities.push_back({"honest_accept", {ProbMethod::Exact, pcp_accept_prob(desc, proof), 1, {1, 1}}});
    return r;
  }
  r.check(res.reached_epsilon0 && res.gap.method == GapMethod::Exact && res.gap.gap >= cfg.epsilon0,
          "gap below epsilon0");
  // Every proof is an assignment of the final instance's variables; all of them fit here.
  if (desc.proof_bits <= 16) {
    Rat worst;
    PcpProof best;
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << desc.proof_bits); ++code) {
      PcpProof p{std::vector<std::uint8_t>(desc.proof_bits)};
      for (std::uint64_t b = 0; b < desc.proof_bits; ++b) p.bits[b] = (code >> b) & 1U;
      Rat a = pcp_accept_prob(desc, p);
      if (a > worst || code == 0) {
        worst = a;
        best = p;
      }
    }
    r.check(worst <= Rat(1) / Rat(2), "some proof is accepted with probability above 1/2");
    ProbEstimate est;
    if (space > 0) {
      est = enumerate_or_sample(space, [&](std::uint64_t w) { return pcp_verify(desc, best, w); }, opt.budget, cfg.seed);
    } else {
      est = {ProbMethod::Exact, worst, worst.to_double(), {worst.to_double(), worst.to_double()}};
    }
    if (est.exact) r.check(*est.exact == worst, "enumerated acceptance disagrees with the product formula");
    r.probabilities.push_back({"best_proof_accept", est});
  }
  return r;
}

template <typename F>
ExperimentReport timed(F&& body) {
  auto start = std::chrono::steady_clock::now();
  ExperimentReport r = body();
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return r;
}

ordered_json size_json(const StageSize& s) {
  return {{"stage", s.stage}, {"n", s.n}, {"m", s.m}, {"alphabet_log2", s.alphabet_log2}, {"arity", s.arity}};
}

ordered_json prob_json(const ProbEstimate& p) {
  ordered_json j{{"method", to_string(p.method)}};
  if (p.exact) j["exact"] = p.exact->str();
  j["estimate"] = p.estimate;
  j["ci"] = {p.ci.lo, p.ci.hi};
  j["trials"] = p.trials;
  j["successes"] = p.successes;
  return j;
}

}  // namespace

std::vector<ExperimentReport> run_suite(const PipelineConfig& cfg, const SuiteOptions& opt) {
  cfg.validate();
  Sink sink;
  if (opt.out_dir) sink.root = fs::path(*opt.out_dir);
  Rng root(cfg.seed);
  std::vector<ExperimentReport> out;
  out.push_back(timed([&] { return statistics(root.split(1).next(), sink); }));
  out.push_back(timed([&] { return expander(root.split(2).next(), sink); }));
  out.push_back(timed([&] { return blr(root.split(3).next()); }));
  out.push_back(timed([&] { return exp_pcp(root.split(4).next(), cfg); }));
  out.push_back(timed([&] { return stage_laws(root.split(5).next(), cfg, opt.law_assignments); }));
  out.push_back(timed([&] { return blowup(root.split(6).next(), cfg, sink); }));
  for (const auto& fx : builtin_fixtures()) out.push_back(timed([&] { return pipeline(fx, cfg, opt, sink); }));
  if (sink.root) write_file(*sink.root / "manifest.json", reports_json(out, cfg, opt.include_timing));
  return out;
}

std::string reports_json(const std::vector<ExperimentReport>& reports, const PipelineConfig& cfg, bool include_timing) {
  ordered_json config = ordered_json::object();
  std::ostringstream os;
  write_config(os, cfg);
  std::istringstream is(os.str());
  std::string line;
  while (std::getline(is, line)) {
    auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    config[line.substr(0, eq)] = line.substr(eq + 3);
  }
  ordered_json j{{"format", "pcpkit report v1"}, {"seed", cfg.seed}, {"config", config}};
  bool passed = true;
  ordered_json exps = ordered_json::array();
  for (const auto& r : reports) {
    passed = passed && r.passed();
    ordered_json e{{"name", r.name}, {"seed", r.seed}, {"passed", r.passed()}};
    ordered_json metrics = ordered_json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = v;
    e["metrics"] = metrics;
    ordered_json stages = ordered_json::array();
    for (std::size_t i = 0; i < r.stages.size(); ++i) {
      ordered_json s = size_json(r.stages[i]);
      if (i > 0 && r.stages[i - 1].m > 0)
        s["blowup"] = static_cast<double>(r.stages[i].m) / static_cast<double>(r.stages[i - 1].m);
      stages.push_back(s);
    }
    e["stages"] = stages;
    ordered_json laws = ordered_json::array();
    for (const auto& l : r.laws) {
      ordered_json lj{{"law", l.law}, {"checks", l.checks}, {"failures", l.failures}};
      if (l.min_slack) lj["min_slack"] = l.min_slack->str();
      laws.push_back(lj);
    }
    e["laws"] = laws;
    ordered_json probs = ordered_json::array();
    for (const auto& p : r.probabilities) {
      ordered_json pj = prob_json(p.p);
      pj["name"] = p.name;
      probs.push_back(pj);
    }
    e["probabilities"] = probs;
    e["artifacts"] = r.artifacts;
    e["failures"] = r.failures;
    if (include_timing) e["wall_seconds"] = r.wall_seconds;
    exps.push_back(e);
  }
  j["passed"] = passed;
  j["experiments"] = exps;
  return j.dump(2) + "\n";
}

std::string reports_csv(const std::vector<ExperimentReport>& reports) {
  std::ostringstream os;
  os << "experiment,kind,key,value\n";
  for (const auto& r : reports) {
    os << r.name << ",status,passed," << (r.passed() ? "true" : "false") << '\n';
    for (const auto& [k, v] : r.metrics) os << r.name << ",metric," << k << ',' << v << '\n';
    for (const auto& l : r.laws)
      os << r.name << ",law," << l.law << ',' << l.checks - l.failures << '/' << l.checks << '\n';
    for (const auto& p : r.probabilities)
      os << r.name << ",probability," << p.name << ','
         << (p.p.exact ? p.p.exact->str() : std::to_string(p.p.ci.lo) + ".." + std::to_string(p.p.ci.hi)) << '\n';
    for (const auto& f : r.failures) os << r.name << ",failure,," << f << '\n';
  }
  return os.str();
}

}  // namespace pcpkit
