// pcpkit command line: expanders, CSPs, Hadamard tests, the gap pipeline, statistics and the experiment suite.

#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "pcpkit/errors.hpp"
#include "pcpkit/hadamard.hpp"
#include "pcpkit/harness.hpp"
#include "pcpkit/specgraph.hpp"

namespace {

using namespace pcpkit;
using ordered_json = nlohmann::ordered_json;

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> budget;
  std::string out;
  std::string format = "json";
};

PipelineConfig load_config(const Globals& g) {
  PipelineConfig cfg;
  if (!g.config.empty()) {
    std::ifstream is(g.config);
    if (!is) throw ResourceError("cannot open config " + g.config);
    cfg = read_config(is);
  }
  if (g.seed) cfg.seed = *g.seed;
  if (g.budget) cfg.val_budget = *g.budget;
  cfg.validate();
  return cfg;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ResourceError("cannot open " + path);
  return is;
}

void write_out(const std::string& path, const std::string& text) {
  std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream os(p, std::ios::binary);
  if (!os) throw ResourceError("cannot write " + path);
  os << text;
}

void emit(const Globals& g, const ordered_json& j) {
  if (g.format == "csv") {
    std::cout << "key,value\n";
    for (const auto& [k, v] : j.items()) std::cout << k << ',' << (v.is_string() ? v.get<std::string>() : v.dump()) << '\n';
  } else {
    std::cout << j.dump(2) << '\n';
  }
}

ordered_json spectral_json(const SpectralEstimate& s) {
  return {{"lambda_upper", s.lambda_upper.str()},
          {"lambda_approx", s.lambda_upper.to_double()},
          {"method", to_string(s.method)},
          {"certified", s.certified()},
          {"residual", s.residual.str()}};
}

Rat parse_rat(const std::string& s) { return Rat::parse(s); }

int expander_build(const Globals& g, std::uint32_t n, std::uint32_t d, const std::string& target) {
  PipelineConfig cfg = load_config(g);
  CertifiedGraph c = find_base_expander(n, d, parse_rat(target), cfg.seed, cfg.expander_attempts, cfg.spectral());
  ordered_json j{{"n", c.graph.n()}, {"d", c.graph.d()}, {"attempts", c.attempts}, {"seed", cfg.seed}};
  j["lambda"] = spectral_json(c.lambda);
  std::ostringstream os;
  write_rotgraph(os, c.graph);
  if (!g.out.empty()) {
    write_out(g.out + "/expander.rot", os.str());
    j["artifact"] = g.out + "/expander.rot";
  }
  emit(g, j);
  return kPass;
}

int expander_check(const Globals& g, const std::string& file, const std::string& target) {
  PipelineConfig cfg = load_config(g);
  auto is = open_in(file);
  RotationGraph graph = read_rotgraph(is);
  SpectralEstimate s = lambda_auto(graph, cfg.spectral());
  ordered_json j{{"n", graph.n()}, {"d", graph.d()}};
  j["lambda"] = spectral_json(s);
  bool ok = true;
  if (!target.empty()) {
    ok = s.certified() && s.lambda_upper <= parse_rat(target);
    j["target"] = target;
    j["meets_target"] = ok;
  }
  emit(g, j);
  return ok ? kPass : kFail;
}

int csp_val(const Globals& g, const std::string& file) {
  PipelineConfig cfg = load_config(g);
  auto is = open_in(file);
  CspInstance phi = read_csp(is);
  GapEvidence gap = measure_gap(phi, cfg);
  ordered_json j{{"n", phi.n()}, {"m", phi.m()}, {"q", phi.q()}, {"W", phi.W()}};
  j["method"] = gap.method == GapMethod::Exact ? "exact" : "local_search";
  j["val"] = (Rat(1) - gap.gap).str();
  j["gap"] = gap.gap.str();
  emit(g, j);
  return kPass;
}

int csp_info(const Globals& g, const std::string& file) {
  PipelineConfig cfg = load_config(g);
  auto is = open_in(file);
  CspInstance phi = read_csp(is);
  ordered_json j{{"n", phi.n()}, {"m", phi.m()}, {"q", phi.q()}, {"W", phi.W()}};
  ConstraintGraph cg = constraint_graph(phi);
  j["regular"] = cg.regular;
  if (cg.graph) j["degree"] = cg.graph->d();
  if (phi.q() <= 2) {
    NiceReport nice = is_nice(phi, cfg.spectral());
    j["nice"] = nice.nice;
    j["nice_failures"] = nice.failures;
    if (nice.lambda) j["lambda"] = spectral_json(*nice.lambda);
  }
  emit(g, j);
  return kPass;
}

int hadamard_blr(const Globals& g, unsigned k) {
  if (k < 1 || k > 4) throw ParameterError("hadamard blr enumerates every function and needs 1 <= k <= 4");
  const std::uint64_t size = std::uint64_t{1} << k;
  const std::uint64_t count = std::uint64_t{1} << size;
  std::uint64_t failures = 0;
  Rat worst_slack(1);
  for (std::uint64_t code = 0; code < count; ++code) {
    std::vector<std::uint8_t> table(size);
    for (std::uint64_t x = 0; x < size; ++x) table[x] = (code >> x) & 1U;
    BoolFn f(k, table);
    Rat bound = std::max(Rat(29) / Rat(32), Rat(1) / Rat(2) + nearest_linear(f).agreement / Rat(2));
    Rat slack = bound - blr_pass_rate(f);
    if (slack.sign() < 0) ++failures;
    worst_slack = std::min(worst_slack, slack);
  }
  emit(g, ordered_json{{"k", k}, {"functions", count}, {"failures", failures}, {"min_slack", worst_slack.str()}});
  return failures == 0 ? kPass : kFail;
}

int hadamard_verify(const Globals& g, const std::string& file) {
  PipelineConfig cfg = load_config(g);
  auto is = open_in(file);
  Cnf cnf = read_dimacs(is);
  QuadSystem sys = cnf_to_quadsys(cnf);
  ordered_json j{{"variables", sys.n1}, {"equations", sys.m()}, {"rounds", cfg.m0}};
  bool ok = true;
  if (auto x = solve_brute_force(cnf)) {
    ExpPcpProof p = exp_pcp_prove(sys, quadsys_witness(cnf, *x));
    AcceptResult a = exp_pcp_accept_prob(sys, p, cfg.m0, AcceptMode::Exact);
    j["satisfiable"] = true;
    j["honest_accept"] = a.exact->str();
    ok = *a.exact == Rat(1);
  } else {
    AdversaryOptions opt;
    opt.seed = cfg.seed;
    AdversaryReport adv = adversary_sweep(sys, opt);
    Rat rounds = pow(adv.worst, cfg.m0);
    j["satisfiable"] = false;
    j["worst_single_round"] = adv.worst.str();
    j["worst_family"] = adv.worst_family;
    j["worst_all_rounds"] = rounds.str();
    j["proofs"] = adv.proofs;
    ok = adv.worst <= Rat(63) / Rat(64) && rounds <= Rat(1) / Rat(2);
  }
  j["passed"] = ok;
  emit(g, j);
  return ok ? kPass : kFail;
}

int pipeline_run(const Globals& g, const std::string& file, std::optional<unsigned> rounds) {
  PipelineConfig cfg = load_config(g);
  auto is = open_in(file);
  Cnf cnf = read_dimacs(is);
  std::optional<std::string> out;
  if (!g.out.empty()) out = g.out;
  PipelineResult r = run_pipeline(cnf, rounds.value_or(cfg.max_rounds), cfg, out);
  if (out && r.gap.gap.is_zero()) {
    if (auto x = solve_brute_force(cnf)) {
      PcpProof proof = honest_pcp_proof(cnf, *x);
      std::string bits;
      for (auto b : proof.bits) bits.push_back(b ? '1' : '0');
      write_out(*out + "/proof.bits", bits + "\n");
    }
  }
  if (g.format == "csv") {
    std::cout << "stage,n,m,alphabet_log2,arity\n";
    for (const auto& s : r.stages) std::cout << s.stage << ',' << s.n << ',' << s.m << ',' << s.alphabet_log2 << ',' << s.arity << '\n';
  } else {
    std::cout << pipeline_manifest(r, cfg);
  }
  return kPass;
}

int pipeline_verify(const Globals& g, const std::string& desc_file, const std::string& proof_file) {
  PipelineConfig cfg = load_config(g);
  auto ds = open_in(desc_file);
  VerifierDescriptor desc = read_descriptor(ds);
  auto ps = open_in(proof_file);
  PcpProof proof;
  char c;
  while (ps.get(c)) {
    if (c == '0' || c == '1') proof.bits.push_back(static_cast<std::uint8_t>(c - '0'));
    else if (!std::isspace(static_cast<unsigned char>(c))) throw ParseError("proof file holds only 0 and 1");
  }
  if (proof.bits.size() != desc.proof_bits) throw ShapeError("proof length does not match the descriptor");
  Rat accept = pcp_accept_prob(desc, proof);
  bool all = np_witness_check(desc, proof, g.budget.value_or(std::uint64_t{1} << 20));
  emit(g, ordered_json{{"proof_bits", desc.proof_bits},
                       {"parallel", desc.parallel},
                       {"accept_prob", accept.str()},
                       {"accepts_every_w", all},
                       {"seed", cfg.seed}});
  return all ? kPass : kFail;
}

int stats_binom(const Globals& g, unsigned t, unsigned shift) {
  Rat v = binom_statdist(t, shift);
  mpz_class root = sqrt(mpz_class(t));
  Rat bound = Rat(20 * shift) / Rat(root, 1);
  bool ok = v <= bound;
  emit(g, ordered_json{{"t", t}, {"shift", shift}, {"statdist", v.str()}, {"approx", v.to_double()}, {"bound_20_delta", bound.str()}, {"within_bound", ok}});
  return ok ? kPass : kFail;
}

int stats_moment(const Globals& g, const std::vector<std::string>& values) {
  std::vector<Rat> vals;
  for (const auto& s : values) vals.push_back(parse_rat(s));
  SecondMoment sm = second_moment_bound(vals);
  bool ok = sm.lhs >= sm.rhs;
  emit(g, ordered_json{{"count", vals.size()}, {"lhs", sm.lhs.str()}, {"rhs", sm.rhs.str()}, {"holds", ok}});
  return ok ? kPass : kFail;
}

int suite_run(const Globals& g, unsigned assignments, bool timing) {
  PipelineConfig cfg = load_config(g);
  SuiteOptions opt;
  if (!g.out.empty()) opt.out_dir = g.out;
  if (g.budget) opt.budget = *g.budget;
  opt.law_assignments = assignments;
  std::vector<ExperimentReport> reports = run_suite(cfg, opt);
  bool ok = true;
  for (const auto& r : reports) {
    ok = ok && r.passed();
    std::cerr << r.name << ' ' << (r.passed() ? "passed" : "FAILED") << ' ' << r.wall_seconds << "s\n";
  }
  std::cout << (g.format == "csv" ? reports_csv(reports) : reports_json(reports, cfg, timing));
  return ok ? kPass : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pcpkit: gap amplification toolkit"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "pcpconfig v1 file")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "seed for every random choice");
  app.add_option("--budget", g.budget, "enumeration budget");
  app.add_option("--out", g.out, "artifact directory");
  app.add_option("--format", g.format, "report format")->check(CLI::IsMember({"json", "csv"}));

  std::function<int()> action;

  auto* expander = app.add_subcommand("expander", "certified expanders")->require_subcommand(1);
  std::uint32_t n = 16, d = 4;
  std::string target = "9/10", graph_file, check_target;
  auto* eb = expander->add_subcommand("build", "search a certified random regular graph");
  eb->add_option("--n", n, "vertices");
  eb->add_option("--d", d, "degree");
  eb->add_option("--target", target, "lambda bound as a rational");
  eb->callback([&] { action = [&] { return expander_build(g, n, d, target); }; });
  auto* ec = expander->add_subcommand("check", "bound lambda of a rotation graph file");
  ec->add_option("graph", graph_file)->required();
  ec->add_option("--target", check_target, "fail unless certified at or below this rational");
  ec->callback([&] { action = [&] { return expander_check(g, graph_file, check_target); }; });

  auto* csp = app.add_subcommand("csp", "constraint satisfaction instances")->require_subcommand(1);
  std::string csp_file;
  auto* cv = csp->add_subcommand("val", "value of an instance, exact within the budget");
  cv->add_option("instance", csp_file)->required();
  cv->callback([&] { action = [&] { return csp_val(g, csp_file); }; });
  auto* ci = csp->add_subcommand("info", "shape, regularity and niceness");
  ci->add_option("instance", csp_file)->required();
  ci->callback([&] { action = [&] { return csp_info(g, csp_file); }; });

  auto* had = app.add_subcommand("hadamard", "linearity test and the exponential-size verifier")->require_subcommand(1);
  unsigned k = 3;
  std::string cnf_file;
  auto* hb = had->add_subcommand("blr", "linearity test soundness over every function on k bits");
  hb->add_option("--k", k, "input bits (1..4)");
  hb->callback([&] { action = [&] { return hadamard_blr(g, k); }; });
  auto* hv = had->add_subcommand("verify", "completeness or adversarial soundness on a small CNF");
  hv->add_option("cnf", cnf_file)->required();
  hv->callback([&] { action = [&] { return hadamard_verify(g, cnf_file); }; });

  auto* pipe = app.add_subcommand("pipeline", "CNF to constant-query verifier")->require_subcommand(1);
  std::optional<unsigned> rounds;
  std::string desc_file, proof_file;
  auto* pr = pipe->add_subcommand("run", "run the reduction and write artifacts to --out");
  pr->add_option("cnf", cnf_file)->required();
  pr->add_option("--rounds", rounds, "amplification rounds");
  pr->callback([&] { action = [&] { return pipeline_run(g, cnf_file, rounds); }; });
  auto* pv = pipe->add_subcommand("verify", "check a proof against a verifier descriptor");
  pv->add_option("descriptor", desc_file)->required();
  pv->add_option("proof", proof_file)->required();
  pv->callback([&] { action = [&] { return pipeline_verify(g, desc_file, proof_file); }; });

  auto* st = app.add_subcommand("stats", "binomial shift distance and the second moment bound")->require_subcommand(1);
  unsigned t = 16, shift = 2;
  std::vector<std::string> values;
  auto* sbn = st->add_subcommand("binom", "distance between S_t and S_{t +- shift}");
  sbn->add_option("--t", t, "trials, a perfect square");
  sbn->add_option("--shift", shift, "shift below sqrt(t)");
  sbn->callback([&] { action = [&] { return stats_binom(g, t, shift); }; });
  auto* smo = st->add_subcommand("moment", "Pr[V>0] against E[V]^2/E[V^2]");
  smo->add_option("values", values, "nonnegative rationals")->required();
  smo->callback([&] { action = [&] { return stats_moment(g, values); }; });

  auto* suite = app.add_subcommand("suite", "experiment suite")->require_subcommand(1);
  unsigned assignments = 100;
  bool timing = false;
  auto* sr = suite->add_subcommand("run", "run every experiment; manifest and artifacts go to --out");
  sr->add_option("--assignments", assignments, "assignments per stage law");
  sr->add_flag("--timing", timing, "include wall-clock seconds in the report on stdout");
  sr->callback([&] { action = [&] { return suite_run(g, assignments, timing); }; });

  // Global flags are accepted after the subcommand too.
  for (auto* top : app.get_subcommands({})) {
    top->fallthrough();
    for (auto* leaf : top->get_subcommands({})) leaf->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }
  try {
    return action();
  } catch (const pcpkit::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
