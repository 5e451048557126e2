#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "json.hpp"

#include "pcpkit/dinur.hpp"
#include "pcpkit/errors.hpp"

namespace pcpkit {

namespace {

StageSize size_of(const std::string& stage, const CspInstance& phi) {
  return {stage, phi.n(), phi.m(), std::log2(static_cast<double>(phi.W())), phi.q()};
}

void check_powered_fits(const PoweredInstance& p, const PipelineConfig& cfg) {
  const double cap = std::log2(static_cast<double>(cfg.W));
  if (p.alphabet_log2() > cap) {
    std::ostringstream msg;
    msg << "powered alphabet 2^" << p.alphabet_log2() << " exceeds the reduction cap " << cfg.W;
    throw ResourceError(msg.str());
  }
  throw ResourceError("powered instance with " + std::to_string(p.m()) + " walk constraints is not materialized");
}

}  // namespace

AmplifyStages amplify_stages(const CspInstance& phi, const PipelineConfig& cfg) {
  cfg.validate();
  AmplifyStages s;
  s.sizes.push_back(size_of("input", phi));
  s.two_csp = qcsp_to_2cspW(phi);
  s.sizes.push_back(size_of("two_csp", s.two_csp));
  s.regular = regularize(s.two_csp, cfg);
  s.sizes.push_back(size_of("regularize", s.regular.psi));
  s.nice = make_nice(s.regular.psi, cfg);
  s.sizes.push_back(size_of("make_nice", s.nice.psi));
  s.powered.emplace(power_t(s.nice, cfg.t, cfg.path_budget));
  s.sizes.push_back({"power", s.powered->n(), s.powered->m(), s.powered->alphabet_log2(), 2});
  return s;
}

ReducedInstance amplify_once(const CspInstance& phi, const PipelineConfig& cfg) {
  AmplifyStages s = amplify_stages(phi, cfg);
  check_powered_fits(*s.powered, cfg);
  return alphabet_reduce(s.nice.psi, cfg);
}

std::uint64_t VerifierDescriptor::index_space() const {
  const std::uint64_t m = base_constraints();
  if (m == 0) return 1;
  std::uint64_t r = 1;
  for (unsigned i = 0; i < parallel; ++i) {
    if (r > (std::uint64_t{1} << 62) / m) throw ResourceError("verifier index space overflows");
    r *= m;
  }
  return r;
}

std::vector<std::uint64_t> VerifierDescriptor::constraints_of(std::uint64_t w) const {
  if (w >= index_space()) throw IndexError("randomness outside the index space");
  const std::uint64_t m = base_constraints();
  if (m == 0) return {};
  std::vector<std::uint64_t> cs(parallel);
  for (unsigned i = parallel; i-- > 0;) {
    cs[i] = w % m;
    w /= m;
  }
  return cs;
}

std::vector<std::uint64_t> VerifierDescriptor::queries(std::uint64_t w) const {
  std::vector<std::uint64_t> q;
  for (auto c : constraints_of(w)) q.insert(q.end(), query_map[c].begin(), query_map[c].end());
  return q;
}

bool VerifierDescriptor::decide(std::uint64_t w, std::span<const std::uint8_t> answers) const {
  auto cs = constraints_of(w);
  std::size_t at = 0;
  for (auto c : cs) {
    const auto r = query_map[c].size();
    if (at + r > answers.size()) throw ShapeError("too few answers for the queried positions");
    std::size_t idx = 0;
    for (std::size_t j = 0; j < r; ++j) idx = (idx << 1) | (answers[at + j] & 1U);
    at += r;
    if (!tables[c][idx]) return false;
  }
  if (at != answers.size()) throw ShapeError("too many answers for the queried positions");
  return true;
}

void VerifierDescriptor::validate() const {
  if (parallel < 1) throw ParameterError("parallel repetition count must be positive");
  if (query_map.size() != tables.size()) throw ShapeError("query map and tables differ in length");
  for (std::size_t c = 0; c < query_map.size(); ++c) {
    const auto& q = query_map[c];
    if (q.size() > 20) throw ShapeError("constraint arity too large");
    if (tables[c].size() != (std::size_t{1} << q.size())) throw ShapeError("table size must be 2^arity");
    for (std::size_t j = 0; j < q.size(); ++j) {
      if (q[j] >= proof_bits) throw ShapeError("query position outside the proof");
      for (std::size_t k = 0; k < j; ++k)
        if (q[k] == q[j]) throw ShapeError("repeated query position within a constraint");
    }
    for (auto b : tables[c])
      if (b > 1) throw ShapeError("table entries must be bits");
  }
}

VerifierDescriptor make_descriptor(const CspInstance& binary, unsigned parallel) {
  if (binary.W() != 2) throw PreconditionError("descriptor needs a Boolean instance");
  VerifierDescriptor d;
  d.proof_bits = binary.n();
  d.parallel = parallel;
  for (const auto& c : binary.constraints()) {
    d.query_map.emplace_back(c.scope.begin(), c.scope.end());
    d.tables.push_back(c.table);
  }
  d.validate();
  return d;
}

unsigned parallel_for_gap(const Rat& gap) {
  if (gap.sign() <= 0 || gap > Rat(1)) throw ParameterError("gap must lie in (0,1]");
  const Rat keep = Rat(1) - gap;
  Rat p = keep;
  unsigned k = 1;
  while (p > Rat(1) / Rat(2)) {
    p *= keep;
    ++k;
  }
  return k;
}

bool pcp_verify(const VerifierDescriptor& desc, const PcpProof& proof, std::uint64_t w) {
  if (proof.bits.size() != desc.proof_bits) throw ShapeError("proof length differs from the descriptor");
  auto q = desc.queries(w);
  std::vector<std::uint8_t> answers;
  answers.reserve(q.size());
  for (auto p : q) answers.push_back(proof.bits[p]);
  return desc.decide(w, answers);
}

Rat pcp_accept_prob(const VerifierDescriptor& desc, const PcpProof& proof) {
  if (proof.bits.size() != desc.proof_bits) throw ShapeError("proof length differs from the descriptor");
  const std::uint64_t m = desc.base_constraints();
  if (m == 0) return Rat(1);
  std::uint64_t sat = 0;
  for (std::uint64_t c = 0; c < m; ++c) {
    std::size_t idx = 0;
    for (auto p : desc.query_map[c]) idx = (idx << 1) | (proof.bits[p] & 1U);
    sat += desc.tables[c][idx];
  }
  Rat base(mpz_class(static_cast<unsigned long>(sat)), mpz_class(static_cast<unsigned long>(m)));
  Rat r(1);
  for (unsigned i = 0; i < desc.parallel; ++i) r *= base;
  return r;
}

bool np_witness_check(const VerifierDescriptor& desc, const PcpProof& proof, std::uint64_t enumerate_budget) {
  if (proof.bits.size() != desc.proof_bits) throw ShapeError("proof length differs from the descriptor");
  std::uint64_t space = 0;
  try {
    space = desc.index_space();
  } catch (const ResourceError&) {
    space = ~std::uint64_t{0};
  }
  if (space <= enumerate_budget) {
    for (std::uint64_t w = 0; w < space; ++w)
      if (!pcp_verify(desc, proof, w)) return false;
    return true;
  }
  return pcp_accept_prob(desc, proof) == Rat(1);
}

void write_descriptor(std::ostream& os, const VerifierDescriptor& desc) {
  desc.validate();
  os << "pcpdesc v1\n";
  os << "proof_bits " << desc.proof_bits << " constraints " << desc.query_map.size() << " parallel " << desc.parallel
     << "\n";
  for (std::size_t c = 0; c < desc.query_map.size(); ++c) {
    os << desc.query_map[c].size();
    for (auto p : desc.query_map[c]) os << ' ' << p;
    os << ' ';
    for (auto b : desc.tables[c]) os << static_cast<char>('0' + b);
    os << "\n";
  }
}

VerifierDescriptor read_descriptor(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "pcpdesc v1") throw ParseError("expected header 'pcpdesc v1'");
  VerifierDescriptor d;
  std::string k1, k2, k3;
  std::uint64_t m = 0;
  if (!std::getline(is, line)) throw ParseError("missing descriptor size line");
  std::istringstream head(line);
  if (!(head >> k1 >> d.proof_bits >> k2 >> m >> k3 >> d.parallel) || k1 != "proof_bits" || k2 != "constraints" ||
      k3 != "parallel")
    throw ParseError("malformed descriptor size line");
  for (std::uint64_t c = 0; c < m; ++c) {
    if (!std::getline(is, line)) throw ParseError("descriptor ends before all constraints");
    std::istringstream ls(line);
    std::size_t r = 0;
    if (!(ls >> r) || r > 20) throw ParseError("bad constraint arity");
    std::vector<std::uint64_t> q(r);
    for (auto& p : q)
      if (!(ls >> p)) throw ParseError("missing query position");
    std::string table;
    if (!(ls >> table) || table.size() != (std::size_t{1} << r)) throw ParseError("bad predicate table");
    std::vector<std::uint8_t> t;
    for (char ch : table) {
      if (ch != '0' && ch != '1') throw ParseError("predicate table must be 0/1");
      t.push_back(static_cast<std::uint8_t>(ch - '0'));
    }
    std::string extra;
    if (ls >> extra) throw ParseError("trailing data on constraint line");
    d.query_map.push_back(std::move(q));
    d.tables.push_back(std::move(t));
  }
  try {
    d.validate();
  } catch (const Error& e) {
    throw ParseError(std::string("invalid descriptor: ") + e.what());
  }
  return d;
}

GapEvidence measure_gap(const CspInstance& phi, const PipelineConfig& cfg) {
  GapEvidence ev;
  double space = static_cast<double>(phi.n()) * std::log2(static_cast<double>(phi.W()));
  if (space <= std::log2(static_cast<double>(cfg.val_budget))) {
    ValResult v = val_exact(phi, cfg.val_budget);
    ev.method = GapMethod::Exact;
    ev.gap = Rat(1) - v.value;
    ev.best = std::move(v.best);
  } else {
    LocalSearchOptions opt;
    opt.seed = cfg.seed;
    ValResult v = val_lower(phi, opt);
    ev.method = GapMethod::LowerBound;
    ev.gap = Rat(1) - v.value;
    ev.best = std::move(v.best);
  }
  return ev;
}

namespace {

void write_artifacts(const std::string& dir, const PipelineResult& r, const PipelineConfig& cfg) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(std::filesystem::path(dir) / "final.csp");
    write_csp(f, r.final);
  }
  {
    std::ofstream f(std::filesystem::path(dir) / "verifier.pcpdesc");
    write_descriptor(f, r.descriptor);
  }
  std::ofstream f(std::filesystem::path(dir) / "manifest.json");
  f << pipeline_manifest(r, cfg);
  if (!f) throw ResourceError("could not write artifacts to " + dir);
}

}  // namespace

PipelineResult run_pipeline(const Cnf& cnf, unsigned rounds, const PipelineConfig& cfg,
                            const std::optional<std::string>& out_dir) {
  cfg.validate();
  if (rounds > cfg.max_rounds) throw ParameterError("rounds exceed the configured cap");
  PipelineResult r;
  r.final = to_qcsp(cnf, cfg.q0);
  r.stages.push_back(size_of("to_qcsp", r.final));
  for (;;) {
    r.gap = measure_gap(r.final, cfg);
    const bool exact = r.gap.method == GapMethod::Exact;
    r.reached_epsilon0 = exact && r.gap.gap >= cfg.epsilon0;
    r.descriptor = make_descriptor(r.final, r.gap.gap.sign() > 0 ? parallel_for_gap(r.gap.gap)
                                                                 : parallel_for_gap(cfg.epsilon0));
    if (r.reached_epsilon0) {
      r.notes.push_back("gap reached epsilon0 after " + std::to_string(r.rounds_run) + " rounds");
      break;
    }
    if (exact && r.gap.gap.is_zero()) {
      r.notes.push_back("instance is satisfiable; nothing to amplify");
      break;
    }
    if (r.rounds_run == rounds) {
      r.notes.push_back("round budget spent before the gap reached epsilon0");
      break;
    }
    try {
      AmplifyStages s = amplify_stages(r.final, cfg);
      r.stages.insert(r.stages.end(), s.sizes.begin() + 1, s.sizes.end());
      check_powered_fits(*s.powered, cfg);
    } catch (const ResourceError& e) {
      r.notes.push_back(std::string("amplification stopped: ") + e.what());
      if (out_dir) write_artifacts(*out_dir, r, cfg);
      throw;
    }
  }
  if (out_dir) write_artifacts(*out_dir, r, cfg);
  return r;
}

PcpProof honest_pcp_proof(const Cnf& cnf, const Bits& x) {
  Bits full = extend_split_assignment(cnf, x);
  CspInstance phi = to_qcsp(cnf);
  Assignment u;
  u.values.assign(full.begin(), full.end());
  if (phi.satisfied_count(u) != phi.m()) throw PreconditionError("assignment does not satisfy the formula");
  return PcpProof{std::move(full)};
}

std::string pipeline_manifest(const PipelineResult& r, const PipelineConfig& cfg) {
  nlohmann::ordered_json j;
  j["format"] = "pcpkit pipeline manifest v1";
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  {
    std::ostringstream os;
    write_config(os, cfg);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    while (std::getline(is, line)) {
      auto eq = line.find(" = ");
      c[line.substr(0, eq)] = line.substr(eq + 3);
    }
  }
  j["config"] = c;
  j["seed"] = cfg.seed;
  j["rounds_run"] = r.rounds_run;
  j["realized_epsilon0"] = cfg.epsilon0.str();
  j["reached_epsilon0"] = r.reached_epsilon0;
  j["gap"] = {{"method", r.gap.method == GapMethod::Exact ? "exact" : "local_search"}, {"value", r.gap.gap.str()}};
  j["final"] = {{"q", r.final.q()}, {"W", r.final.W()}, {"n", r.final.n()}, {"m", r.final.m()}};
  j["verifier"] = {{"proof_bits", r.descriptor.proof_bits},
                   {"parallel", r.descriptor.parallel},
                   {"base_constraints", r.descriptor.base_constraints()}};
  nlohmann::ordered_json stages = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.stages.size(); ++i) {
    const auto& s = r.stages[i];
    nlohmann::ordered_json e = {{"stage", s.stage}, {"n", s.n}, {"m", s.m}, {"alphabet_log2", s.alphabet_log2},
                                {"arity", s.arity}};
    if (i > 0 && r.stages[i - 1].m > 0)
      e["blowup"] = static_cast<double>(s.m) / static_cast<double>(r.stages[i - 1].m);
    stages.push_back(std::move(e));
  }
  j["stages"] = stages;
  j["notes"] = r.notes;
  return j.dump(2) + "\n";
}

}  // namespace pcpkit
