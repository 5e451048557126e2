#include <algorithm>
#include <map>

#include "pcpkit/dinur.hpp"
#include "pcpkit/errors.hpp"

namespace pcpkit {

namespace {

std::uint64_t checked_power(std::uint64_t base, unsigned exp, std::uint64_t cap, const char* what) {
  std::uint64_t r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (r > cap / base) throw ResourceError(what);
    r *= base;
  }
  return r;
}

// Smallest base^k >= x; base 1 keeps x.
std::uint32_t round_up_power(std::uint32_t x, std::uint32_t base) {
  if (base <= 1) return x;
  std::uint64_t c = 1;
  while (c < x) c *= base;
  if (c > (std::uint64_t{1} << 31)) throw ResourceError("padded size overflows");
  return static_cast<std::uint32_t>(c);
}

// Equality edges of g on vertices offset + v; loop ports become unary nulls so every vertex keeps degree d.
void emit_graph(const RotationGraph& g, std::uint32_t offset, std::uint32_t W, bool equality,
                std::vector<Constraint>& out) {
  for (std::uint32_t v = 0; v < g.n(); ++v)
    for (std::uint32_t i = 0; i < g.d(); ++i) {
      Port p = g.rot(v, i);
      if (p.v == v) {
        out.push_back(Constraint::null({offset + v}, W));
      } else if (p.v > v) {
        out.push_back(equality ? Constraint::equality(offset + v, offset + p.v, W)
                               : Constraint::null({offset + v, offset + p.v}, W));
      }
    }
}

bool has_loop(const RotationGraph& g) {
  for (std::uint32_t v = 0; v < g.n(); ++v)
    for (std::uint32_t i = 0; i < g.d(); ++i)
      if (g.neighbor(v, i) == v) return true;
  return false;
}

std::uint64_t stage_seed(std::uint64_t seed, std::uint64_t stage, std::uint64_t size) {
  return Rng::mix(seed ^ Rng::mix(stage * 0x100000001b3ULL + size));
}

}  // namespace

CspInstance qcsp_to_2cspW(const CspInstance& phi) {
  const std::uint32_t q = phi.q();
  const std::uint32_t W = phi.W();
  const std::uint64_t Wq = checked_power(W, q, std::uint64_t{1} << 12, "alphabet W^q exceeds 4096");
  const auto W2 = static_cast<std::uint32_t>(Wq);
  const std::uint32_t n = phi.n();
  std::vector<Constraint> out;
  out.reserve(std::size_t{q} * phi.m());
  for (std::uint32_t i = 0; i < phi.m(); ++i) {
    const Constraint& c = phi.constraint(i);
    const auto r = static_cast<unsigned>(c.scope.size());
    const std::uint64_t local = checked_power(W, r, Wq, "scope too large");
    const std::uint32_t y = n + i;
    for (std::uint32_t j = 0; j < q; ++j) {
      if (r == 0) {
        Constraint k{{y}, std::vector<std::uint8_t>(W2, 0)};
        k.table[0] = c.table[0];
        out.push_back(std::move(k));
        continue;
      }
      const unsigned jj = std::min<unsigned>(j, r - 1);
      std::uint64_t place = 1;
      for (unsigned s = jj + 1; s < r; ++s) place *= W;
      Constraint k{{y, c.scope[jj]}, std::vector<std::uint8_t>(std::size_t{W2} * W2, 0)};
      for (std::uint64_t yv = 0; yv < local; ++yv) {
        if (!c.table[yv]) continue;
        std::uint64_t digit = (yv / place) % W;
        k.table[yv * W2 + digit] = 1;
      }
      out.push_back(std::move(k));
    }
  }
  return CspInstance(2, W2, n + static_cast<std::uint32_t>(phi.m()), std::move(out));
}

Assignment project_source(const CspInstance& phi, const Assignment& a) {
  if (a.values.size() != std::size_t{phi.n()} + phi.m()) throw ShapeError("assignment does not match the 2CSP layout");
  Assignment u;
  u.values.assign(a.values.begin(), a.values.begin() + phi.n());
  for (auto& v : u.values)
    if (v >= phi.W()) v = 0;
  return u;
}

Assignment lift_to_2cspW(const CspInstance& phi, const Assignment& u) {
  phi.check_assignment(u);
  Assignment a = u;
  for (const auto& c : phi.constraints()) {
    std::vector<Symbol> vals;
    for (auto v : c.scope) vals.push_back(u.values[v]);
    a.values.push_back(static_cast<Symbol>(c.index_of(vals, phi.W())));
  }
  return a;
}

RegularizedInstance regularize(const CspInstance& phi, const PipelineConfig& cfg) {
  cfg.validate();
  if (phi.q() != 2) throw PreconditionError("regularize needs a 2CSP");
  const std::uint32_t W = phi.W();
  const std::uint32_t d = cfg.cloud_degree;
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> occ(phi.n());
  for (std::uint32_t i = 0; i < phi.m(); ++i) {
    const auto& s = phi.constraint(i).scope;
    if (s.empty()) throw PreconditionError("constraint with an empty scope has no place in a constraint graph");
    for (std::uint32_t p = 0; p < s.size(); ++p) occ[s[p]].push_back({i, p});
  }

  RegularizedInstance r;
  r.source_n = phi.n();
  r.source_constraints = phi.m();
  std::vector<std::uint32_t> start(phi.n(), 0);
  std::uint32_t total = 0;
  for (std::uint32_t v = 0; v < phi.n(); ++v) {
    if (occ[v].empty()) continue;
    std::uint32_t c = round_up_power(static_cast<std::uint32_t>(occ[v].size()), cfg.cloud_base);
    r.kept.push_back(v);
    r.cloud_start.push_back(total);
    r.cloud_size.push_back(c);
    start[v] = total;
    total += c;
  }

  std::vector<Constraint> cons = phi.constraints();
  for (std::uint32_t v = 0; v < phi.n(); ++v)
    for (std::uint32_t k = 0; k < occ[v].size(); ++k) cons[occ[v][k].first].scope[occ[v][k].second] = start[v] + k;

  std::map<std::uint32_t, RotationGraph> clouds;
  for (std::size_t k = 0; k < r.kept.size(); ++k) {
    const std::uint32_t c = r.cloud_size[k];
    auto it = clouds.find(c);
    if (it == clouds.end()) {
      RotationGraph g = c == 1 ? RotationGraph::single_vertex(d)
                               : find_base_expander(c, d, cfg.cloud_lambda, stage_seed(cfg.seed, 2, c),
                                                    cfg.expander_attempts, cfg.spectral())
                                     .graph;
      it = clouds.emplace(c, std::move(g)).first;
    }
    emit_graph(it->second, r.cloud_start[k], W, true, cons);
    const auto used = static_cast<std::uint32_t>(occ[r.kept[k]].size());
    for (std::uint32_t j = used; j < c; ++j) cons.push_back(Constraint::null({r.cloud_start[k] + j}, W));
  }
  r.psi = CspInstance(2, W, total, std::move(cons));
  return r;
}

Assignment cloud_plurality(const RegularizedInstance& r, const Assignment& y) {
  r.psi.check_assignment(y);
  Assignment u;
  u.values.assign(r.source_n, 0);
  std::vector<std::uint64_t> tally(r.psi.W());
  for (std::size_t k = 0; k < r.kept.size(); ++k) {
    std::fill(tally.begin(), tally.end(), 0);
    for (std::uint32_t j = 0; j < r.cloud_size[k]; ++j) ++tally[y.values[r.cloud_start[k] + j]];
    u.values[r.kept[k]] = static_cast<Symbol>(std::max_element(tally.begin(), tally.end()) - tally.begin());
  }
  return u;
}

Assignment spread_to_clouds(const RegularizedInstance& r, const Assignment& u) {
  if (u.values.size() != r.source_n) throw ShapeError("assignment length differs from the source variable count");
  Assignment y;
  y.values.assign(r.psi.n(), 0);
  for (std::size_t k = 0; k < r.kept.size(); ++k)
    for (std::uint32_t j = 0; j < r.cloud_size[k]; ++j) y.values[r.cloud_start[k] + j] = u.values[r.kept[k]];
  return y;
}

NiceInstance make_nice(const CspInstance& phi, const PipelineConfig& cfg) {
  cfg.validate();
  if (phi.q() != 2) throw PreconditionError("make_nice needs a 2CSP");
  NiceInstance out;
  out.source_n = phi.n();
  out.source_constraints = phi.m();
  const std::uint32_t W = phi.W();
  const std::uint32_t d = cfg.d;
  if (phi.m() == 0) {
    out.psi = CspInstance(2, W, 0, {});
    return out;
  }
  ConstraintGraph cg = constraint_graph(phi);
  if (!cg.graph) throw PreconditionError("make_nice needs a regular constraint graph");
  const std::uint32_t dp = cg.graph->d();
  if (dp > d) throw PreconditionError("input degree exceeds d");
  const std::uint32_t n = phi.n();
  const std::uint32_t np = round_up_power(n, cfg.pad_base);

  std::vector<Constraint> base = phi.constraints();
  for (std::uint32_t v = 0; v < np; ++v) {
    std::uint32_t missing = v < n ? d - dp : d;
    for (std::uint32_t j = 0; j < missing; ++j) base.push_back(Constraint::null({v}, W));
  }

  Rng rng(stage_seed(cfg.seed, 3, np));
  const SpectralOptions opt = cfg.spectral();
  for (std::uint64_t attempt = 1; attempt <= cfg.expander_attempts; ++attempt) {
    RotationGraph c = np == 1 ? RotationGraph::single_vertex(d) : random_regular(np, d, rng);
    if (np > 1 && has_loop(c)) continue;
    std::vector<Constraint> cons = base;
    emit_graph(c, 0, W, false, cons);
    for (std::uint32_t v = 0; v < np; ++v)
      for (std::uint32_t j = 0; j < 2 * d; ++j) cons.push_back(Constraint::null({v}, W));
    CspInstance psi(2, W, np, std::move(cons));
    ConstraintGraph g = constraint_graph(psi);
    if (lambda_float(*g.graph) > cfg.nice_lambda.to_double()) continue;
    SpectralEstimate est = lambda_auto(*g.graph, opt);
    if (est.lambda_upper > cfg.nice_lambda) continue;
    out.psi = std::move(psi);
    out.expander = std::move(c);
    out.lambda = std::move(est);
    out.attempts = attempt;
    return out;
  }
  throw ConstructionError("no superimposed expander brought lambda under the nice bound");
}

Assignment pad_assignment(const NiceInstance& nice, const Assignment& u) {
  if (u.values.size() != nice.source_n) throw ShapeError("assignment length differs from the source variable count");
  Assignment y = u;
  y.values.resize(nice.psi.n(), 0);
  return y;
}

Assignment restrict_assignment(const NiceInstance& nice, const Assignment& y) {
  nice.psi.check_assignment(y);
  Assignment u;
  u.values.assign(y.values.begin(), y.values.begin() + std::min<std::size_t>(nice.source_n, y.values.size()));
  u.values.resize(nice.source_n, 0);
  return u;
}

}  // namespace pcpkit
