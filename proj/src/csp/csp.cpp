#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "pcpkit/csp.hpp"
#include "pcpkit/errors.hpp"

namespace pcpkit {

namespace {

std::uint64_t checked_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t cap) {
  std::uint64_t out = 1;
  for (std::uint64_t k = 0; k < exp; ++k) {
    if (out > cap / std::max<std::uint64_t>(base, 1)) return cap + 1;
    out *= base;
  }
  return out;
}

}  // namespace

Constraint Constraint::null(std::vector<std::uint32_t> scope, std::uint32_t W) {
  std::size_t size = checked_pow(W, scope.size(), std::uint64_t{1} << 24);
  if (size > (std::uint64_t{1} << 24)) throw ResourceError("null constraint table too large");
  return Constraint{std::move(scope), std::vector<std::uint8_t>(size, 1)};
}

Constraint Constraint::equality(std::uint32_t a, std::uint32_t b, std::uint32_t W) {
  if (a == b) return null({a}, W);
  std::vector<std::uint8_t> t(std::size_t{W} * W, 0);
  for (std::uint32_t x = 0; x < W; ++x) t[std::size_t{x} * W + x] = 1;
  return Constraint{{a, b}, std::move(t)};
}

std::size_t Constraint::index_of(std::span<const Symbol> values, std::uint32_t W) const {
  std::size_t idx = 0;
  for (Symbol s : values) idx = idx * W + s;
  return idx;
}

bool Constraint::is_null() const {
  return std::all_of(table.begin(), table.end(), [](std::uint8_t b) { return b != 0; });
}

CspInstance::CspInstance(std::uint32_t q, std::uint32_t W, std::uint32_t n, std::vector<Constraint> constraints)
    : q_(q), W_(W), n_(n), constraints_(std::move(constraints)) {
  if (W < 2) throw ParameterError("alphabet size must be at least 2");
  for (const auto& c : constraints_) {
    if (c.scope.size() > q) throw ShapeError("constraint scope exceeds the arity bound");
    for (std::size_t a = 0; a < c.scope.size(); ++a) {
      if (c.scope[a] >= n) throw IndexError("constraint scope names a missing variable");
      for (std::size_t b = a + 1; b < c.scope.size(); ++b)
        if (c.scope[a] == c.scope[b]) throw ShapeError("constraint scope repeats a variable");
    }
    if (c.table.size() != checked_pow(W, c.scope.size(), c.table.size()))
      throw ShapeError("truth table length must be W^|scope|");
    for (auto b : c.table)
      if (b > 1) throw ShapeError("truth table entries must be 0 or 1");
  }
}

void CspInstance::check_assignment(const Assignment& u) const {
  if (u.values.size() != n_) throw ShapeError("assignment length differs from the variable count");
  for (Symbol s : u.values)
    if (s >= W_) throw ShapeError("assignment symbol outside the alphabet");
}

bool CspInstance::satisfies(std::size_t i, const Assignment& u) const {
  const Constraint& c = constraints_[i];
  std::size_t idx = 0;
  for (auto v : c.scope) idx = idx * W_ + u.values[v];
  return c.table[idx] != 0;
}

std::size_t CspInstance::satisfied_count(const Assignment& u) const {
  check_assignment(u);
  std::size_t s = 0;
  for (std::size_t i = 0; i < constraints_.size(); ++i) s += satisfies(i, u) ? 1 : 0;
  return s;
}

Rat frac_satisfied(const CspInstance& phi, const Assignment& u) {
  std::size_t s = phi.satisfied_count(u);
  if (phi.m() == 0) return Rat(1);
  return Rat(static_cast<unsigned long>(s)) / Rat(static_cast<unsigned long>(phi.m()));
}

Rat frac_unsatisfied(const CspInstance& phi, const Assignment& u) { return Rat(1) - frac_satisfied(phi, u); }

ValResult val_exact(const CspInstance& phi, std::uint64_t budget) {
  std::uint64_t total = checked_pow(phi.W(), phi.n(), budget);
  if (total > budget) throw ResourceError("exhaustive value computation exceeds the assignment budget");
  Assignment u{std::vector<Symbol>(phi.n(), 0)};
  Assignment best = u;
  std::size_t best_count = 0;
  bool first = true;
  for (std::uint64_t k = 0; k < total; ++k) {
    std::size_t s = phi.satisfied_count(u);
    if (first || s > best_count) {
      best_count = s;
      best = u;
      first = false;
      if (s == phi.m()) break;
    }
    for (std::uint32_t v = 0; v < phi.n(); ++v) {
      if (++u.values[v] < phi.W()) break;
      u.values[v] = 0;
    }
  }
  Rat value = phi.m() == 0 ? Rat(1)
                           : Rat(static_cast<unsigned long>(best_count)) / Rat(static_cast<unsigned long>(phi.m()));
  return {value, best};
}

ValResult val_lower(const CspInstance& phi, const LocalSearchOptions& opt) {
  std::vector<std::vector<std::uint32_t>> occ(phi.n());
  for (std::uint32_t i = 0; i < phi.m(); ++i)
    for (auto v : phi.constraint(i).scope) occ[v].push_back(i);
  Rng rng(opt.seed);
  Assignment best{std::vector<Symbol>(phi.n(), 0)};
  std::size_t best_count = phi.satisfied_count(best);
  const std::size_t runs = opt.starts.size() + opt.restarts;
  for (std::size_t run = 0; run < runs && best_count < phi.m(); ++run) {
    Assignment u;
    if (run < opt.starts.size()) {
      u = opt.starts[run];
      phi.check_assignment(u);
    } else {
      u.values.resize(phi.n());
      for (auto& s : u.values) s = static_cast<Symbol>(rng.below(phi.W()));
    }
    for (unsigned pass = 0; pass < opt.max_passes; ++pass) {
      bool improved = false;
      for (std::uint32_t v = 0; v < phi.n(); ++v) {
        Symbol keep = u.values[v];
        long base = 0;
        for (auto i : occ[v]) base += phi.satisfies(i, u) ? 1 : 0;
        long best_gain = 0;
        Symbol best_sym = keep;
        for (Symbol a = 0; a < phi.W(); ++a) {
          if (a == keep) continue;
          u.values[v] = a;
          long now = 0;
          for (auto i : occ[v]) now += phi.satisfies(i, u) ? 1 : 0;
          if (now - base > best_gain) {
            best_gain = now - base;
            best_sym = a;
          }
        }
        u.values[v] = best_sym;
        improved = improved || best_sym != keep;
      }
      if (!improved) break;
    }
    std::size_t s = phi.satisfied_count(u);
    if (s > best_count) {
      best_count = s;
      best = u;
    }
  }
  Rat value = phi.m() == 0 ? Rat(1)
                           : Rat(static_cast<unsigned long>(best_count)) / Rat(static_cast<unsigned long>(phi.m()));
  return {value, best};
}

ConstraintGraph constraint_graph(const CspInstance& phi) {
  if (phi.q() != 2) throw PreconditionError("constraint graphs need a binary instance");
  ConstraintGraph out;
  out.degree.assign(phi.n(), 0);
  for (const auto& c : phi.constraints()) {
    if (c.scope.empty()) throw PreconditionError("constraint with an empty scope has no edge");
    for (auto v : c.scope) ++out.degree[v];
  }
  out.regular = phi.n() > 0 && std::all_of(out.degree.begin(), out.degree.end(),
                                             [&](std::uint32_t x) { return x == out.degree[0]; });
  if (!out.regular || out.degree[0] == 0) {
    out.regular = out.regular && phi.n() > 0;
    return out;
  }
  const std::uint32_t d = out.degree[0];
  std::vector<Port> rot(std::size_t{phi.n()} * d);
  out.port_constraint.assign(rot.size(), 0);
  std::vector<std::uint32_t> used(phi.n(), 0);
  for (std::uint32_t i = 0; i < phi.m(); ++i) {
    const auto& s = phi.constraint(i).scope;
    if (s.size() == 1) {
      std::uint32_t p = used[s[0]]++;
      rot[std::size_t{s[0]} * d + p] = {s[0], p};
      out.port_constraint[std::size_t{s[0]} * d + p] = i;
      continue;
    }
    std::uint32_t pa = used[s[0]]++;
    std::uint32_t pb = used[s[1]]++;
    rot[std::size_t{s[0]} * d + pa] = {s[1], pb};
    rot[std::size_t{s[1]} * d + pb] = {s[0], pa};
    out.port_constraint[std::size_t{s[0]} * d + pa] = i;
    out.port_constraint[std::size_t{s[1]} * d + pb] = i;
  }
  out.graph = RotationGraph(phi.n(), d, std::move(rot));
  return out;
}

NiceReport is_nice(const CspInstance& phi, const SpectralOptions& opt) {
  NiceReport rep;
  if (phi.q() != 2) {
    rep.failures.push_back("arity bound is not 2");
    return rep;
  }
  if (phi.m() == 0) {
    rep.nice = true;
    return rep;
  }
  ConstraintGraph cg;
  try {
    cg = constraint_graph(phi);
  } catch (const PreconditionError& e) {
    rep.failures.push_back(e.what());
    return rep;
  }
  if (!cg.graph) {
    rep.failures.push_back("constraint graph is not regular");
    return rep;
  }
  const RotationGraph& g = *cg.graph;
  for (std::uint32_t v = 0; v < g.n(); ++v) {
    std::uint32_t loops = 0;
    for (std::uint32_t i = 0; i < g.d(); ++i) loops += g.is_fixed(v, i) ? 1 : 0;
    if (2 * loops < g.d()) {
      rep.failures.push_back("vertex " + std::to_string(v) + " has fewer than half self-loops");
      break;
    }
  }
  rep.lambda = lambda_auto(g, opt);
  if (rep.lambda->lambda_upper > Rat(9) / Rat(10)) rep.failures.push_back("lambda exceeds 0.9");
  rep.nice = rep.failures.empty();
  return rep;
}

CspInstance random_csp(std::uint32_t q, std::uint32_t W, std::uint32_t n, std::size_t m, Rng& rng,
                       double accept_density) {
  if (n < q) throw ParameterError("need at least q variables");
  std::vector<Constraint> cs;
  cs.reserve(m);
  std::vector<std::uint32_t> vars(n);
  for (std::uint32_t v = 0; v < n; ++v) vars[v] = v;
  for (std::size_t i = 0; i < m; ++i) {
    rng.shuffle(std::span<std::uint32_t>(vars));
    std::vector<std::uint32_t> scope(vars.begin(), vars.begin() + q);
    std::size_t size = checked_pow(W, q, std::uint64_t{1} << 24);
    std::vector<std::uint8_t> t(size);
    for (auto& b : t) b = rng.unit() < accept_density ? 1 : 0;
    cs.push_back({std::move(scope), std::move(t)});
  }
  return CspInstance(q, W, n, std::move(cs));
}

void write_csp(std::ostream& os, const CspInstance& phi) {
  os << "cspw v1 " << phi.q() << ' ' << phi.W() << ' ' << phi.n() << ' ' << phi.m() << '\n';
  for (const auto& c : phi.constraints()) {
    os << "scope:";
    for (auto v : c.scope) os << ' ' << v;
    os << " ; table: ";
    for (auto b : c.table) os << (b ? '1' : '0');
    os << '\n';
  }
}

CspInstance read_csp(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParseError("missing cspw header");
  std::istringstream head(line);
  std::string magic, version;
  std::uint64_t q, W, n, m;
  if (!(head >> magic >> version >> q >> W >> n >> m) || magic != "cspw" || version != "v1")
    throw ParseError("expected header 'cspw v1 q W n m'");
  if (q > 64 || W > 65536 || n > (1u << 30)) throw ParseError("cspw header out of range");
  std::vector<Constraint> cs;
  for (std::uint64_t i = 0; i < m; ++i) {
    if (!std::getline(is, line)) throw ParseError("truncated constraint list");
    auto semi = line.find(';');
    if (line.rfind("scope:", 0) != 0 || semi == std::string::npos) throw ParseError("malformed constraint line");
    std::istringstream sc(line.substr(6, semi - 6));
    Constraint c;
    std::uint64_t v;
    while (sc >> v) c.scope.push_back(static_cast<std::uint32_t>(v));
    if (!sc.eof()) throw ParseError("malformed scope");
    std::istringstream tb(line.substr(semi + 1));
    std::string key, bits;
    if (!(tb >> key >> bits) || key != "table:") throw ParseError("malformed table");
    for (char ch : bits) {
      if (ch != '0' && ch != '1') throw ParseError("table must be a 0/1 string");
      c.table.push_back(ch == '1' ? 1 : 0);
    }
    cs.push_back(std::move(c));
  }
  try {
    return CspInstance(static_cast<std::uint32_t>(q), static_cast<std::uint32_t>(W), static_cast<std::uint32_t>(n),
                       std::move(cs));
  } catch (const Error& e) {
    throw ParseError(std::string("invalid instance: ") + e.what());
  }
}

}  // namespace pcpkit
