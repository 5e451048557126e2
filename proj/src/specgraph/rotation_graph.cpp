#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>

#include "pcpkit/errors.hpp"
#include "pcpkit/specgraph.hpp"

namespace pcpkit {

RotationGraph::RotationGraph(std::uint32_t n, std::uint32_t d, std::vector<Port> rot)
    : n_(n), d_(d), rot_(std::move(rot)) {
  if (n == 0 || d == 0) throw ShapeError("rotation graph needs n >= 1 and d >= 1");
  if (rot_.size() != std::size_t{n} * d) throw ShapeError("rotation table has wrong length");
  for (std::uint32_t v = 0; v < n; ++v) {
    for (std::uint32_t i = 0; i < d; ++i) {
      Port p = this->rot(v, i);
      if (p.v >= n || p.i >= d) throw IndexError("rotation target out of range");
      if (!(this->rot(p.v, p.i) == Port{v, i})) throw ConstructionError("rotation map is not an involution");
    }
  }
}

RotationGraph RotationGraph::single_vertex(std::uint32_t d) {
  std::vector<Port> rot(d);
  for (std::uint32_t i = 0; i < d; ++i) rot[i] = {0, i};
  return RotationGraph(1, d, std::move(rot));
}

RotationGraph RotationGraph::cycle(std::uint32_t n) {
  if (n == 0) throw ShapeError("cycle needs at least one vertex");
  std::vector<Port> rot(std::size_t{n} * 2);
  for (std::uint32_t v = 0; v < n; ++v) {
    rot[2 * v] = {(v + 1) % n, 1};
    rot[2 * v + 1] = {(v + n - 1) % n, 0};
  }
  return RotationGraph(n, 2, std::move(rot));
}

RotationGraph RotationGraph::complete(std::uint32_t n) {
  if (n < 2) throw ShapeError("complete graph needs at least two vertices");
  std::uint32_t d = n - 1;
  std::vector<Port> rot(std::size_t{n} * d);
  auto port_to = [](std::uint32_t from, std::uint32_t to) { return to < from ? to : to - 1; };
  for (std::uint32_t v = 0; v < n; ++v) {
    for (std::uint32_t u = 0; u < n; ++u) {
      if (u == v) continue;
      rot[std::size_t{v} * d + port_to(v, u)] = {u, port_to(u, v)};
    }
  }
  return RotationGraph(n, d, std::move(rot));
}

RotationGraph RotationGraph::from_edges(std::uint32_t n, std::uint32_t d,
                                        std::span<const std::pair<std::uint32_t, std::uint32_t>> edges) {
  std::vector<Port> rot(std::size_t{n} * d);
  std::vector<std::uint32_t> used(n, 0);
  auto take = [&](std::uint32_t v) {
    if (v >= n) throw IndexError("edge endpoint out of range");
    if (used[v] == d) throw ShapeError("vertex exceeds the degree");
    return used[v]++;
  };
  for (auto [u, v] : edges) {
    if (u == v) {
      std::uint32_t i = take(u);
      rot[std::size_t{u} * d + i] = {u, i};
      continue;
    }
    std::uint32_t i = take(u);
    std::uint32_t j = take(v);
    rot[std::size_t{u} * d + i] = {v, j};
    rot[std::size_t{v} * d + j] = {u, i};
  }
  for (std::uint32_t v = 0; v < n; ++v) {
    if (used[v] != d) throw ShapeError("vertex has fewer than d edge endpoints");
  }
  return RotationGraph(n, d, std::move(rot));
}

RWMatrix::RWMatrix(std::uint32_t n, std::vector<Rat> entries) : n_(n), entries_(std::move(entries)) {
  if (entries_.size() != std::size_t{n} * n) throw ShapeError("matrix has wrong entry count");
}

RWMatrix RWMatrix::operator*(const RWMatrix& o) const {
  if (n_ != o.n_) throw ShapeError("matrix dimensions differ");
  std::vector<Rat> out(std::size_t{n_} * n_);
  for (std::uint32_t i = 0; i < n_; ++i) {
    for (std::uint32_t j = 0; j < n_; ++j) {
      mpq_class acc = 0;
      for (std::uint32_t k = 0; k < n_; ++k) acc += at(i, k).raw() * o.at(k, j).raw();
      out[std::size_t{i} * n_ + j] = Rat(acc);
    }
  }
  return RWMatrix(n_, std::move(out));
}

std::vector<std::uint32_t> multiplicity_matrix(const RotationGraph& g) {
  std::uint32_t n = g.n();
  std::vector<std::uint32_t> c(std::size_t{n} * n, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    for (std::uint32_t i = 0; i < g.d(); ++i) ++c[std::size_t{v} * n + g.neighbor(v, i)];
  }
  return c;
}

RWMatrix rw_matrix(const RotationGraph& g) {
  auto c = multiplicity_matrix(g);
  std::vector<Rat> e;
  e.reserve(c.size());
  mpz_class d(static_cast<unsigned long>(g.d()));
  for (auto x : c) e.emplace_back(mpz_class(static_cast<unsigned long>(x)), d);
  return RWMatrix(g.n(), std::move(e));
}

RWMatrix kronecker(const RWMatrix& a, const RWMatrix& b) {
  std::uint32_t n = a.n() * b.n();
  std::vector<Rat> e(std::size_t{n} * n);
  for (std::uint32_t i = 0; i < a.n(); ++i)
    for (std::uint32_t i2 = 0; i2 < b.n(); ++i2)
      for (std::uint32_t j = 0; j < a.n(); ++j)
        for (std::uint32_t j2 = 0; j2 < b.n(); ++j2)
          e[std::size_t{i * b.n() + i2} * n + (j * b.n() + j2)] = a.at(i, j) * b.at(i2, j2);
  return RWMatrix(n, std::move(e));
}

RotationGraph graph_power(const RotationGraph& g, unsigned k, std::uint64_t port_budget) {
  if (k == 0) throw ParameterError("graph power needs k >= 1");
  std::uint64_t deg = 1;
  for (unsigned s = 0; s < k; ++s) {
    deg *= g.d();
    if (deg > 0xffffffffULL || deg * g.n() > port_budget) throw ResourceError("graph power exceeds the port budget");
  }
  std::uint32_t dk = static_cast<std::uint32_t>(deg);
  std::vector<Port> rot(std::size_t{g.n()} * dk);
  std::vector<std::uint32_t> labels(k), back(k);
  for (std::uint32_t v = 0; v < g.n(); ++v) {
    for (std::uint32_t lab = 0; lab < dk; ++lab) {
      std::uint32_t rest = lab;
      for (unsigned s = k; s-- > 0;) {
        labels[s] = rest % g.d();
        rest /= g.d();
      }
      std::uint32_t cur = v;
      for (unsigned s = 0; s < k; ++s) {
        Port p = g.rot(cur, labels[s]);
        cur = p.v;
        back[s] = p.i;
      }
      std::uint32_t rlab = 0;
      for (unsigned s = k; s-- > 0;) rlab = rlab * g.d() + back[s];
      rot[std::size_t{v} * dk + lab] = {cur, rlab};
    }
  }
  return RotationGraph(g.n(), dk, std::move(rot));
}

RotationGraph tensor(const RotationGraph& g, const RotationGraph& g2) {
  std::uint64_t n = std::uint64_t{g.n()} * g2.n();
  std::uint64_t d = std::uint64_t{g.d()} * g2.d();
  if (n > 0xffffffffULL || d > 0xffffffffULL) throw ResourceError("tensor product too large");
  std::vector<Port> rot(n * d);
  for (std::uint32_t v = 0; v < g.n(); ++v)
    for (std::uint32_t v2 = 0; v2 < g2.n(); ++v2)
      for (std::uint32_t i = 0; i < g.d(); ++i)
        for (std::uint32_t i2 = 0; i2 < g2.d(); ++i2) {
          Port a = g.rot(v, i);
          Port b = g2.rot(v2, i2);
          std::uint64_t x = std::uint64_t{v} * g2.n() + v2;
          std::uint64_t lab = std::uint64_t{i} * g2.d() + i2;
          rot[x * d + lab] = {a.v * g2.n() + b.v, a.i * g2.d() + b.i};
        }
  return RotationGraph(static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(d), std::move(rot));
}

RotationGraph replacement(const RotationGraph& g, const RotationGraph& h) {
  if (h.n() != g.d()) throw ShapeError("replacement needs |V(H)| = deg(G)");
  std::uint32_t D = g.d();
  std::uint32_t d = h.d();
  std::uint64_t n = std::uint64_t{g.n()} * D;
  if (n > 0xffffffffULL) throw ResourceError("replacement product too large");
  std::uint32_t deg = 2 * d;
  std::vector<Port> rot(n * deg);
  for (std::uint32_t v = 0; v < g.n(); ++v) {
    for (std::uint32_t a = 0; a < D; ++a) {
      std::size_t base = (std::size_t{v} * D + a) * deg;
      for (std::uint32_t i = 0; i < d; ++i) {
        Port p = h.rot(a, i);
        rot[base + i] = {v * D + p.v, p.i};
      }
      Port e = g.rot(v, a);
      for (std::uint32_t c = 0; c < d; ++c) rot[base + d + c] = {e.v * D + e.i, d + c};
    }
  }
  return RotationGraph(static_cast<std::uint32_t>(n), deg, std::move(rot));
}

std::uint64_t edge_cut(const RotationGraph& g, std::span<const std::uint32_t> s) {
  std::vector<char> in(g.n(), 0);
  for (auto v : s) {
    if (v >= g.n()) throw IndexError("vertex out of range");
    in[v] = 1;
  }
  std::uint64_t cut = 0;
  for (std::uint32_t v = 0; v < g.n(); ++v) {
    if (!in[v]) continue;
    for (std::uint32_t i = 0; i < g.d(); ++i) cut += in[g.neighbor(v, i)] ? 0 : 1;
  }
  return cut;
}

Rat collision_prob(const RotationGraph& g, unsigned l, std::span<const std::uint32_t> s) {
  if (l == 0) throw ParameterError("walk length must be positive");
  std::vector<char> in(g.n(), 0);
  std::size_t size = 0;
  for (auto v : s) {
    if (v >= g.n()) throw IndexError("vertex out of range");
    if (!in[v]) ++size;
    in[v] = 1;
  }
  if (2 * size > g.n()) throw PreconditionError("collision set larger than half the vertices");
  std::vector<mpz_class> x(g.n());
  for (std::uint32_t v = 0; v < g.n(); ++v) x[v] = in[v] ? 1 : 0;
  for (unsigned step = 0; step < l; ++step) {
    std::vector<mpz_class> y(g.n());
    for (std::uint32_t v = 0; v < g.n(); ++v) {
      mpz_class acc = 0;
      for (std::uint32_t i = 0; i < g.d(); ++i) acc += x[g.neighbor(v, i)];
      y[v] = std::move(acc);
    }
    x = std::move(y);
  }
  mpz_class hits = 0;
  for (std::uint32_t v = 0; v < g.n(); ++v)
    if (in[v]) hits += x[v];
  mpz_class total;
  mpz_ui_pow_ui(total.get_mpz_t(), g.d(), l);
  total *= static_cast<unsigned long>(g.n());
  return Rat(hits, total);
}

RotationGraph random_regular(std::uint32_t n, std::uint32_t d, Rng& rng) {
  if (n == 0 || d == 0) throw ShapeError("random regular graph needs n, d >= 1");
  std::vector<Port> ports;
  ports.reserve(std::size_t{n} * d);
  for (std::uint32_t v = 0; v < n; ++v)
    for (std::uint32_t i = 0; i < d; ++i) ports.push_back({v, i});
  rng.shuffle(std::span<Port>(ports));
  std::vector<Port> rot(ports.size());
  std::size_t pairs = ports.size() / 2;
  for (std::size_t k = 0; k < pairs; ++k) {
    Port a = ports[2 * k];
    Port b = ports[2 * k + 1];
    rot[std::size_t{a.v} * d + a.i] = b;
    rot[std::size_t{b.v} * d + b.i] = a;
  }
  if (ports.size() % 2 == 1) {
    Port a = ports.back();
    rot[std::size_t{a.v} * d + a.i] = a;
  }
  return RotationGraph(n, d, std::move(rot));
}

void write_rotgraph(std::ostream& os, const RotationGraph& g) {
  os << "rotgraph v1 " << g.n() << ' ' << g.d() << '\n';
  for (std::uint32_t v = 0; v < g.n(); ++v)
    for (std::uint32_t i = 0; i < g.d(); ++i) {
      Port p = g.rot(v, i);
      os << v << ' ' << i << ' ' << p.v << ' ' << p.i << '\n';
    }
}

RotationGraph read_rotgraph(std::istream& is) {
  std::string magic, version;
  std::uint64_t n = 0, d = 0;
  if (!(is >> magic >> version >> n >> d) || magic != "rotgraph" || version != "v1")
    throw ParseError("expected header 'rotgraph v1 n d'");
  if (n == 0 || d == 0 || n * d > kDefaultPortBudget) throw ParseError("rotgraph header out of range");
  std::vector<Port> rot(n * d);
  std::vector<char> seen(n * d, 0);
  for (std::uint64_t k = 0; k < n * d; ++k) {
    std::uint64_t v, i, u, j;
    if (!(is >> v >> i >> u >> j)) throw ParseError("truncated rotation table");
    if (v >= n || i >= d || u >= n || j >= d) throw ParseError("rotation entry out of range");
    if (seen[v * d + i]) throw ParseError("duplicate rotation entry");
    seen[v * d + i] = 1;
    rot[v * d + i] = {static_cast<std::uint32_t>(u), static_cast<std::uint32_t>(j)};
  }
  try {
    return RotationGraph(static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(d), std::move(rot));
  } catch (const Error& e) {
    throw ParseError(std::string("invalid rotation map: ") + e.what());
  }
}

}  // namespace pcpkit
