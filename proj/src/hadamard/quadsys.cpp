#include <cstdlib>

#include "pcpkit/errors.hpp"
#include "pcpkit/hadamard.hpp"

namespace pcpkit {

namespace {

// c + u_var over GF(2).
struct Affine {
  std::uint8_t c;
  unsigned var;
};

// Indicator that the literal is false.
Affine falsity(int lit) { return {static_cast<std::uint8_t>(lit > 0 ? 1 : 0), static_cast<unsigned>(std::abs(lit) - 1)}; }

struct RowBuilder {
  unsigned n1;
  Bits row;
  std::uint8_t constant = 0;

  explicit RowBuilder(unsigned n) : n1(n), row(static_cast<std::size_t>(n) * n, 0) {}
  void product(unsigned i, unsigned j) { row[i * n1 + j] ^= 1U; }
  void linear(unsigned i) { product(i, i); }
  void affine(const Affine& a) {
    constant ^= a.c;
    linear(a.var);
  }
  void affine_product(const Affine& a, const Affine& b) {
    constant ^= static_cast<std::uint8_t>(a.c & b.c);
    if (a.c) linear(b.var);
    if (b.c) linear(a.var);
    product(a.var, b.var);
  }
  void emit(QuadSystem& sys, std::uint8_t rhs) {
    sys.A.push_back(std::move(row));
    sys.b.push_back(static_cast<std::uint8_t>(rhs ^ constant));
  }
};

}  // namespace

void QuadSystem::validate() const {
  if (A.size() != b.size()) throw ShapeError("equation count differs from right-hand side length");
  for (const auto& r : A)
    if (r.size() != static_cast<std::size_t>(n1) * n1) throw ShapeError("equation row must have n1^2 entries");
  if (static_cast<std::size_t>(n1) * n1 > 64) throw ResourceError("quadratic systems limited to 8 variables");
}

bool QuadSystem::satisfied_by(const Bits& u) const {
  if (u.size() != n1) throw ShapeError("solution length differs from the variable count");
  for (std::size_t e = 0; e < A.size(); ++e) {
    unsigned acc = 0;
    for (unsigned i = 0; i < n1; ++i)
      for (unsigned j = 0; j < n1; ++j) acc ^= A[e][i * n1 + j] & u[i] & u[j];
    if (acc != b[e]) return false;
  }
  return true;
}

std::uint64_t tensor_index(std::uint64_t r1, std::uint64_t r2, unsigned n1) {
  std::uint64_t x = 0;
  for (unsigned i = 0; i < n1; ++i)
    if ((r1 >> i) & 1U) x |= r2 << (i * n1);
  return x;
}

Bits tensor(const Bits& u, const Bits& v) {
  Bits t(u.size() * v.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j) t[i * v.size() + j] = u[i] & v[j];
  return t;
}

QuadSystem cnf_to_quadsys(const Cnf& cnf) {
  cnf.validate();
  unsigned aux = 0;
  for (const auto& c : cnf.clauses) {
    if (c.size() > 3) throw PreconditionError("clauses must have at most 3 literals");
    if (c.size() == 3) ++aux;
  }
  QuadSystem sys;
  sys.n1 = cnf.num_vars + aux;
  unsigned next_aux = cnf.num_vars;
  for (const auto& c : cnf.clauses) {
    RowBuilder r(sys.n1);
    switch (c.size()) {
      case 0:
        r.emit(sys, 1);
        break;
      case 1:
        r.affine(falsity(c[0]));
        r.emit(sys, 0);
        break;
      case 2:
        r.affine_product(falsity(c[0]), falsity(c[1]));
        r.emit(sys, 0);
        break;
      default: {
        Affine y{0, next_aux++};
        r.affine_product(falsity(c[0]), y);
        r.emit(sys, 0);
        RowBuilder link(sys.n1);
        link.affine(y);
        link.affine_product(falsity(c[1]), falsity(c[2]));
        link.emit(sys, 0);
      }
    }
  }
  sys.validate();
  return sys;
}

Bits quadsys_witness(const Cnf& cnf, const Bits& x) {
  if (x.size() != cnf.num_vars) throw ShapeError("assignment length differs from the variable count");
  Bits u = x;
  for (const auto& c : cnf.clauses) {
    if (c.size() != 3) continue;
    Affine a = falsity(c[1]), b = falsity(c[2]);
    u.push_back(static_cast<std::uint8_t>((a.c ^ x[a.var]) & (b.c ^ x[b.var])));
  }
  return u;
}

std::optional<Bits> solve_quadsys(const QuadSystem& sys, unsigned max_vars) {
  sys.validate();
  if (sys.n1 > max_vars) throw ResourceError("too many variables for exhaustive search");
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << sys.n1); ++code) {
    Bits u = index_to_bits(code, sys.n1);
    if (sys.satisfied_by(u)) return u;
  }
  return std::nullopt;
}

void ExpPcpProof::validate() const {
  if (f.k() != n1 || g.k() != n1 * n1) throw ShapeError("proof tables must have 2^n1 and 2^(n1^2) entries");
}

ExpPcpProof tensor_proof(const Bits& u) {
  auto n1 = static_cast<unsigned>(u.size());
  if (n1 * n1 > kMaxTableBits) throw ResourceError("proof table over n1^2 bits is too large");
  return {n1, wh_encode(u), wh_encode(tensor(u, u))};
}

ExpPcpProof linear_proof(const Bits& u, const Bits& v) {
  if (v.size() != u.size() * u.size()) throw ShapeError("second table index must have n1^2 bits");
  return {static_cast<unsigned>(u.size()), wh_encode(u), wh_encode(v)};
}

ExpPcpProof exp_pcp_prove(const QuadSystem& sys, const Bits& u) {
  sys.validate();
  if (!sys.satisfied_by(u)) throw PreconditionError("assignment does not solve the system");
  return tensor_proof(u);
}

}  // namespace pcpkit
