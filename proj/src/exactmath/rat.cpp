#include <cmath>
#include <ostream>

#include "pcpkit/errors.hpp"
#include "pcpkit/exactmath.hpp"

namespace pcpkit {

Rat::Rat(const mpz_class& num, const mpz_class& den) {
  if (den == 0) throw DomainError("rational with zero denominator");
  q_ = mpq_class(num, den);
  q_.canonicalize();
}

Rat::Rat(mpq_class q) : q_(std::move(q)) {
  if (q_.get_den() == 0) throw DomainError("rational with zero denominator");
  q_.canonicalize();
}

Rat Rat::parse(std::string_view text) {
  std::string s(text);
  auto bad = [&] { return ParseError("malformed rational '" + s + "'"); };
  if (s.empty()) throw bad();
  auto valid_int = [](const std::string& t) {
    std::size_t i = (!t.empty() && (t[0] == '-' || t[0] == '+')) ? 1 : 0;
    if (i >= t.size()) return false;
    for (; i < t.size(); ++i) {
      if (t[i] < '0' || t[i] > '9') return false;
    }
    return true;
  };
  auto slash = s.find('/');
  std::string ns = s.substr(0, slash);
  std::string ds = slash == std::string::npos ? "1" : s.substr(slash + 1);
  if (!valid_int(ns) || !valid_int(ds)) throw bad();
  if (ns[0] == '+') ns.erase(0, 1);
  if (ds[0] == '+') ds.erase(0, 1);
  mpz_class n(ns, 10), d(ds, 10);
  if (d == 0) throw bad();
  return Rat(n, d);
}

std::string Rat::str() const { return q_.get_num().get_str() + "/" + q_.get_den().get_str(); }

Rat& Rat::operator/=(const Rat& o) {
  if (o.is_zero()) throw DomainError("division by zero");
  q_ /= o.q_;
  return *this;
}

std::ostream& operator<<(std::ostream& os, const Rat& r) { return os << r.str(); }

Rat abs(const Rat& r) { return Rat(mpq_class(::abs(r.raw()))); }

Rat pow(const Rat& base, unsigned exponent) {
  mpz_class n, d;
  mpz_pow_ui(n.get_mpz_t(), base.num().get_mpz_t(), exponent);
  mpz_pow_ui(d.get_mpz_t(), base.den().get_mpz_t(), exponent);
  return Rat(n, d);
}

mpz_class ceil(const Rat& r) {
  mpz_class out;
  mpz_cdiv_q(out.get_mpz_t(), r.num().get_mpz_t(), r.den().get_mpz_t());
  return out;
}

mpz_class floor(const Rat& r) {
  mpz_class out;
  mpz_fdiv_q(out.get_mpz_t(), r.num().get_mpz_t(), r.den().get_mpz_t());
  return out;
}

Rat dyadic_above(double x, unsigned frac_bits) {
  if (!std::isfinite(x)) throw DomainError("non-finite value");
  // mpq from a double is exact; rounding up on the grid keeps the result >= x.
  mpq_class exact(x);
  mpz_class scale = mpz_class(1) << frac_bits;
  mpq_class scaled = exact * scale;
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), scaled.get_num().get_mpz_t(), scaled.get_den().get_mpz_t());
  return Rat(c, scale);
}

RatVec::RatVec(std::vector<Rat> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw ShapeError("vector dimension must be positive");
}

RatVec RatVec::zeros(std::size_t dim) { return RatVec(std::vector<Rat>(dim, Rat(0))); }

RatVec RatVec::uniform(std::size_t dim) {
  if (dim == 0) throw ShapeError("vector dimension must be positive");
  return RatVec(std::vector<Rat>(dim, Rat(mpz_class(1), mpz_class(static_cast<unsigned long>(dim)))));
}

Rat inner(const RatVec& x, const RatVec& y) {
  if (x.dim() != y.dim()) throw ShapeError("inner product of vectors with different dimensions");
  mpq_class acc = 0;
  for (std::size_t i = 0; i < x.dim(); ++i) acc += x[i].raw() * y[i].raw();
  return Rat(acc);
}

CertSqrt norm(const RatVec& x, std::uint64_t L) { return cert_sqrt(inner(x, x), L); }

}  // namespace pcpkit
