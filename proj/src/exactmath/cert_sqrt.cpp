#include "pcpkit/errors.hpp"
#include "pcpkit/exactmath.hpp"

namespace pcpkit {

namespace {

// log2 of an upper bound U > sqrt(r) that is constant on [4^j, 4^(j+1)).
unsigned sqrt_bound_log2(const Rat& r) {
  mpz_class whole = floor(r);
  if (whole < 1) return 0;
  std::size_t bits = mpz_sizeinbase(whole.get_mpz_t(), 2);
  return static_cast<unsigned>((bits - 1) / 2 + 1);
}

// Smallest k with 2*U*h + h^2 <= 1/L for h = 2^-k, i.e. L*(2^(u+1+k) + 1) <= 4^k.
unsigned grid_bits(unsigned u, std::uint64_t L) {
  mpz_class lz(static_cast<unsigned long>(L));
  for (unsigned k = 0;; ++k) {
    mpz_class lhs = lz * ((mpz_class(1) << (u + 1 + k)) + 1);
    mpz_class rhs = mpz_class(1) << (2 * k);
    if (lhs <= rhs) return k;
  }
}

void check_contract(const Rat& value, const Rat& r, std::uint64_t L) {
  Rat gap = value * value - r;
  if (gap.sign() < 0 || gap > Rat(mpz_class(1), mpz_class(static_cast<unsigned long>(L)))) {
    throw ConstructionError("square root search left its error window");
  }
}

}  // namespace

CertSqrt cert_sqrt(const Rat& r, std::uint64_t L) {
  if (r.sign() < 0) throw DomainError("square root of a negative rational");
  if (L < 2) throw ParameterError("precision constant L must be at least 2");
  if (r.is_zero()) return {Rat(0), r, L};

  unsigned u = sqrt_bound_log2(r);
  unsigned k = grid_bits(u, L);
  // Least integer c with c^2 * den >= num * 4^k, by bisection on [0, 2^(u+k)].
  mpz_class target = r.num() << (2 * k);
  const mpz_class& den = r.den();
  mpz_class lo = 0;
  mpz_class hi = mpz_class(1) << (u + k);
  while (lo < hi) {
    mpz_class mid = (lo + hi) >> 1;
    if (mid * mid * den >= target) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  Rat value(lo, mpz_class(1) << k);
  check_contract(value, r, L);
  return {value, r, L};
}

SquareSplit split_square_factor(const Rat& r, std::uint64_t trial_bound) {
  if (r.sign() < 0) throw DomainError("square factor of a negative rational");
  auto split = [trial_bound](mpz_class x, mpz_class& outer, mpz_class& rest) {
    outer = 1;
    rest = 1;
    if (x == 0) {
      outer = 0;
      return;
    }
    for (unsigned long p = 2; p <= trial_bound && p * p <= x; ++p) {
      while (mpz_divisible_ui_p(x.get_mpz_t(), p * p)) {
        x /= p * p;
        outer *= p;
      }
      if (mpz_divisible_ui_p(x.get_mpz_t(), p)) {
        x /= p;
        rest *= p;
      }
    }
    if (mpz_perfect_square_p(x.get_mpz_t())) {
      mpz_class s = sqrt(x);
      outer *= s;
    } else {
      rest *= x;
    }
  };
  mpz_class on, rn, od, rd;
  split(r.num(), on, rn);
  if (on == 0) return {Rat(0), Rat(1)};
  split(r.den(), od, rd);
  // e/f = (e*f)/f^2, so the remaining factor is an integer.
  return {Rat(on, mpz_class(od * rd)), Rat(mpz_class(rn * rd), mpz_class(1))};
}

CertSqrt cert_sqrt_normalized(const Rat& r, std::uint64_t L) {
  if (r.sign() < 0) throw DomainError("square root of a negative rational");
  if (L < 2) throw ParameterError("precision constant L must be at least 2");
  if (r.is_zero()) return {Rat(0), r, L};
  SquareSplit s = split_square_factor(r);
  // (c/d)^2 * (v^2 - e/f) <= 1/L needs the inner window 1/L' <= 1/(L (c/d)^2).
  Rat scaled = Rat(static_cast<unsigned long>(L)) * s.outer * s.outer;
  mpz_class inner_l = ceil(scaled);
  if (inner_l < 2) inner_l = 2;
  if (!inner_l.fits_ulong_p()) throw ResourceError("normalized precision constant overflows");
  CertSqrt in = cert_sqrt(s.inner, inner_l.get_ui());
  Rat value = s.outer * in.value;
  check_contract(value, r, L);
  return {value, r, L};
}

}  // namespace pcpkit
