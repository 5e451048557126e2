#pragma once

#include <compare>
#include <concepts>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <gmpxx.h>

namespace pcpkit {

// Exact rational in lowest terms with a positive denominator.
class Rat {
 public:
  Rat() = default;

  template <std::integral T>
  Rat(T v) {  // NOLINT(google-explicit-constructor)
    if constexpr (std::is_signed_v<T>) {
      q_ = mpq_class(mpz_class(static_cast<long>(v)));
    } else {
      q_ = mpq_class(mpz_class(static_cast<unsigned long>(v)));
    }
  }

  Rat(const mpz_class& num, const mpz_class& den);
  explicit Rat(mpq_class q);

  // Accepts "a", "-a", "a/b".
  static Rat parse(std::string_view text);

  const mpz_class& num() const { return q_.get_num(); }
  const mpz_class& den() const { return q_.get_den(); }
  const mpq_class& raw() const { return q_; }

  // Always "num/den", also for integers.
  std::string str() const;
  double to_double() const { return q_.get_d(); }

  bool is_zero() const { return sgn(q_) == 0; }
  int sign() const { return sgn(q_); }

  Rat& operator+=(const Rat& o) {
    q_ += o.q_;
    return *this;
  }
  Rat& operator-=(const Rat& o) {
    q_ -= o.q_;
    return *this;
  }
  Rat& operator*=(const Rat& o) {
    q_ *= o.q_;
    return *this;
  }
  Rat& operator/=(const Rat& o);

  friend Rat operator+(Rat a, const Rat& b) { return a += b; }
  friend Rat operator-(Rat a, const Rat& b) { return a -= b; }
  friend Rat operator*(Rat a, const Rat& b) { return a *= b; }
  friend Rat operator/(Rat a, const Rat& b) { return a /= b; }
  friend Rat operator-(const Rat& a) { return Rat(mpq_class(-a.q_)); }

  friend bool operator==(const Rat& a, const Rat& b) { return cmp(a.q_, b.q_) == 0; }
  friend std::strong_ordering operator<=>(const Rat& a, const Rat& b) {
    int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  mpq_class q_{0};
};

std::ostream& operator<<(std::ostream& os, const Rat& r);

Rat abs(const Rat& r);
Rat pow(const Rat& base, unsigned exponent);
// Smallest integer >= r / largest integer <= r.
mpz_class ceil(const Rat& r);
mpz_class floor(const Rat& r);
// Exact binary fraction closest to x from above with the given number of fractional bits.
Rat dyadic_above(double x, unsigned frac_bits);

class RatVec {
 public:
  explicit RatVec(std::vector<Rat> entries);
  static RatVec zeros(std::size_t dim);
  // The unit vector with every entry 1/n.
  static RatVec uniform(std::size_t dim);

  std::size_t dim() const { return entries_.size(); }
  const Rat& operator[](std::size_t i) const { return entries_[i]; }
  Rat& operator[](std::size_t i) { return entries_[i]; }
  std::span<const Rat> entries() const { return entries_; }

  friend bool operator==(const RatVec&, const RatVec&) = default;

 private:
  std::vector<Rat> entries_;
};

struct CertSqrt {
  Rat value;
  Rat input;
  std::uint64_t L = 0;
};

// Least point of a dyadic grid with 0 <= value^2 - r <= 1/L.
// The grid spacing only depends on L and the interval [4^j, 4^(j+1)) holding r,
// and every interval endpoint is a grid point, which keeps the result monotone in r.
CertSqrt cert_sqrt(const Rat& r, std::uint64_t L);

// r = outer^2 * inner with the square factors found by trial division pulled out.
struct SquareSplit {
  Rat outer;
  Rat inner;
};
SquareSplit split_square_factor(const Rat& r, std::uint64_t trial_bound = 1000);

// outer * cert_sqrt(inner, L') with L' chosen so that the 1/L contract still holds for r.
CertSqrt cert_sqrt_normalized(const Rat& r, std::uint64_t L);

Rat inner(const RatVec& x, const RatVec& y);
CertSqrt norm(const RatVec& x, std::uint64_t L);

inline constexpr std::uint64_t kDefaultL = std::uint64_t{1} << 20;

}  // namespace pcpkit
