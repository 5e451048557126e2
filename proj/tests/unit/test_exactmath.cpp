#include <algorithm>
#include <vector>

#include "doctest.h"
#include "pcpkit/errors.hpp"
#include "pcpkit/exactmath.hpp"
#include "pcpkit/rng.hpp"

using namespace pcpkit;

namespace {

// Rational bisection on [0, max(1,r)] until the bracket is narrower than width.
std::pair<Rat, Rat> sqrt_bracket(const Rat& r, const Rat& width) {
  Rat lo(0);
  Rat hi = r > Rat(1) ? r : Rat(1);
  while (hi - lo >= width) {
    Rat mid = (lo + hi) / Rat(2);
    if (mid * mid <= r) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return {lo, hi};
}

Rat random_rat(Rng& rng, std::uint64_t max_num, std::uint64_t max_den) {
  return Rat(mpz_class(static_cast<unsigned long>(rng.below(max_num + 1))),
             mpz_class(static_cast<unsigned long>(1 + rng.below(max_den))));
}

}  // namespace

TEST_CASE("rat canonical form and text") {
  Rat a(mpz_class(6), mpz_class(-4));
  CHECK(a.str() == "-3/2");
  CHECK(Rat(5).str() == "5/1");
  CHECK(Rat::parse("10/4") == Rat(5) / Rat(2));
  CHECK(Rat::parse("-7") == Rat(-7));
  CHECK(Rat::parse(Rat(mpz_class(-13), mpz_class(17)).str()) == Rat(mpz_class(-13), mpz_class(17)));
  CHECK_THROWS_AS(Rat::parse("1/0"), ParseError);
  CHECK_THROWS_AS(Rat::parse("x"), ParseError);
  CHECK_THROWS_AS(Rat(1) / Rat(0), DomainError);
  CHECK(pow(Rat(2) / Rat(3), 3) == Rat(8) / Rat(27));
  CHECK(ceil(Rat(7) / Rat(2)) == 4);
  CHECK(floor(Rat(-7) / Rat(2)) == -4);
  CHECK(dyadic_above(0.1, 10) >= Rat(1) / Rat(10));
  CHECK(dyadic_above(0.1, 10) - Rat(1) / Rat(10) < Rat(1) / Rat(1024));
}

TEST_CASE("cert_sqrt fixed cases") {
  CHECK(cert_sqrt(Rat(0), 1000).value == Rat(0));

  auto four = cert_sqrt(Rat(4), 1000);
  CHECK(four.value >= Rat(2));
  CHECK(four.value < Rat(200025) / Rat(100000));
  CHECK(four.value * four.value - Rat(4) <= Rat(1) / Rat(1000));
  auto [lo, hi] = sqrt_bracket(Rat(4), Rat(1) / Rat(4000));
  CHECK(four.value >= lo);
  CHECK(four.value - hi < Rat(1) / Rat(4000) + Rat(1) / Rat(4000));

  CHECK_THROWS_AS(cert_sqrt(Rat(-1), 100), DomainError);
  CHECK_THROWS_AS(cert_sqrt(Rat(2), 1), ParameterError);
}

TEST_CASE("square factor extraction") {
  auto s = split_square_factor(Rat(9) / Rat(4) * Rat(2));
  CHECK(s.outer == Rat(3) / Rat(2));
  CHECK(s.inner == Rat(2));
  auto t = split_square_factor(Rat(mpz_class(72), mpz_class(50)));
  CHECK(t.outer * t.outer * t.inner == Rat(mpz_class(72), mpz_class(50)));
  CHECK(t.inner == Rat(1));

  const std::uint64_t L = 1 << 12;
  auto norm_val = cert_sqrt_normalized(Rat(9) / Rat(2), L);
  Rat inner_l = Rat(static_cast<unsigned long>(L)) * Rat(9) / Rat(4);
  auto core = cert_sqrt(Rat(2), ceil(inner_l).get_ui());
  CHECK(norm_val.value == Rat(3) / Rat(2) * core.value);
  Rat gap = norm_val.value * norm_val.value - Rat(9) / Rat(2);
  CHECK(gap >= Rat(0));
  CHECK(gap <= Rat(1) / Rat(static_cast<unsigned long>(L)));
}

TEST_CASE("inner and norm") {
  CHECK(inner(RatVec({Rat(1), Rat(0)}), RatVec({Rat(0), Rat(1)})) == Rat(0));
  CHECK(inner(RatVec({Rat(1) / Rat(2), Rat(1) / Rat(3)}), RatVec({Rat(2), Rat(3)})) == Rat(2));
  CHECK(inner(RatVec({Rat(1), Rat(-1), Rat(0)}), RatVec::uniform(3)) == Rat(0));
  CHECK_THROWS_AS(inner(RatVec::zeros(2), RatVec::zeros(3)), ShapeError);
  CHECK_THROWS_AS(RatVec(std::vector<Rat>{}), ShapeError);

  CHECK(norm(RatVec::zeros(4), 100).value == Rat(0));
  for (auto [vec, sq, L] : {std::tuple{RatVec({Rat(3), Rat(4)}), Rat(25), std::uint64_t{1000}},
                            std::tuple{RatVec({Rat(1), Rat(1)}), Rat(2), std::uint64_t{100}}}) {
    auto v = norm(vec, L).value;
    Rat gap = v * v - sq;
    CHECK(gap >= Rat(0));
    CHECK(gap <= Rat(1) / Rat(static_cast<unsigned long>(L)));
    auto [lo, hi] = sqrt_bracket(sq, Rat(1) / Rat(static_cast<unsigned long>(4 * L)));
    CHECK(v >= lo);
  }
}

TEST_CASE("cert_sqrt contract, monotonicity and determinism on seeded inputs") {
  Rng rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::uint64_t L = std::uint64_t{1} << (1 + rng.below(24));
    std::vector<Rat> rs;
    for (int k = 0; k < 12; ++k) rs.push_back(random_rat(rng, 100000, 1 + rng.below(5000)));
    rs.push_back(Rat(static_cast<long>(rng.below(20))) * Rat(static_cast<long>(rng.below(20))));
    std::sort(rs.begin(), rs.end());
    Rat prev(-1);
    for (const Rat& r : rs) {
      auto c = cert_sqrt(r, L);
      Rat gap = c.value * c.value - r;
      REQUIRE(gap >= Rat(0));
      REQUIRE(gap <= Rat(1) / Rat(static_cast<unsigned long>(L)));
      REQUIRE(c.value >= prev);
      REQUIRE(cert_sqrt(r, L).value == c.value);
      prev = c.value;
    }
  }
}

TEST_CASE("monotonicity across the 4^j interval boundaries") {
  for (std::uint64_t L : {2ull, 16ull, 1000ull, 1ull << 20}) {
    for (int j = 0; j < 6; ++j) {
      Rat edge(1L << (2 * j));
      Rat eps(mpz_class(1), mpz_class(1000003));
      CHECK(cert_sqrt(edge - eps, L).value <= cert_sqrt(edge, L).value);
      CHECK(cert_sqrt(edge, L).value <= cert_sqrt(edge + eps, L).value);
      CHECK(cert_sqrt(edge, L).value == Rat(1L << j));
    }
  }
}

TEST_CASE("Cauchy-Schwarz holds exactly") {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    std::size_t dim = 1 + rng.below(6);
    std::vector<Rat> a, b;
    for (std::size_t i = 0; i < dim; ++i) {
      a.push_back(random_rat(rng, 40, 9) - Rat(20));
      b.push_back(random_rat(rng, 40, 9) - Rat(20));
    }
    RatVec x(a), y(b);
    Rat xy = inner(x, y);
    REQUIRE(xy * xy <= inner(x, x) * inner(y, y));
  }
}
