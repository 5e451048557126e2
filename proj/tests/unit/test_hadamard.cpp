#include <algorithm>
#include <sstream>

#include "doctest.h"
#include "pcpkit/errors.hpp"
#include "pcpkit/hadamard.hpp"

using namespace pcpkit;

namespace {

BoolFn from_code(unsigned k, std::uint64_t code) {
  std::vector<std::uint8_t> t(std::size_t{1} << k);
  for (std::size_t x = 0; x < t.size(); ++x) t[x] = static_cast<std::uint8_t>((code >> x) & 1U);
  return BoolFn(k, t);
}

bool dot(std::uint64_t a, std::uint64_t b) { return (__builtin_popcountll(a & b) & 1) != 0; }

Rat pair_rate_oracle(const BoolFn& f) {
  long pass = 0, n = static_cast<long>(f.size());
  for (long x = 0; x < n; ++x)
    for (long y = 0; y < n; ++y) pass += (f(static_cast<std::uint64_t>(x ^ y)) == (f(static_cast<std::uint64_t>(x)) ^ f(static_cast<std::uint64_t>(y)))) ? 1 : 0;
  return Rat(pass) / Rat(n * n);
}

// Best agreement with any linear function, by direct comparison.
Rat best_agreement_oracle(const BoolFn& f, std::uint64_t* winner = nullptr) {
  long best = -1;
  for (std::uint64_t u = 0; u < f.size(); ++u) {
    long agree = 0;
    for (std::uint64_t x = 0; x < f.size(); ++x) agree += (f(x) == dot(u, x)) ? 1 : 0;
    if (agree > best) {
      best = agree;
      if (winner) *winner = u;
    }
  }
  return Rat(best) / Rat(static_cast<long>(f.size()));
}

BoolFn majority_oracle(const BoolFn& f) {
  BoolFn g(f.k());
  for (std::uint64_t x = 0; x < f.size(); ++x) {
    std::uint64_t votes = 0;
    for (std::uint64_t y = 0; y < f.size(); ++y) votes += f(y) ^ f(x ^ y);
    g.set(x, 2 * votes >= f.size());
  }
  return g;
}

bool is_linear(const BoolFn& f) {
  for (std::uint64_t x = 0; x < f.size(); ++x)
    for (std::uint64_t y = 0; y < f.size(); ++y)
      if (f(x ^ y) != (f(x) ^ f(y))) return false;
  return true;
}

// Round decision written out from the three tests, without the library's verifier.
bool round_oracle(const QuadSystem& sys, const ExpPcpProof& p, std::uint64_t r1, std::uint64_t r2, std::uint64_t r3,
                  std::uint64_t r4, std::uint64_t r5, std::uint64_t r6, std::uint64_t r7, bool check_g_pair = true) {
  const auto& f = p.f;
  const auto& g = p.g;
  unsigned n = sys.n1;
  bool lin = f(r1 ^ r2) == (f(r1) ^ f(r2)) && (!check_g_pair || g(r4 ^ r5) == (g(r4) ^ g(r5)));
  bool fa = f(r1 ^ r3) ^ f(r3), fb = f(r2 ^ r3) ^ f(r3);
  std::uint64_t t = 0;
  for (unsigned i = 0; i < n; ++i)
    for (unsigned j = 0; j < n; ++j)
      if (((r1 >> i) & 1) && ((r2 >> j) & 1)) t |= std::uint64_t{1} << (i * n + j);
  bool tens = (g(t ^ r6) ^ g(r6)) == (fa && fb);
  std::uint64_t z = 0;
  bool rhs = false;
  for (std::size_t e = 0; e < sys.m(); ++e) {
    if (!((r7 >> e) & 1)) continue;
    for (std::size_t c = 0; c < sys.A[e].size(); ++c)
      if (sys.A[e][c]) z ^= std::uint64_t{1} << c;
    rhs ^= sys.b[e] != 0;
  }
  bool sat = (g(z ^ r6) ^ g(r6)) == rhs;
  return lin && tens && sat;
}

// Enumerates (r1,r2,r3,r6,r7) and (r4,r5) separately; the g-linearity pair is the only test touching r4, r5.
Rat semi_literal_oracle(const QuadSystem& sys, const ExpPcpProof& p) {
  unsigned n = sys.n1, K = n * n;
  std::uint64_t F = std::uint64_t{1} << n, G = std::uint64_t{1} << K, M = std::uint64_t{1} << sys.m();
  long lin = 0;
  for (std::uint64_t a = 0; a < G; ++a)
    for (std::uint64_t b = 0; b < G; ++b) lin += p.g(a ^ b) == (p.g(a) ^ p.g(b)) ? 1 : 0;
  long rest = 0;
  for (std::uint64_t r1 = 0; r1 < F; ++r1)
    for (std::uint64_t r2 = 0; r2 < F; ++r2)
      for (std::uint64_t r3 = 0; r3 < F; ++r3)
        for (std::uint64_t r6 = 0; r6 < G; ++r6)
          for (std::uint64_t r7 = 0; r7 < M; ++r7) rest += round_oracle(sys, p, r1, r2, r3, 0, 0, r6, r7, false) ? 1 : 0;
  return Rat(lin) / Rat(static_cast<long>(G * G)) * Rat(rest) / Rat(static_cast<long>(F * F * F * G * M));
}

ExpPcpProof random_proof(unsigned n1, Rng& rng) {
  ExpPcpProof p{n1, BoolFn(n1), BoolFn(n1 * n1)};
  for (std::uint64_t x = 0; x < p.f.size(); ++x) p.f.set(x, rng.coin());
  for (std::uint64_t x = 0; x < p.g.size(); ++x) p.g.set(x, rng.coin());
  return p;
}

Cnf random_cnf(std::uint32_t vars, std::size_t clauses, std::size_t max_width, Rng& rng) {
  Cnf c{vars, {}};
  for (std::size_t i = 0; i < clauses; ++i) {
    std::size_t w = 1 + rng.below(max_width);
    std::vector<int> cl;
    for (std::size_t j = 0; j < w; ++j) {
      int v = 1 + static_cast<int>(rng.below(vars));
      cl.push_back(rng.coin() ? v : -v);
    }
    c.clauses.push_back(cl);
  }
  return c;
}

}  // namespace

TEST_CASE("Walsh-Hadamard encoding") {
  CHECK(wh_encode({0, 0, 0}) == BoolFn(3));
  auto e1 = wh_encode({1, 0, 0});
  CHECK(e1.table() == std::vector<std::uint8_t>{0, 1, 0, 1, 0, 1, 0, 1});
  Rng rng(2);
  for (int t = 0; t < 20; ++t) {
    Bits u = index_to_bits(rng.below(32), 5);
    auto f = wh_encode(u);
    for (std::uint64_t z = 0; z < 32; ++z)
      for (std::uint64_t w = 0; w < 32; ++w) CHECK(f(z ^ w) == (f(z) ^ f(w)));
  }
}

TEST_CASE("linearity pass rate") {
  for (std::uint64_t u = 0; u < 16; ++u) CHECK(blr_pass_rate(wh_encode_index(u, 4)) == Rat(1));
  BoolFn conj(2, {0, 0, 0, 1});
  CHECK(blr_pass_rate(conj) == Rat(10) / Rat(16));
  for (std::uint64_t pos = 0; pos < 8; ++pos) {
    auto f = wh_encode({1, 1, 0});
    f.flip(pos);
    CHECK(blr_pass_rate(f) == pair_rate_oracle(f));
  }
  CHECK_THROWS_AS(blr_pass_rate(BoolFn(15)), ResourceError);
}

TEST_CASE("nearest linear function") {
  auto lin = wh_encode({0, 1, 1});
  auto fit = nearest_linear(lin);
  CHECK(fit.u == Bits{0, 1, 1});
  CHECK(fit.agreement == Rat(1));

  BoolFn conj(2, {0, 0, 0, 1});
  auto c = nearest_linear(conj);
  CHECK(c.agreement == Rat(3) / Rat(4));
  CHECK(c.u == Bits{0, 0});

  for (std::uint64_t code = 0; code < 256; ++code) {
    auto f = from_code(3, code);
    auto got = nearest_linear(f);
    CHECK(got.agreement == best_agreement_oracle(f));
    CHECK(got.agreement >= Rat(1) / Rat(2));
    // Among all maximizers, the reported one is the lexicographically least vector.
    Bits least;
    bool found = false;
    for (std::uint64_t u = 0; u < 8; ++u) {
      long agree = 0;
      for (std::uint64_t x = 0; x < 8; ++x) agree += f(x) == dot(u, x) ? 1 : 0;
      Bits ub = index_to_bits(u, 3);
      if (Rat(agree) / Rat(8) == got.agreement && (!found || ub < least)) {
        least = ub;
        found = true;
      }
    }
    CHECK(got.u == least);
  }
}

TEST_CASE("self correction") {
  auto f = wh_encode({1, 0, 1, 1});
  for (std::uint64_t x = 0; x < 16; ++x) {
    CHECK(self_correct(f, x, 0) == f(x));
    for (std::uint64_t r = 0; r < 16; ++r) CHECK(self_correct(f, x, r) == f(x));
  }
  auto g = from_code(3, 0x5A);
  for (std::uint64_t x = 0; x < 8; ++x) CHECK(self_correct(g, x, 0) == g(x));

  // Every f at distance s < 1/4 from a linear function on 3 bits.
  for (std::uint64_t u = 0; u < 8; ++u) {
    auto fl = wh_encode_index(u, 3);
    for (int pos = -1; pos < 8; ++pos) {
      auto h = fl;
      if (pos >= 0) h.flip(static_cast<std::uint64_t>(pos));
      Rat s = distance(h, fl);
      REQUIRE(s < Rat(1) / Rat(4));
      for (std::uint64_t x = 0; x < 8; ++x) {
        long ok = 0;
        for (std::uint64_t r = 0; r < 8; ++r) ok += self_correct(h, x, r) == fl(x) ? 1 : 0;
        CHECK(Rat(ok) / Rat(8) >= Rat(1) - Rat(2) * s);
      }
    }
  }
}

TEST_CASE("linearity soundness and majority correction on 3 bits") {
  for (std::uint64_t code = 0; code < 256; ++code) {
    auto f = from_code(3, code);
    Rat pass = blr_pass_rate(f);
    Rat agree = best_agreement_oracle(f);
    CHECK(pass <= std::max(Rat(29) / Rat(32), Rat(1) / Rat(2) + agree / Rat(2)));
    auto g = majority_correction(f);
    CHECK(g == majority_oracle(f));
    CHECK(Rat(1) - pass >= distance(f, g) / Rat(2));
    if (pass > Rat(29) / Rat(32)) CHECK(is_linear(g));
  }
}

TEST_CASE("majority correction on 4 bits, seeded") {
  Rng rng(44);
  for (int t = 0; t < 400; ++t) {
    auto f = from_code(4, rng.below(65536));
    if (t % 2 == 0) {
      f = wh_encode_index(rng.below(16), 4);
      for (int k = 0; k < t % 5; ++k) f.flip(rng.below(16));
    }
    Rat pass = blr_pass_rate(f);
    auto g = majority_correction(f);
    CHECK(Rat(1) - pass >= distance(f, g) / Rat(2));
    if (pass > Rat(29) / Rat(32)) CHECK(is_linear(g));
  }
}

TEST_CASE("tensor inconsistency of linear tables") {
  for (unsigned n1 = 1; n1 <= 3; ++n1) {
    unsigned K = n1 * n1;
    for (std::uint64_t um = 0; um < (1U << n1); ++um) {
      auto u = index_to_bits(um, n1);
      auto uu = bits_to_index(tensor(u, u));
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << K); ++v) {
        if (v == uu) continue;
        long bad = 0;
        for (std::uint64_t r1 = 0; r1 < (1U << n1); ++r1)
          for (std::uint64_t r2 = 0; r2 < (1U << n1); ++r2)
            bad += dot(v, tensor_index(r1, r2, n1)) != (dot(um, r1) && dot(um, r2)) ? 1 : 0;
        CHECK(Rat(bad) / Rat(1L << (2 * n1)) >= Rat(1) / Rat(4));
      }
    }
  }
}

TEST_CASE("CNF to quadratic system") {
  Cnf unit{1, {{1}}};
  auto s1 = cnf_to_quadsys(unit);
  CHECK(s1.satisfied_by({1}));
  CHECK_FALSE(s1.satisfied_by({0}));

  Cnf wide{3, {{1, 2, 3}}};
  auto s3 = cnf_to_quadsys(wide);
  CHECK(s3.n1 == 4);
  for (std::uint64_t x = 0; x < 8; ++x) {
    Bits xb = index_to_bits(x, 3);
    bool any = false;
    for (int y = 0; y < 2; ++y) {
      Bits u = xb;
      u.push_back(static_cast<std::uint8_t>(y));
      any = any || s3.satisfied_by(u);
    }
    CHECK(any == (x != 0));
    if (x != 0) CHECK(s3.satisfied_by(quadsys_witness(wide, xb)));
  }

  Cnf contra{1, {{1}, {-1}}};
  CHECK_FALSE(solve_quadsys(cnf_to_quadsys(contra)));
  CHECK_FALSE(solve_quadsys(cnf_to_quadsys(Cnf{1, {{}}})));
  CHECK_THROWS_AS(cnf_to_quadsys(Cnf{4, {{1, 2, 3, 4}}}), PreconditionError);

  Rng rng(10);
  for (int t = 0; t < 200; ++t) {
    auto cnf = random_cnf(4, 1 + rng.below(5), 3, rng);
    auto sys = cnf_to_quadsys(cnf);
    bool sat = false;
    for (std::uint64_t x = 0; x < 16; ++x) sat = sat || cnf.satisfies(index_to_bits(x, 4));
    CHECK(sat == solve_quadsys(sys).has_value());
    if (auto x = solve_brute_force(cnf)) CHECK(sys.satisfied_by(quadsys_witness(cnf, *x)));
  }
}

TEST_CASE("honest proofs") {
  Cnf cnf{2, {{1, -2}}};
  auto sys = cnf_to_quadsys(cnf);
  auto zero = exp_pcp_prove(sys, {0, 0});
  CHECK(zero.f == BoolFn(2));
  CHECK(zero.g == BoolFn(4));
  CHECK_THROWS_AS(exp_pcp_prove(sys, {0, 1}), PreconditionError);

  auto p = tensor_proof({1, 0, 1});
  for (std::uint64_t r1 = 0; r1 < 8; ++r1)
    for (std::uint64_t r2 = 0; r2 < 8; ++r2) CHECK(p.g(tensor_index(r1, r2, 3)) == (p.f(r1) && p.f(r2)));

  // Completeness for every randomness on small systems.
  Rng rng(4);
  for (int t = 0; t < 30; ++t) {
    auto c = random_cnf(2, 1 + rng.below(3), 2, rng);
    auto s = cnf_to_quadsys(c);
    auto x = solve_brute_force(c);
    if (!x) continue;
    auto proof = exp_pcp_prove(s, quadsys_witness(c, *x));
    auto res = exp_pcp_accept_prob(s, proof, 1, AcceptMode::Enumerate);
    CHECK(*res.exact == Rat(1));
    CHECK(*exp_pcp_accept_prob(s, proof, 8, AcceptMode::Exact).exact == Rat(1));
  }
}

TEST_CASE("satisfiability test against a non-solution") {
  Cnf cnf{3, {{1}, {2, 3}, {-1, -3}, {-2}}};
  auto sys = cnf_to_quadsys(cnf);
  REQUIRE(sys.m() <= 12);
  Rng rng(6);
  for (std::uint64_t vm = 0; vm < 8; ++vm) {
    Bits v = index_to_bits(vm, 3);
    if (sys.satisfied_by(v)) continue;
    auto p = tensor_proof(v);
    for (int t = 0; t < 10; ++t) {
      auto w = random_round(sys, rng);
      long rej = 0;
      for (std::uint64_t r7 = 0; r7 < (std::uint64_t{1} << sys.m()); ++r7) {
        w.r7 = r7;
        rej += exp_pcp_verify_round(sys, p, w) ? 0 : 1;
      }
      CHECK(Rat(rej) / Rat(1L << sys.m()) >= Rat(1) / Rat(2));
    }
  }
}

TEST_CASE("nonlinear first table is rejected") {
  Cnf cnf{2, {{1, 2}}};
  auto sys = cnf_to_quadsys(cnf);
  auto p = exp_pcp_prove(sys, {1, 1});
  p.f = BoolFn(2, {0, 0, 0, 1});
  auto res = exp_pcp_accept_prob(sys, p, 1, AcceptMode::Enumerate);
  CHECK(*res.exact <= Rat(63) / Rat(64));
  CHECK(*res.exact == single_round_accept(sys, p));

  Cnf cnf3{3, {{1, 2}, {-3}}};
  auto sys3 = cnf_to_quadsys(cnf3);
  auto p3 = exp_pcp_prove(sys3, {1, 0, 0});
  p3.f = BoolFn(3, {0, 0, 0, 1, 0, 0, 0, 1});
  Rat v = single_round_accept(sys3, p3);
  CHECK(v == semi_literal_oracle(sys3, p3));
  CHECK(v <= Rat(63) / Rat(64));
}

TEST_CASE("exact round evaluation matches enumeration") {
  Rng rng(12);
  for (int t = 0; t < 12; ++t) {
    auto cnf = random_cnf(2, 1 + rng.below(2), 2, rng);
    auto sys = cnf_to_quadsys(cnf);
    auto p = random_proof(sys.n1, rng);
    Rat exact = single_round_accept(sys, p);
    CHECK(exact == *exp_pcp_accept_prob(sys, p, 1, AcceptMode::Enumerate).exact);
    CHECK(exact == semi_literal_oracle(sys, p));
  }
  for (int t = 0; t < 4; ++t) {
    auto cnf = random_cnf(3, 2, 2, rng);
    auto sys = cnf_to_quadsys(cnf);
    auto p = random_proof(sys.n1, rng);
    CHECK(single_round_accept(sys, p) == semi_literal_oracle(sys, p));
  }
  // Product law over independent rounds.
  Cnf one{1, {{1}}};
  auto sys = cnf_to_quadsys(one);
  for (int t = 0; t < 6; ++t) {
    auto p = random_proof(1, rng);
    Rat p1 = *exp_pcp_accept_prob(sys, p, 1, AcceptMode::Enumerate).exact;
    CHECK(*exp_pcp_accept_prob(sys, p, 2, AcceptMode::Enumerate).exact == p1 * p1);
    CHECK(*exp_pcp_accept_prob(sys, p, 3, AcceptMode::Enumerate).exact == p1 * p1 * p1);
  }
  CHECK_THROWS_AS(exp_pcp_accept_prob(cnf_to_quadsys(Cnf{3, {{1, 2}}}), tensor_proof({1, 0, 0}), 8,
                                      AcceptMode::Enumerate),
                  ResourceError);
}

TEST_CASE("incremental flips agree with fresh evaluation") {
  Rng rng(13);
  for (std::uint32_t vars : {2U, 3U}) {
    auto cnf = random_cnf(vars, 3, 3, rng);
    auto sys = cnf_to_quadsys(cnf);
    if (sys.n1 > 4) continue;
    RoundAcceptance ev(sys, random_proof(sys.n1, rng));
    for (int step = 0; step < 12; ++step) {
      if (step % 4 == 3) {
        ev.flip_f(rng.below(std::uint64_t{1} << sys.n1));
      } else {
        ev.flip_g(rng.below(std::uint64_t{1} << (sys.n1 * sys.n1)));
      }
      CHECK(ev.value() == single_round_accept(sys, ev.proof()));
    }
  }
}

TEST_CASE("linear pairs follow the closed form") {
  Rng rng(14);
  for (int t = 0; t < 40; ++t) {
    auto cnf = random_cnf(t % 2 ? 3 : 2, 2, 2, rng);
    auto sys = cnf_to_quadsys(cnf);
    Bits u = index_to_bits(rng.below(std::uint64_t{1} << sys.n1), sys.n1);
    Bits v = index_to_bits(rng.below(std::uint64_t{1} << (sys.n1 * sys.n1)), sys.n1 * sys.n1);
    if (t % 5 == 0) v = tensor(u, u);
    CHECK(linear_pair_accept(sys, u, v) == single_round_accept(sys, linear_proof(u, v)));
  }
  auto sys = cnf_to_quadsys(Cnf{1, {{1}, {-1}}});
  auto scan = scan_linear_pairs(sys);
  CHECK(scan.pairs == 4);
  CHECK(scan.best <= Rat(3) / Rat(4));
}

TEST_CASE("sampled acceptance interval") {
  auto sys = cnf_to_quadsys(Cnf{2, {{1, 2}}});
  Rng rng(15);
  auto p = random_proof(2, rng);
  double exact = single_round_accept(sys, p).to_double();
  auto res = exp_pcp_accept_prob(sys, p, 1, AcceptMode::Sample, {.samples = 20000, .seed = 3});
  CHECK(res.ci.lo <= exact);
  CHECK(res.ci.hi >= exact);
  CHECK_FALSE(res.exact);
  auto again = exp_pcp_accept_prob(sys, p, 1, AcceptMode::Sample, {.samples = 20000, .seed = 3});
  CHECK(again.estimate == res.estimate);
}

TEST_CASE("adversary sweep on small unsatisfiable systems") {
  for (const Cnf& cnf : {Cnf{1, {{1}, {-1}}}, Cnf{2, {{1, 2}, {-1}, {-2}}}, Cnf{3, {{1}, {-1}, {1, 2, 3}}}}) {
    auto sys = cnf_to_quadsys(cnf);
    AdversaryOptions opt;
    opt.sampled_flips = 16;
    opt.double_flips = 8;
    opt.hill_steps = 2;
    opt.hill_candidates = 8;
    auto rep = adversary_sweep(sys, opt);
    CHECK(rep.worst <= Rat(63) / Rat(64));
    CHECK(pow(rep.worst, kDefaultVerifierRounds) <= Rat(1) / Rat(2));
    CHECK(rep.worst >= rep.linear_pairs_best);
  }
}

TEST_CASE("circuits as quadratic systems") {
  for (std::uint64_t code = 0; code < 16; ++code) {
    Predicate c{1, {}};
    for (int i = 0; i < 4; ++i) c.table.push_back(static_cast<std::uint8_t>((code >> i) & 1U));
    auto cs = circuit_to_quadsys(c);
    CHECK(cs.sys.n1 == 2);
    for (std::uint64_t u1 = 0; u1 < 2; ++u1)
      for (std::uint64_t u2 = 0; u2 < 2; ++u2) CHECK(cs.sys.satisfied_by(cs.witness(u1, u2)) == c(u1, u2));
  }
  Rng rng(16);
  for (int t = 0; t < 10; ++t) {
    Predicate c{2, std::vector<std::uint8_t>(16)};
    for (auto& b : c.table) b = rng.coin() ? 1 : 0;
    auto cs = circuit_to_quadsys(c);
    unsigned N = cs.sys.n1;
    for (std::uint64_t u = 0; u < (std::uint64_t{1} << N); ++u) {
      Bits ub = index_to_bits(u, N);
      if (cs.sys.satisfied_by(ub)) CHECK(c(u & 3U, (u >> 2) & 3U));
    }
    for (std::uint64_t u1 = 0; u1 < 4; ++u1)
      for (std::uint64_t u2 = 0; u2 < 4; ++u2) CHECK(cs.sys.satisfied_by(cs.witness(u1, u2)) == c(u1, u2));
  }
}

TEST_CASE("assignment tester") {
  Predicate neq{1, {0, 1, 1, 0}};
  AssignmentTester tester(neq, 1);
  auto honest = tester.honest(1, 0);
  CHECK(tester.accept_prob(honest) == Rat(1));
  Rng rng(17);
  for (int t = 0; t < 3000; ++t) CHECK(tester.run(honest, tester.random_string(rng)));
  CHECK(tester.queries(tester.random_string(rng)).size() == kTesterQueriesPerRound);
  CHECK_THROWS_AS(tester.honest(1, 1), PreconditionError);

  // Inner proof for (0,1) but outer encodings of (1,0): the concatenation check fails half the time.
  auto mixed = tester.honest(0, 1);
  mixed.pi1 = honest.pi1;
  mixed.pi2 = honest.pi2;
  long cat_ok = 0;
  for (std::uint64_t x = 0; x < 2; ++x)
    for (std::uint64_t y = 0; y < 2; ++y) cat_ok += mixed.pi3.f(x | (y << 1)) == (mixed.pi1(x) ^ mixed.pi2(y)) ? 1 : 0;
  CHECK(Rat(cat_ok) / Rat(4) == Rat(1) / Rat(2));
  CHECK(tester.round_accept(mixed) == Rat(1) / Rat(2));

  // Sampled rounds bracket the factored value.
  for (int t = 0; t < 3; ++t) {
    TesterProof p = tester.honest(0, 1);
    for (int k = 0; k < 3; ++k) p.pi3.g.flip(rng.below(16));
    if (t == 2) p.pi1.flip(1);
    std::uint64_t acc = 0, trials = 40000;
    for (std::uint64_t s = 0; s < trials; ++s) acc += tester.run(p, tester.random_string(rng)) ? 1 : 0;
    auto iv = clopper_pearson(acc, trials, 0.9999);
    double exact = tester.round_accept(p).to_double();
    CHECK(iv.lo <= exact);
    CHECK(iv.hi >= exact);
  }

  auto flat = tester.flatten(honest);
  CHECK(flat.size() == tester.proof_bits());
  CHECK(tester.unflatten(flat) == honest);
  CHECK(tester.decode(honest) == std::pair<std::uint64_t, std::uint64_t>{1, 0});
}

TEST_CASE("tester soundness over structured proofs") {
  Predicate neq{1, {0, 1, 1, 0}};
  AssignmentTester tester(neq);
  const auto& cs = tester.circuit();
  std::vector<ExpPcpProof> inner;
  for (std::uint64_t u = 0; u < 4; ++u) inner.push_back(tensor_proof(index_to_bits(u, 2)));
  for (std::uint64_t u = 0; u < 4; ++u)
    for (std::uint64_t v = 0; v < 16; ++v) inner.push_back(linear_proof(index_to_bits(u, 2), index_to_bits(v, 4)));
  std::size_t base = inner.size();
  for (std::size_t i = 0; i < 4; ++i)
    for (std::uint64_t pos = 0; pos < 20; ++pos) {
      auto q = inner[i];
      if (pos < 4) q.f.flip(pos);
      else q.g.flip(pos - 4);
      inner.push_back(q);
    }
  REQUIRE(inner.size() > base);
  std::size_t high = 0;
  for (std::uint64_t c1 = 0; c1 < 4; ++c1)
    for (std::uint64_t c2 = 0; c2 < 4; ++c2)
      for (const auto& pi3 : inner) {
        TesterProof p{from_code(1, c1), from_code(1, c2), pi3};
        if (tester.accept_prob(p) < Rat(1) / Rat(2)) continue;
        ++high;
        auto [u1, u2] = tester.decode(p);
        CHECK(nearest_linear(p.pi1).agreement >= Rat(99) / Rat(100));
        CHECK(nearest_linear(p.pi2).agreement >= Rat(99) / Rat(100));
        CHECK(neq(u1, u2));
      }
  CHECK(high > 0);
  CHECK(cs.sys.n1 == 2);
}

TEST_CASE("quadsys and proof files") {
  Rng rng(18);
  for (int t = 0; t < 10; ++t) {
    auto sys = cnf_to_quadsys(random_cnf(3, 3, 3, rng));
    std::stringstream ss;
    write_quadsys(ss, sys);
    CHECK(read_quadsys(ss) == sys);
    auto p = random_proof(std::min(sys.n1, 4U), rng);
    std::stringstream ps;
    write_proof(ps, p);
    CHECK(ps.str().size() == 8 + (p.f.size() + 7) / 8 + (p.g.size() + 7) / 8);
    CHECK(read_proof(ps) == p);
  }
  std::stringstream bad("quadsys v1 2 1\n0110\n2\n");
  CHECK_THROWS_AS(read_quadsys(bad), ParseError);
  std::stringstream badp("XXXX\0\0\0\0");
  CHECK_THROWS_AS(read_proof(badp), ParseError);
}
