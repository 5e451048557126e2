#include <sstream>

#include "doctest.h"
#include "pcpkit/csp.hpp"
#include "pcpkit/errors.hpp"

using namespace pcpkit;

namespace {

// Re-evaluates every constraint by decoding its table index digit by digit.
std::size_t count_by_hand(const CspInstance& phi, const Assignment& u) {
  std::size_t s = 0;
  for (const auto& c : phi.constraints()) {
    std::size_t idx = 0, weight = 1;
    for (std::size_t k = c.scope.size(); k-- > 0;) {
      idx += weight * u.values[c.scope[k]];
      weight *= phi.W();
    }
    s += c.table[idx];
  }
  return s;
}

Constraint binary(std::uint32_t a, std::uint32_t b, std::vector<std::uint8_t> t) { return {{a, b}, std::move(t)}; }

}  // namespace

TEST_CASE("frac_satisfied basics") {
  CspInstance one(2, 2, 2, {Constraint::null({0, 1}, 2)});
  CHECK(frac_satisfied(one, {{1, 0}}) == Rat(1));

  CspInstance two(2, 2, 2, {binary(0, 1, {1, 0, 0, 1}), binary(0, 1, {0, 1, 1, 0})});
  CHECK(frac_satisfied(two, {{0, 0}}) == Rat(1) / Rat(2));
  CHECK(frac_satisfied(CspInstance(2, 2, 3, {}), {{0, 0, 0}}) == Rat(1));

  CHECK_THROWS_AS(frac_satisfied(two, {{0}}), ShapeError);
  CHECK_THROWS_AS(frac_satisfied(two, {{0, 2}}), ShapeError);

  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    auto phi = random_csp(3, 3, 6, 12, rng);
    Assignment u{std::vector<Symbol>(6)};
    for (auto& s : u.values) s = static_cast<Symbol>(rng.below(3));
    CHECK(phi.satisfied_count(u) == count_by_hand(phi, u));
  }
}

TEST_CASE("instance validation") {
  CHECK_THROWS_AS(CspInstance(2, 2, 2, {Constraint{{0, 0}, {1, 1, 1, 1}}}), ShapeError);
  CHECK_THROWS_AS(CspInstance(2, 2, 2, {Constraint{{0, 1}, {1, 1, 1}}}), ShapeError);
  CHECK_THROWS_AS(CspInstance(2, 2, 2, {Constraint{{0, 5}, {1, 1, 1, 1}}}), IndexError);
  CHECK_THROWS_AS(CspInstance(1, 2, 2, {Constraint{{0, 1}, {1, 1, 1, 1}}}), ShapeError);
}

TEST_CASE("exact and local-search values") {
  Rng rng(5);
  auto sat = random_csp(2, 2, 5, 8, rng);
  // Plant a solution by forcing every table to accept the all-ones assignment.
  std::vector<Constraint> cs = sat.constraints();
  for (auto& c : cs) c.table[c.table.size() - 1] = 1;
  CspInstance planted(2, 2, 5, cs);
  CHECK(val_exact(planted).value == Rat(1));
  LocalSearchOptions lo;
  lo.starts.push_back({std::vector<Symbol>(5, 1)});
  lo.restarts = 0;
  CHECK(val_lower(planted, lo).value == Rat(1));

  CspInstance contra(2, 2, 2, {binary(0, 1, {0, 1, 1, 0}), binary(0, 1, {1, 0, 0, 1})});
  CHECK(val_exact(contra).value == Rat(1) / Rat(2));

  for (int trial = 0; trial < 30; ++trial) {
    auto phi = random_csp(2, 3, 6, 15, rng, 0.3);
    auto ex = val_exact(phi);
    auto lb = val_lower(phi, {.seed = static_cast<std::uint64_t>(trial)});
    CHECK(lb.value <= ex.value);
    CHECK(lb.value >= Rat(0));
    CHECK(frac_satisfied(phi, ex.best) == ex.value);
    // Brute force over all 3^6 assignments independently.
    std::size_t best = 0;
    Assignment u{std::vector<Symbol>(6)};
    for (int code = 0; code < 729; ++code) {
      int c = code;
      for (auto& s : u.values) {
        s = static_cast<Symbol>(c % 3);
        c /= 3;
      }
      best = std::max(best, count_by_hand(phi, u));
    }
    CHECK(ex.value == Rat(static_cast<long>(best)) / Rat(15));
  }
  CHECK_THROWS_AS(val_exact(random_csp(2, 4, 13, 3, rng)), ResourceError);
}

TEST_CASE("constraint graphs") {
  CspInstance tri(2, 2, 3,
                  {Constraint::null({0, 1}, 2), Constraint::null({1, 2}, 2), Constraint::null({2, 0}, 2)});
  auto cg = constraint_graph(tri);
  REQUIRE(cg.graph);
  CHECK(cg.graph->d() == 2);
  auto m = rw_matrix(*cg.graph);
  CHECK(m.at(0, 1) == Rat(1) / Rat(2));
  CHECK(m.at(0, 0) == Rat(0));

  CspInstance loop(2, 2, 1, {Constraint::null({0}, 2)});
  auto lg = constraint_graph(loop);
  REQUIRE(lg.graph);
  CHECK(lg.graph->is_fixed(0, 0));

  CspInstance irregular(2, 2, 3, {Constraint::null({0, 1}, 2)});
  CHECK_FALSE(constraint_graph(irregular).regular);
  CHECK_THROWS_AS(constraint_graph(CspInstance(3, 2, 3, {})), PreconditionError);
}

TEST_CASE("nice instances") {
  CspInstance tri(2, 2, 3,
                  {Constraint::null({0, 1}, 2), Constraint::null({1, 2}, 2), Constraint::null({2, 0}, 2)});
  CHECK_FALSE(is_nice(tri).nice);
  CHECK_FALSE(is_nice(CspInstance(3, 2, 3, {})).nice);

  // Triangle plus two loops per vertex: half self-loops, lambda of the lazy triangle is 1/4.
  std::vector<Constraint> cs = tri.constraints();
  for (std::uint32_t v = 0; v < 3; ++v)
    for (int k = 0; k < 2; ++k) cs.push_back(Constraint::null({v}, 2));
  auto rep = is_nice(CspInstance(2, 2, 3, cs));
  CHECK(rep.nice);
  REQUIRE(rep.lambda);
  CHECK(rep.lambda->lambda_upper.to_double() == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("cspw round trip") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    auto phi = random_csp(1 + static_cast<std::uint32_t>(rng.below(3)), 2 + static_cast<std::uint32_t>(rng.below(3)),
                          4, rng.below(6), rng);
    std::stringstream ss;
    write_csp(ss, phi);
    CHECK(read_csp(ss) == phi);
  }
  CspInstance unary(2, 2, 1, {Constraint{{}, {0}}, Constraint::null({0}, 2)});
  std::stringstream ss;
  write_csp(ss, unary);
  CHECK(read_csp(ss) == unary);
  std::stringstream bad("cspw v1 2 2 2 1\nscope: 0 1 ; table: 012\n");
  CHECK_THROWS_AS(read_csp(bad), ParseError);
}
