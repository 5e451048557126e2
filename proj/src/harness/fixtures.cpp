#include "pcpkit/harness.hpp"

namespace pcpkit {

namespace {

Cnf all_sign_patterns(std::uint32_t n) {
  Cnf cnf;
  cnf.num_vars = n;
  for (std::uint32_t s = 0; s < (1U << n); ++s) {
    std::vector<int> c;
    for (std::uint32_t v = 0; v < n; ++v) c.push_back((s >> v) & 1U ? static_cast<int>(v + 1) : -static_cast<int>(v + 1));
    cnf.clauses.push_back(std::move(c));
  }
  return cnf;
}

// Three pigeons, two holes; pigeon i in hole h is variable 2i+h+1.
Cnf pigeonhole_3_2() {
  Cnf cnf;
  cnf.num_vars = 6;
  auto p = [](int i, int h) { return 2 * i + h + 1; };
  for (int i = 0; i < 3; ++i) cnf.clauses.push_back({p(i, 0), p(i, 1)});
  for (int h = 0; h < 2; ++h)
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) cnf.clauses.push_back({-p(i, h), -p(j, h)});
  return cnf;
}

}  // namespace

std::vector<Fixture> builtin_fixtures() {
  std::vector<Fixture> out;
  out.push_back({"contradiction", Cnf{1, {{1}, {-1}}}, false});
  out.push_back({"all_signs_2", all_sign_patterns(2), false});
  out.push_back({"all_signs_3", all_sign_patterns(3), false});
  out.push_back({"pigeonhole_3_2", pigeonhole_3_2(), false});
  out.push_back({"implication_refuted_4", Cnf{4, {{1}, {-1, 2}, {-2, 3}, {-3, 4}, {-4}}}, false});
  out.push_back({"implication_chain_4", Cnf{4, {{1}, {-1, 2}, {-2, 3}, {-3, 4}}}, true});
  out.push_back({"mixed_3", Cnf{3, {{1, 2, 3}, {-1, -2}, {2, -3}, {-2, 3}}}, true});
  out.push_back({"wide_5", Cnf{5, {{1, 2, 3, 4, 5}, {-1}, {-2}, {-3}, {-4}}}, true});
  return out;
}

}  // namespace pcpkit
