#include <algorithm>
#include <cstdlib>

#include "pcpkit/dinur.hpp"
#include "pcpkit/errors.hpp"

namespace pcpkit {

void TmSpec::validate() const {
  if (states < 1) throw ParameterError("machine needs at least one state");
  if (symbols < 2) throw ParameterError("tape alphabet must contain the two input bits");
  if (initial >= states) throw ParameterError("initial state out of range");
  if (k < 1) throw ParameterError("time exponent must be at least 1");
  for (auto f : accepting)
    if (f >= states) throw ParameterError("accepting state out of range");
  for (const auto& r : rho) {
    if (r.state >= states || r.next_state >= states) throw ParameterError("transition state out of range");
    if (r.symbol >= symbols || r.write >= symbols) throw ParameterError("transition symbol out of range");
    if (r.move != 1 && r.move != -1) throw ParameterError("head moves must be -1 or 1");
    if (is_accepting(r.state)) throw ParameterError("accepting states have no transitions");
  }
}

bool TmSpec::is_accepting(std::uint32_t q) const {
  return std::find(accepting.begin(), accepting.end(), q) != accepting.end();
}

std::uint64_t TmSpec::encoded_size() const {
  return std::uint64_t{states} + symbols + 1 + accepting.size() + 5 * rho.size();
}

std::uint32_t Tableau::T(std::uint32_t cell, std::uint32_t sym, std::uint32_t step) const {
  return (step * N + cell) * symbols + sym;
}

std::uint32_t Tableau::H(std::uint32_t cell, std::uint32_t step) const { return N * N * symbols + step * N + cell; }

std::uint32_t Tableau::Q(std::uint32_t state, std::uint32_t step) const {
  return N * N * (symbols + 1) + step * states + state;
}

std::uint32_t Tableau::atoms() const { return N * N * (symbols + 1) + N * states; }

namespace {

int pos(std::uint32_t atom) { return static_cast<int>(atom) + 1; }
int neg(std::uint32_t atom) { return -static_cast<int>(atom) - 1; }

}  // namespace

CookLevinResult cooklevin(const TmSpec& tm, const Bits& x, std::uint64_t budget) {
  tm.validate();
  for (auto b : x)
    if (b > 1) throw ParameterError("input must be a bit string");
  std::uint64_t N = 1;
  for (unsigned i = 0; i < tm.k && !x.empty(); ++i) {
    N *= x.size();
    if (N > budget) throw ResourceError("tableau side |x|^k exceeds the budget");
  }
  N = std::max<std::uint64_t>(N, 1);
  std::uint64_t atoms = N * N * (tm.symbols + 1) + N * tm.states;
  std::uint64_t aux = N * N * tm.rho.size();
  if (atoms + aux > budget) throw ResourceError("tableau formula exceeds the variable budget");

  Tableau tab{static_cast<std::uint32_t>(N), tm.states, tm.symbols};
  const std::uint32_t n = tab.N;
  const std::uint32_t S = tm.symbols;
  Cnf cnf;
  std::uint32_t next_aux = tab.atoms();
  auto& cl = cnf.clauses;

  // f_input and f_ins; the head starts on cell 0.
  for (std::uint32_t j = 0; j < x.size(); ++j) cl.push_back({pos(tab.T(j, x[j], 0))});
  cl.push_back({pos(tab.Q(tm.initial, 0))});
  cl.push_back({pos(tab.H(0, 0))});

  // f_symb: exactly one symbol per cell and step.
  for (std::uint32_t s = 0; s < n; ++s)
    for (std::uint32_t i = 0; i < n; ++i) {
      std::vector<int> some;
      for (std::uint32_t l = 0; l < S; ++l) {
        some.push_back(pos(tab.T(i, l, s)));
        for (std::uint32_t l2 = l + 1; l2 < S; ++l2) cl.push_back({neg(tab.T(i, l, s)), neg(tab.T(i, l2, s))});
      }
      cl.push_back(std::move(some));
    }

  // f_state: one state, one head position, and cells change only under the head.
  for (std::uint32_t s = 0; s < n; ++s) {
    std::vector<int> some_q;
    for (std::uint32_t q = 0; q < tm.states; ++q) {
      some_q.push_back(pos(tab.Q(q, s)));
      for (std::uint32_t q2 = q + 1; q2 < tm.states; ++q2) cl.push_back({neg(tab.Q(q, s)), neg(tab.Q(q2, s))});
    }
    cl.push_back(std::move(some_q));
    std::vector<int> some_h;
    for (std::uint32_t i = 0; i < n; ++i) {
      some_h.push_back(pos(tab.H(i, s)));
      for (std::uint32_t i2 = i + 1; i2 < n; ++i2) cl.push_back({neg(tab.H(i, s)), neg(tab.H(i2, s))});
    }
    cl.push_back(std::move(some_h));
    if (s + 1 == n) continue;
    for (std::uint32_t i = 0; i < n; ++i)
      for (std::uint32_t l = 0; l < S; ++l)
        for (std::uint32_t l2 = 0; l2 < S; ++l2)
          if (l != l2) cl.push_back({neg(tab.T(i, l2, s)), neg(tab.T(i, l, s + 1)), pos(tab.H(i, s))});
  }

  // f_trans: a non-accepting configuration must take one of its transitions.
  for (std::uint32_t c = 0; c + 1 < n; ++c)
    for (std::uint32_t j = 0; j < n; ++j)
      for (std::uint32_t q = 0; q < tm.states; ++q) {
        if (tm.is_accepting(q)) continue;
        for (std::uint32_t sigma = 0; sigma < S; ++sigma) {
          std::vector<int> clause = {neg(tab.H(j, c)), neg(tab.Q(q, c)), neg(tab.T(j, sigma, c))};
          for (const auto& r : tm.rho) {
            if (r.state != q || r.symbol != sigma) continue;
            std::int64_t dest = std::int64_t{j} + r.move;
            if (dest < 0 || dest >= std::int64_t{n}) continue;
            std::uint32_t a = next_aux++;
            clause.push_back(pos(a));
            cl.push_back({neg(a), pos(tab.H(static_cast<std::uint32_t>(dest), c + 1))});
            cl.push_back({neg(a), pos(tab.Q(r.next_state, c + 1))});
            cl.push_back({neg(a), pos(tab.T(j, r.write, c + 1))});
          }
          cl.push_back(std::move(clause));
        }
      }

  std::vector<int> final_clause;
  for (auto r : tm.accepting)
    for (std::uint32_t s = 0; s < n; ++s) final_clause.push_back(pos(tab.Q(r, s)));
  cl.push_back(std::move(final_clause));

  cnf.num_vars = next_aux;
  return {std::move(cnf), tab};
}

Cnf split_clauses(const Cnf& cnf) {
  cnf.validate();
  Cnf out;
  out.num_vars = cnf.num_vars;
  for (const auto& c : cnf.clauses) {
    if (c.size() <= 3) {
      out.clauses.push_back(c);
      continue;
    }
    int y = static_cast<int>(++out.num_vars);
    out.clauses.push_back({c[0], c[1], y});
    for (std::size_t i = 2; i + 2 < c.size(); ++i) {
      int y2 = static_cast<int>(++out.num_vars);
      out.clauses.push_back({-y, c[i], y2});
      y = y2;
    }
    out.clauses.push_back({-y, c[c.size() - 2], c.back()});
  }
  return out;
}

Bits extend_split_assignment(const Cnf& cnf, const Bits& x) {
  cnf.validate();
  if (x.size() != cnf.num_vars) throw ShapeError("assignment length differs from the variable count");
  Bits out = x;
  auto lit = [&](int l) -> std::uint8_t {
    std::uint8_t v = x[static_cast<std::size_t>(std::abs(l)) - 1];
    return l > 0 ? v : static_cast<std::uint8_t>(v ^ 1U);
  };
  for (const auto& c : cnf.clauses) {
    if (c.size() <= 3) continue;
    // Chain variable i is true while no literal up to position i+1 holds.
    std::uint8_t acc = lit(c[0]) | lit(c[1]);
    out.push_back(acc ^ 1U);
    for (std::size_t i = 2; i + 2 < c.size(); ++i) {
      acc |= lit(c[i]);
      out.push_back(acc ^ 1U);
    }
  }
  return out;
}

CspInstance to_qcsp(const Cnf& cnf, std::uint32_t q0) {
  if (q0 < 3) throw ParameterError("q0 must be at least 3");
  Cnf split = split_clauses(cnf);
  std::vector<Constraint> cons;
  cons.reserve(split.clauses.size());
  for (const auto& c : split.clauses) {
    Constraint k;
    for (int l : c) {
      auto v = static_cast<std::uint32_t>(std::abs(l) - 1);
      if (std::find(k.scope.begin(), k.scope.end(), v) == k.scope.end()) k.scope.push_back(v);
    }
    const std::size_t r = k.scope.size();
    k.table.assign(std::size_t{1} << r, 0);
    for (std::size_t idx = 0; idx < k.table.size(); ++idx) {
      for (int l : c) {
        auto v = static_cast<std::uint32_t>(std::abs(l) - 1);
        std::size_t p = static_cast<std::size_t>(std::find(k.scope.begin(), k.scope.end(), v) - k.scope.begin());
        bool val = ((idx >> (r - 1 - p)) & 1U) != 0;
        if (val == (l > 0)) {
          k.table[idx] = 1;
          break;
        }
      }
    }
    cons.push_back(std::move(k));
  }
  return CspInstance(q0, 2, split.num_vars, std::move(cons));
}

}  // namespace pcpkit
