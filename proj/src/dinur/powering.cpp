#include <algorithm>
#include <cmath>
#include <deque>

#include "pcpkit/dinur.hpp"
#include "pcpkit/errors.hpp"

namespace pcpkit {

namespace {

unsigned isqrt(unsigned t) {
  auto r = static_cast<unsigned>(std::lround(std::sqrt(static_cast<double>(t))));
  while (r * r > t) --r;
  while ((r + 1) * (r + 1) <= t) ++r;
  return r;
}

}  // namespace

PoweredInstance::PoweredInstance(CspInstance psi, unsigned t, std::uint64_t path_budget)
    : psi_(std::move(psi)), t_(t), radius_(0), paths_(0) {
  const unsigned r = isqrt(t);
  if (t < 1 || r * r != t) throw ParameterError("t must be a perfect square >= 1");
  radius_ = t + r;
  if (psi_.m() == 0) {
    const std::uint32_t n = psi_.n();
    if (std::uint64_t{n} * n > (std::uint64_t{1} << 26)) throw ResourceError("ball index table too large");
    slots_.assign(std::size_t{n} * n, -1);
    for (std::uint32_t v = 0; v < n; ++v) {
      balls_.push_back({v});
      slots_[std::size_t{v} * n + v] = 0;
    }
    return;
  }
  ConstraintGraph cg = constraint_graph(psi_);
  if (!cg.graph) throw PreconditionError("powering needs a regular constraint graph");
  graph_ = *cg.graph;
  port_constraint_ = std::move(cg.port_constraint);

  const std::uint32_t n = psi_.n();
  const std::uint32_t D = graph_.d();
  std::uint64_t paths = n;
  for (unsigned s = 0; s < 2 * t + 1; ++s) {
    if (paths > path_budget / D) throw ResourceError("powered instance exceeds the path budget");
    paths *= D;
  }
  if (paths > path_budget) throw ResourceError("powered instance exceeds the path budget");
  paths_ = paths;
  if (std::uint64_t{n} * n > (std::uint64_t{1} << 26)) throw ResourceError("ball index table too large");

  slots_.assign(std::size_t{n} * n, -1);
  balls_.resize(n);
  std::vector<unsigned> depth(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    auto& ball = balls_[v];
    std::int32_t* slot = &slots_[std::size_t{v} * n];
    std::deque<std::uint32_t> queue{v};
    slot[v] = 0;
    depth[v] = 0;
    ball.push_back(v);
    while (!queue.empty()) {
      std::uint32_t u = queue.front();
      queue.pop_front();
      if (depth[u] == radius_) continue;
      for (std::uint32_t i = 0; i < D; ++i) {
        std::uint32_t w = graph_.neighbor(u, i);
        if (slot[w] >= 0) continue;
        slot[w] = static_cast<std::int32_t>(ball.size());
        depth[w] = depth[u] + 1;
        ball.push_back(w);
        queue.push_back(w);
      }
    }
  }
}

std::size_t PoweredInstance::max_ball() const {
  std::size_t best = 0;
  for (const auto& b : balls_) best = std::max(best, b.size());
  return best;
}

std::int64_t PoweredInstance::slot(std::uint32_t v, std::uint32_t u) const {
  if (v >= n() || u >= n()) throw IndexError("vertex out of range");
  return slots_[std::size_t{v} * n() + u];
}

double PoweredInstance::alphabet_log2() const {
  return static_cast<double>(max_ball()) * std::log2(static_cast<double>(psi_.W()));
}

PoweredAssignment PoweredInstance::induced(const Assignment& u) const {
  psi_.check_assignment(u);
  PoweredAssignment y;
  y.values.resize(n());
  for (std::uint32_t v = 0; v < n(); ++v)
    for (auto w : balls_[v]) y.values[v].push_back(u.values[w]);
  return y;
}

PoweredAssignment PoweredInstance::random_assignment(Rng& rng) const {
  PoweredAssignment y;
  y.values.resize(n());
  for (std::uint32_t v = 0; v < n(); ++v)
    for (std::size_t s = 0; s < balls_[v].size(); ++s) y.values[v].push_back(static_cast<Symbol>(rng.below(psi_.W())));
  return y;
}

void PoweredInstance::check_assignment(const PoweredAssignment& y) const {
  if (y.values.size() != n()) throw ShapeError("powered assignment needs one ball value per vertex");
  for (std::uint32_t v = 0; v < n(); ++v) {
    if (y.values[v].size() != balls_[v].size()) throw ShapeError("ball value has the wrong length");
    for (auto s : y.values[v])
      if (s >= psi_.W()) throw ShapeError("ball value symbol outside the alphabet");
  }
}

std::vector<std::uint32_t> PoweredInstance::path(std::uint64_t p) const {
  if (p >= paths_) throw IndexError("path index out of range");
  const std::uint32_t D = graph_.d();
  const unsigned steps = 2 * t_ + 1;
  std::vector<std::uint32_t> ports(steps);
  for (unsigned s = steps; s-- > 0;) {
    ports[s] = static_cast<std::uint32_t>(p % D);
    p /= D;
  }
  std::vector<std::uint32_t> verts{static_cast<std::uint32_t>(p)};
  for (auto i : ports) verts.push_back(graph_.neighbor(verts.back(), i));
  return verts;
}

bool PoweredInstance::edge_violated(std::uint32_t c, std::uint32_t a, std::uint32_t b, Symbol va, Symbol vb) const {
  const Constraint& k = psi_.constraint(c);
  const std::uint32_t W = psi_.W();
  if (k.scope.size() == 1) return !k.table[va] || !k.table[vb];
  if (k.scope[0] == a && k.scope[1] == b) return !k.table[std::size_t{va} * W + vb];
  return !k.table[std::size_t{vb} * W + va];
}

bool PoweredInstance::accepts(std::uint64_t p, const PoweredAssignment& y) const {
  check_assignment(y);
  auto verts = path(p);
  const std::uint32_t D = graph_.d();
  const unsigned steps = 2 * t_ + 1;
  std::vector<std::uint32_t> ports(steps);
  std::uint64_t rest = p;
  for (unsigned s = steps; s-- > 0;) {
    ports[s] = static_cast<std::uint32_t>(rest % D);
    rest /= D;
  }
  const std::uint32_t first = verts.front();
  const std::uint32_t last = verts.back();
  for (unsigned j = 0; j < steps; ++j) {
    std::int64_t sa = slot(first, verts[j]);
    std::int64_t sb = slot(last, verts[j + 1]);
    if (sa < 0 || sb < 0) continue;
    std::uint32_t c = port_constraint_[std::size_t{verts[j]} * D + ports[j]];
    if (edge_violated(c, verts[j], verts[j + 1], y.values[first][static_cast<std::size_t>(sa)],
                      y.values[last][static_cast<std::size_t>(sb)]))
      return false;
  }
  return true;
}

std::uint64_t PoweredInstance::violated_count(const PoweredAssignment& y) const {
  check_assignment(y);
  if (paths_ == 0) return 0;
  const std::uint32_t n = this->n();
  const std::uint32_t D = graph_.d();
  const unsigned steps = 2 * t_ + 1;
  std::vector<std::uint32_t> verts(steps + 1);
  std::vector<std::uint32_t> cons(steps);
  std::vector<std::uint32_t> ports(steps, 0);
  std::uint64_t violated = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    verts[0] = v;
    std::fill(ports.begin(), ports.end(), 0);
    for (;;) {
      for (unsigned s = 0; s < steps; ++s) {
        cons[s] = port_constraint_[std::size_t{verts[s]} * D + ports[s]];
        verts[s + 1] = graph_.neighbor(verts[s], ports[s]);
      }
      const std::uint32_t last = verts[steps];
      const std::int32_t* sf = &slots_[std::size_t{v} * n];
      const std::int32_t* sl = &slots_[std::size_t{last} * n];
      for (unsigned j = 0; j < steps; ++j) {
        std::int32_t sa = sf[verts[j]];
        std::int32_t sb = sl[verts[j + 1]];
        if (sa < 0 || sb < 0) continue;
        if (edge_violated(cons[j], verts[j], verts[j + 1], y.values[v][static_cast<std::size_t>(sa)],
                          y.values[last][static_cast<std::size_t>(sb)])) {
          ++violated;
          break;
        }
      }
      unsigned s = steps;
      while (s > 0 && ++ports[s - 1] == D) ports[--s] = 0;
      if (s == 0) break;
    }
  }
  return violated;
}

Rat PoweredInstance::frac_unsatisfied(const PoweredAssignment& y) const {
  if (paths_ == 0) {
    check_assignment(y);
    return Rat(0);
  }
  return Rat(mpz_class(static_cast<unsigned long>(violated_count(y))), mpz_class(static_cast<unsigned long>(paths_)));
}

std::vector<std::uint64_t> PoweredInstance::walk_counts(std::uint32_t v) const {
  if (v >= n()) throw IndexError("vertex out of range");
  std::vector<std::uint64_t> cur(n(), 0), next(n());
  cur[v] = 1;
  for (unsigned s = 0; s < t_; ++s) {
    std::fill(next.begin(), next.end(), 0);
    for (std::uint32_t u = 0; u < n(); ++u) {
      if (cur[u] == 0) continue;
      for (std::uint32_t i = 0; i < graph_.d(); ++i) next[graph_.neighbor(u, i)] += cur[u];
    }
    cur.swap(next);
  }
  return cur;
}

PoweredInstance power_t(const NiceInstance& nice, unsigned t, std::uint64_t path_budget) {
  return PoweredInstance(nice.psi, t, path_budget);
}

Assignment plurality_assignment(const PoweredInstance& p, const PoweredAssignment& y) {
  p.check_assignment(y);
  Assignment u;
  u.values.assign(p.n(), 0);
  std::vector<std::uint64_t> tally(p.base().W());
  for (std::uint32_t i = 0; i < p.n(); ++i) {
    std::fill(tally.begin(), tally.end(), 0);
    auto counts = p.walk_counts(i);
    for (std::uint32_t k = 0; k < p.n(); ++k) {
      if (counts[k] == 0) continue;
      std::int64_t s = p.slot(k, i);
      tally[y.values[k][static_cast<std::size_t>(s)]] += counts[k];
    }
    u.values[i] = static_cast<Symbol>(std::max_element(tally.begin(), tally.end()) - tally.begin());
  }
  return u;
}

}  // namespace pcpkit
