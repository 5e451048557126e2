#include <map>

#include "pcpkit/errors.hpp"
#include "pcpkit/hadamard.hpp"

namespace pcpkit {

namespace {

std::uint64_t low_bits(std::uint64_t v, unsigned bits) { return bits >= 64 ? v : v & ((std::uint64_t{1} << bits) - 1); }

}  // namespace

Bits CircuitSystem::witness(std::uint64_t u1, std::uint64_t u2) const {
  Bits u = index_to_bits(u1 | (u2 << n1), 2 * n1);
  for (const auto& [a, b] : aux) u.push_back(static_cast<std::uint8_t>(u[a] & u[b]));
  return u;
}

CircuitSystem circuit_to_quadsys(const Predicate& c) {
  if (c.n1 == 0 || c.n1 > 4) throw ParameterError("predicate inputs limited to 1..4 bits per side");
  unsigned inputs = 2 * c.n1;
  if (c.table.size() != (std::size_t{1} << inputs)) throw ShapeError("predicate table must have 2^(2 n1) entries");

  std::vector<std::uint8_t> anf(c.table);
  for (auto& t : anf) t &= 1U;
  for (unsigned bit = 0; bit < inputs; ++bit)
    for (std::size_t s = 0; s < anf.size(); ++s)
      if ((s >> bit) & 1U) anf[s] ^= anf[s ^ (std::size_t{1} << bit)];

  CircuitSystem out;
  out.n1 = c.n1;
  std::map<std::size_t, unsigned> product_var;
  for (unsigned i = 0; i < inputs; ++i) product_var[std::size_t{1} << i] = i;
  // Variable holding the product over mask, defined by chaining lowest bits first.
  auto var_for = [&](std::size_t mask, auto&& self) -> unsigned {
    if (auto it = product_var.find(mask); it != product_var.end()) return it->second;
    unsigned top = 63U - static_cast<unsigned>(__builtin_clzll(mask));
    std::size_t rest = mask ^ (std::size_t{1} << top);
    unsigned left = self(rest, self);
    unsigned id = inputs + static_cast<unsigned>(out.aux.size());
    out.aux.emplace_back(left, top);
    product_var[mask] = id;
    return id;
  };
  struct Term {
    unsigned a, b;
  };
  std::vector<Term> terms;
  std::uint8_t constant = 0;
  for (std::size_t s = 0; s < anf.size(); ++s) {
    if (!anf[s]) continue;
    int deg = __builtin_popcountll(s);
    if (deg == 0) {
      constant ^= 1U;
    } else if (deg == 1) {
      unsigned i = static_cast<unsigned>(__builtin_ctzll(s));
      terms.push_back({i, i});
    } else {
      unsigned top = 63U - static_cast<unsigned>(__builtin_clzll(s));
      std::size_t rest = s ^ (std::size_t{1} << top);
      terms.push_back({var_for(rest, var_for), top});
    }
  }
  unsigned N = inputs + static_cast<unsigned>(out.aux.size());
  out.sys.n1 = N;
  Bits row(static_cast<std::size_t>(N) * N, 0);
  for (const auto& t : terms) row[t.a * N + t.b] ^= 1U;
  out.sys.A.push_back(row);
  out.sys.b.push_back(static_cast<std::uint8_t>(1U ^ constant));
  for (std::size_t k = 0; k < out.aux.size(); ++k) {
    Bits def(static_cast<std::size_t>(N) * N, 0);
    unsigned y = inputs + static_cast<unsigned>(k);
    def[y * N + y] ^= 1U;
    def[out.aux[k].first * N + out.aux[k].second] ^= 1U;
    out.sys.A.push_back(std::move(def));
    out.sys.b.push_back(0);
  }
  out.sys.validate();
  return out;
}

AssignmentTester::AssignmentTester(Predicate c, unsigned repetitions)
    : pred_(std::move(c)), reps_(repetitions), circuit_(circuit_to_quadsys(pred_)) {
  if (reps_ == 0) throw ParameterError("tester needs at least one repetition");
  if (circuit_.sys.n1 * circuit_.sys.n1 > kMaxTableBits) throw ResourceError("predicate circuit too large for a proof table");
}

TesterProof AssignmentTester::honest(std::uint64_t u1, std::uint64_t u2) const {
  if (!pred_(u1, u2)) throw PreconditionError("inputs are rejected by the predicate");
  return {wh_encode_index(u1, n1()), wh_encode_index(u2, n1()), exp_pcp_prove(circuit_.sys, circuit_.witness(u1, u2))};
}

std::uint64_t AssignmentTester::proof_bits() const {
  unsigned N = circuit_.sys.n1;
  return 2 * (std::uint64_t{1} << n1()) + (std::uint64_t{1} << N) + (std::uint64_t{1} << (N * N));
}

void AssignmentTester::check_shape(const TesterProof& p) const {
  unsigned N = circuit_.sys.n1;
  if (p.pi1.k() != n1() || p.pi2.k() != n1() || p.pi3.n1 != N) throw ShapeError("tester proof has the wrong shape");
  p.pi3.validate();
}

std::vector<std::uint8_t> AssignmentTester::flatten(const TesterProof& p) const {
  check_shape(p);
  std::vector<std::uint8_t> out;
  out.reserve(proof_bits());
  for (const BoolFn* t : {&p.pi1, &p.pi2, &p.pi3.f, &p.pi3.g}) out.insert(out.end(), t->table().begin(), t->table().end());
  return out;
}

TesterProof AssignmentTester::unflatten(std::span<const std::uint8_t> bits) const {
  if (bits.size() != proof_bits()) throw ShapeError("flat tester proof has the wrong length");
  unsigned N = circuit_.sys.n1;
  std::size_t off = 0;
  auto take = [&](unsigned k) {
    std::size_t len = std::size_t{1} << k;
    BoolFn f(k, std::vector<std::uint8_t>(bits.begin() + static_cast<std::ptrdiff_t>(off),
                                          bits.begin() + static_cast<std::ptrdiff_t>(off + len)));
    off += len;
    return f;
  };
  TesterProof p;
  p.pi1 = take(n1());
  p.pi2 = take(n1());
  p.pi3.n1 = N;
  p.pi3.f = take(N);
  p.pi3.g = take(N * N);
  return p;
}

std::vector<std::uint64_t> AssignmentTester::queries(const TesterRandomness& w) const {
  if (w.size() != reps_) throw ShapeError("tester randomness must hold one entry per repetition");
  unsigned N = circuit_.sys.n1;
  std::uint64_t o2 = std::uint64_t{1} << n1();
  std::uint64_t of = 2 * o2;
  std::uint64_t og = of + (std::uint64_t{1} << N);
  std::vector<std::uint64_t> q;
  q.reserve(kTesterQueriesPerRound * w.size());
  for (const auto& r : w) {
    q.insert(q.end(), {r.lin1_x, r.lin1_y, r.lin1_x ^ r.lin1_y});
    q.insert(q.end(), {o2 + r.lin2_x, o2 + r.lin2_y, o2 + (r.lin2_x ^ r.lin2_y)});
    const auto& e = r.exp;
    q.insert(q.end(), {of + e.r1, of + e.r2, of + (e.r1 ^ e.r2), of + (e.r1 ^ e.r3), of + (e.r2 ^ e.r3), of + e.r3});
    std::uint64_t t = tensor_index(e.r1, e.r2, N);
    std::uint64_t z = row_sum_index(circuit_.sys, e.r7);
    q.insert(q.end(), {og + e.r4, og + e.r5, og + (e.r4 ^ e.r5), og + (t ^ e.r6), og + e.r6, og + (z ^ e.r6)});
    q.insert(q.end(), {r.cat_x, o2 + r.cat_y, of + (r.cat_x | (r.cat_y << n1()))});
  }
  return q;
}

bool AssignmentTester::decide(const TesterRandomness& w, std::span<const std::uint8_t> answers) const {
  if (answers.size() != kTesterQueriesPerRound * w.size()) throw ShapeError("answer count differs from query count");
  std::uint64_t bmask = bits_to_index(circuit_.sys.b);
  for (std::size_t k = 0; k < w.size(); ++k) {
    auto a = answers.subspan(k * kTesterQueriesPerRound, kTesterQueriesPerRound);
    if (a[2] != (a[0] ^ a[1]) || a[5] != (a[3] ^ a[4]) || a[8] != (a[6] ^ a[7])) return false;
    unsigned f1 = a[9] ^ a[11], f2 = a[10] ^ a[11];
    if (a[14] != (a[12] ^ a[13])) return false;
    if ((a[15] ^ a[16]) != (f1 & f2)) return false;
    if ((a[17] ^ a[16]) != parity(w[k].exp.r7 & bmask)) return false;
    if (a[20] != (a[18] ^ a[19])) return false;
  }
  return true;
}

bool AssignmentTester::run(const TesterProof& p, const TesterRandomness& w) const {
  check_shape(p);
  unsigned N = circuit_.sys.n1;
  std::uint64_t o2 = std::uint64_t{1} << n1();
  std::uint64_t of = 2 * o2;
  std::uint64_t og = of + (std::uint64_t{1} << N);
  auto read = [&](std::uint64_t pos) -> std::uint8_t {
    if (pos < o2) return p.pi1(pos);
    if (pos < of) return p.pi2(pos - o2);
    if (pos < og) return p.pi3.f(pos - of);
    return p.pi3.g(pos - og);
  };
  auto q = queries(w);
  std::vector<std::uint8_t> answers(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) answers[i] = read(q[i]);
  return decide(w, answers);
}

unsigned AssignmentTester::round_bits() const { return 6 * n1() + pcpkit::round_bits(circuit_.sys); }

TesterRound AssignmentTester::decode_round(std::uint64_t w) const {
  if (round_bits() > 64) throw ResourceError("tester round randomness does not fit one word");
  TesterRound r;
  unsigned off = 0;
  auto take = [&](unsigned bits) {
    std::uint64_t v = bits == 0 ? 0 : low_bits(w >> off, bits);
    off += bits;
    return v;
  };
  r.lin1_x = take(n1());
  r.lin1_y = take(n1());
  r.lin2_x = take(n1());
  r.lin2_y = take(n1());
  unsigned eb = pcpkit::round_bits(circuit_.sys);
  r.exp = pcpkit::decode_round(circuit_.sys, take(eb));
  r.cat_x = take(n1());
  r.cat_y = take(n1());
  return r;
}

TesterRandomness AssignmentTester::random_string(Rng& rng) const {
  TesterRandomness w(reps_);
  for (auto& r : w) {
    r.lin1_x = low_bits(rng.next(), n1());
    r.lin1_y = low_bits(rng.next(), n1());
    r.lin2_x = low_bits(rng.next(), n1());
    r.lin2_y = low_bits(rng.next(), n1());
    r.exp = random_round(circuit_.sys, rng);
    r.cat_x = low_bits(rng.next(), n1());
    r.cat_y = low_bits(rng.next(), n1());
  }
  return w;
}

Rat AssignmentTester::round_accept(const TesterProof& p) const {
  check_shape(p);
  std::uint64_t n = std::uint64_t{1} << n1(), cat = 0;
  for (std::uint64_t x = 0; x < n; ++x)
    for (std::uint64_t y = 0; y < n; ++y) cat += (p.pi3.f(x | (y << n1())) == (p.pi1(x) != p.pi2(y))) ? 1 : 0;
  Rat concat = Rat(mpz_class(static_cast<unsigned long>(cat)), mpz_class(static_cast<unsigned long>(n * n)));
  return blr_pass_rate(p.pi1) * blr_pass_rate(p.pi2) * single_round_accept(circuit_.sys, p.pi3) * concat;
}

Rat AssignmentTester::accept_prob(const TesterProof& p) const { return pow(round_accept(p), reps_); }

std::pair<std::uint64_t, std::uint64_t> AssignmentTester::decode(const TesterProof& p) const {
  check_shape(p);
  return {bits_to_index(nearest_linear(p.pi1).u), bits_to_index(nearest_linear(p.pi2).u)};
}

}  // namespace pcpkit
