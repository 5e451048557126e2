#include <algorithm>
#include <array>

#include "pcpkit/errors.hpp"
#include "pcpkit/hadamard.hpp"

namespace pcpkit {

namespace {

std::uint64_t mask_of(unsigned bits) { return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1; }

mpz_class to_mpz(unsigned __int128 v) {
  mpz_class hi(static_cast<unsigned long>(static_cast<std::uint64_t>(v >> 64)));
  mpz_class lo(static_cast<unsigned long>(static_cast<std::uint64_t>(v)));
  return (hi << 64) + lo;
}

Rat pow2_fraction(const mpz_class& num, unsigned exp) { return Rat(num, mpz_class(1) << exp); }

unsigned gf2_rank(std::vector<std::uint64_t> rows) {
  unsigned rank = 0;
  for (unsigned bit = 0; bit < 64 && rank < rows.size(); ++bit) {
    std::uint64_t sel = std::uint64_t{1} << bit;
    auto it = std::find_if(rows.begin() + rank, rows.end(), [sel](std::uint64_t r) { return (r & sel) != 0; });
    if (it == rows.end()) continue;
    std::swap(*it, rows[rank]);
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (i != rank && (rows[i] & sel)) rows[i] ^= rows[rank];
    ++rank;
  }
  return rank;
}

std::vector<std::uint64_t> row_masks(const QuadSystem& sys) {
  std::vector<std::uint64_t> rows;
  rows.reserve(sys.m());
  for (const auto& r : sys.A) rows.push_back(bits_to_index(r));
  return rows;
}

}  // namespace

unsigned round_bits(const QuadSystem& sys) {
  unsigned K = sys.n1 * sys.n1;
  return 3 * sys.n1 + 3 * K + static_cast<unsigned>(sys.m());
}

RoundRandomness decode_round(const QuadSystem& sys, std::uint64_t w) {
  unsigned K = sys.n1 * sys.n1;
  if (round_bits(sys) > 64) throw ResourceError("round randomness does not fit one word");
  RoundRandomness r;
  unsigned off = 0;
  auto take = [&](unsigned bits) {
    std::uint64_t v = bits == 0 ? 0 : (w >> off) & mask_of(bits);
    off += bits;
    return v;
  };
  r.r1 = take(sys.n1);
  r.r2 = take(sys.n1);
  r.r3 = take(sys.n1);
  r.r4 = take(K);
  r.r5 = take(K);
  r.r6 = take(K);
  r.r7 = take(static_cast<unsigned>(sys.m()));
  return r;
}

RoundRandomness random_round(const QuadSystem& sys, Rng& rng) {
  unsigned K = sys.n1 * sys.n1;
  if (sys.m() > 64 || K > 64) throw ResourceError("round randomness field wider than one word");
  auto draw = [&rng](unsigned bits) { return rng.next() & mask_of(bits); };
  RoundRandomness r;
  r.r1 = draw(sys.n1);
  r.r2 = draw(sys.n1);
  r.r3 = draw(sys.n1);
  r.r4 = draw(K);
  r.r5 = draw(K);
  r.r6 = draw(K);
  r.r7 = draw(static_cast<unsigned>(sys.m()));
  return r;
}

std::uint64_t row_sum_index(const QuadSystem& sys, std::uint64_t r7) {
  std::uint64_t z = 0;
  for (std::size_t i = 0; i < sys.m(); ++i)
    if ((r7 >> i) & 1U) z ^= bits_to_index(sys.A[i]);
  return z;
}

bool exp_pcp_verify_round(const QuadSystem& sys, const ExpPcpProof& p, const RoundRandomness& w) {
  const BoolFn& f = p.f;
  const BoolFn& g = p.g;
  if (f(w.r1 ^ w.r2) != (f(w.r1) != f(w.r2))) return false;
  if (g(w.r4 ^ w.r5) != (g(w.r4) != g(w.r5))) return false;
  bool f1 = self_correct(f, w.r1, w.r3);
  bool f2 = self_correct(f, w.r2, w.r3);
  if (self_correct(g, tensor_index(w.r1, w.r2, sys.n1), w.r6) != (f1 && f2)) return false;
  std::uint64_t z = row_sum_index(sys, w.r7);
  return self_correct(g, z, w.r6) == (parity(w.r7 & bits_to_index(sys.b)) != 0);
}

bool exp_pcp_verify(const QuadSystem& sys, const ExpPcpProof& proof, std::span<const RoundRandomness> rounds) {
  return std::all_of(rounds.begin(), rounds.end(),
                     [&](const RoundRandomness& w) { return exp_pcp_verify_round(sys, proof, w); });
}

RoundAcceptance::RoundAcceptance(const QuadSystem& sys, ExpPcpProof proof)
    : n1_(sys.n1), K_(sys.n1 * sys.n1), m_(static_cast<unsigned>(sys.m())), proof_(std::move(proof)) {
  sys.validate();
  proof_.validate();
  if (proof_.n1 != sys.n1) throw ShapeError("proof and system disagree on n1");
  if (K_ > 20 || K_ + m_ > 30) throw ResourceError("exact round evaluation needs n1^2 <= 20 and n1^2 + m <= 30");
  bmask_ = bits_to_index(sys.b);
  auto rows = row_masks(sys);
  z_.assign(std::uint64_t{1} << m_, 0);
  for (std::uint64_t r7 = 1; r7 < z_.size(); ++r7)
    z_[r7] = z_[r7 & (r7 - 1)] ^ rows[static_cast<std::size_t>(__builtin_ctzll(r7))];

  auto spec = walsh_spectrum(proof_.g);
  __int128 cubes = 0;
  for (auto c : spec) cubes += static_cast<__int128>(c) * c * c;
  // Sum over pairs of chi(a) chi(b) chi(a+b) equals the cube sum divided by 2^K.
  __int128 signed_pairs = cubes >> K_;
  __int128 all_pairs = static_cast<__int128>(1) << (2 * K_);
  lin_g_pass_ = static_cast<std::uint64_t>((all_pairs + signed_pairs) / 2);

  std::vector<std::uint64_t> pts;
  for (std::uint64_t r1 = 0; r1 < (std::uint64_t{1} << n1_); ++r1)
    for (std::uint64_t r2 = 0; r2 < (std::uint64_t{1} << n1_); ++r2) pts.push_back(tensor_index(r1, r2, n1_));
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  xs_ = std::move(pts);

  rebuild_f_counts();
  rebuild_s();
  rebuild_g_sums();
  sum_total();
}

void RoundAcceptance::rebuild_f_counts() {
  const BoolFn& f = proof_.f;
  n0_.assign(xs_.size(), 0);
  n1c_.assign(xs_.size(), 0);
  std::uint64_t n = std::uint64_t{1} << n1_;
  for (std::uint64_t r1 = 0; r1 < n; ++r1) {
    for (std::uint64_t r2 = 0; r2 < n; ++r2) {
      if (f(r1 ^ r2) != (f(r1) != f(r2))) continue;
      auto xi = static_cast<std::size_t>(std::lower_bound(xs_.begin(), xs_.end(), tensor_index(r1, r2, n1_)) - xs_.begin());
      for (std::uint64_t r3 = 0; r3 < n; ++r3) {
        bool c = self_correct(f, r1, r3) && self_correct(f, r2, r3);
        ++(c ? n1c_[xi] : n0_[xi]);
      }
    }
  }
}

void RoundAcceptance::rebuild_s() {
  const BoolFn& g = proof_.g;
  s_.assign(std::uint64_t{1} << K_, 0);
  for (std::uint64_t r6 = 0; r6 < s_.size(); ++r6) {
    std::uint32_t c = 0;
    bool g6 = g(r6);
    for (std::uint64_t r7 = 0; r7 < z_.size(); ++r7) c += ((g(z_[r7] ^ r6) != g6) == (parity(r7 & bmask_) != 0)) ? 1 : 0;
    s_[r6] = c;
  }
}

void RoundAcceptance::rebuild_g_sums() {
  const auto& g = proof_.g.table();
  same_.assign(xs_.size(), 0);
  diff_.assign(xs_.size(), 0);
  for (std::size_t xi = 0; xi < xs_.size(); ++xi) {
    std::uint64_t x = xs_[xi];
    std::uint64_t same = 0, diff = 0;
    for (std::uint64_t r6 = 0; r6 < s_.size(); ++r6) (g[r6 ^ x] != g[r6] ? diff : same) += s_[r6];
    same_[xi] = same;
    diff_[xi] = diff;
  }
}

void RoundAcceptance::sum_total() {
  total_ = 0;
  for (std::size_t xi = 0; xi < xs_.size(); ++xi)
    total_ += static_cast<unsigned __int128>(n0_[xi]) * same_[xi] + static_cast<unsigned __int128>(n1c_[xi]) * diff_[xi];
}

std::uint64_t RoundAcceptance::pair_passes_through(std::uint64_t p) const {
  const auto& g = proof_.g.table();
  std::uint64_t n = std::uint64_t{1} << K_, c = 0;
  std::uint8_t gp = g[p];
  for (std::uint64_t b = 0; b < n; ++b) c += (g[p ^ b] == (gp ^ g[b])) ? 1U : 0U;
  for (std::uint64_t a = 0; a < n; ++a)
    if (a != p) c += (g[a ^ p] == (g[a] ^ gp)) ? 1U : 0U;
  for (std::uint64_t a = 1; a < n; ++a)
    if (a != p) c += (gp == (g[a] ^ g[a ^ p])) ? 1U : 0U;
  return c;
}

void RoundAcceptance::flip_g(std::uint64_t p) {
  std::vector<std::uint64_t> affected;
  affected.reserve(z_.size() + 1);
  affected.push_back(p);
  for (auto z : z_) affected.push_back(p ^ z);
  std::sort(affected.begin(), affected.end());
  affected.erase(std::unique(affected.begin(), affected.end()), affected.end());

  // Adds or removes the contributions of every r6 whose term can change with g(p).
  auto apply = [&](bool add) {
    const auto& g = proof_.g.table();
    for (std::size_t xi = 0; xi < xs_.size(); ++xi) {
      std::uint64_t x = xs_[xi];
      auto touch = [&](std::uint64_t r6) {
        std::uint64_t& slot = g[r6 ^ x] != g[r6] ? diff_[xi] : same_[xi];
        if (add) {
          slot += s_[r6];
        } else {
          slot -= s_[r6];
        }
      };
      for (auto r6 : affected) touch(r6);
      std::uint64_t extra = p ^ x;
      if (!std::binary_search(affected.begin(), affected.end(), extra)) touch(extra);
    }
  };

  apply(false);
  std::uint64_t lin_before = pair_passes_through(p);
  proof_.g.flip(p);
  const BoolFn& g = proof_.g;
  for (auto r6 : affected) {
    std::uint32_t c = 0;
    bool g6 = g(r6);
    for (std::uint64_t r7 = 0; r7 < z_.size(); ++r7) c += ((g(z_[r7] ^ r6) != g6) == (parity(r7 & bmask_) != 0)) ? 1 : 0;
    s_[r6] = c;
  }
  apply(true);
  lin_g_pass_ = lin_g_pass_ - lin_before + pair_passes_through(p);
  sum_total();
}

void RoundAcceptance::flip_f(std::uint64_t x) {
  proof_.f.flip(x);
  rebuild_f_counts();
  sum_total();
}

Rat RoundAcceptance::value() const {
  Rat lin = pow2_fraction(mpz_class(static_cast<unsigned long>(lin_g_pass_)), 2 * K_);
  return lin * pow2_fraction(to_mpz(total_), 3 * n1_ + K_ + m_);
}

Rat single_round_accept(const QuadSystem& sys, const ExpPcpProof& proof) { return RoundAcceptance(sys, proof).value(); }

AcceptResult exp_pcp_accept_prob(const QuadSystem& sys, const ExpPcpProof& proof, unsigned rounds, AcceptMode mode,
                                 const SampleOptions& sample) {
  sys.validate();
  proof.validate();
  if (proof.n1 != sys.n1) throw ShapeError("proof and system disagree on n1");
  if (rounds == 0) throw ParameterError("at least one verifier round is required");
  AcceptResult res;
  res.mode = mode;
  switch (mode) {
    case AcceptMode::Enumerate: {
      unsigned rb = round_bits(sys);
      if (static_cast<std::uint64_t>(rb) * rounds > kEnumerateBitBudget)
        throw ResourceError("randomness too long to enumerate");
      unsigned total_bits = rb * rounds;
      std::uint64_t accepted = 0;
      std::vector<RoundRandomness> ws(rounds);
      for (std::uint64_t w = 0; w < (std::uint64_t{1} << total_bits); ++w) {
        for (unsigned j = 0; j < rounds; ++j) ws[j] = decode_round(sys, (w >> (j * rb)) & mask_of(rb));
        accepted += exp_pcp_verify(sys, proof, ws) ? 1 : 0;
      }
      res.exact = pow2_fraction(mpz_class(static_cast<unsigned long>(accepted)), total_bits);
      res.trials = std::uint64_t{1} << total_bits;
      break;
    }
    case AcceptMode::Exact:
      res.exact = pow(single_round_accept(sys, proof), rounds);
      break;
    case AcceptMode::Sample: {
      if (sample.samples == 0) throw ParameterError("sample count must be positive");
      Rng rng(sample.seed);
      std::uint64_t accepted = 0;
      std::vector<RoundRandomness> ws(rounds);
      for (std::uint64_t s = 0; s < sample.samples; ++s) {
        for (auto& w : ws) w = random_round(sys, rng);
        accepted += exp_pcp_verify(sys, proof, ws) ? 1 : 0;
      }
      res.trials = sample.samples;
      res.estimate = static_cast<double>(accepted) / static_cast<double>(sample.samples);
      res.ci = clopper_pearson(accepted, sample.samples, sample.confidence);
      return res;
    }
  }
  res.estimate = res.exact->to_double();
  res.ci = {res.estimate, res.estimate};
  return res;
}

Rat linear_pair_accept(const QuadSystem& sys, const Bits& u, const Bits& v) {
  sys.validate();
  if (u.size() != sys.n1 || v.size() != static_cast<std::size_t>(sys.n1) * sys.n1)
    throw ShapeError("linear pair does not match the system's dimensions");
  std::uint64_t um = bits_to_index(u), vm = bits_to_index(v);
  std::vector<std::uint64_t> d(sys.n1);
  for (unsigned i = 0; i < sys.n1; ++i) d[i] = ((vm >> (i * sys.n1)) & mask_of(sys.n1)) ^ (u[i] ? um : 0);
  unsigned r = gf2_rank(d);
  Rat tensor_pass = r == 0 ? Rat(1) : Rat(1) / Rat(2) + pow2_fraction(mpz_class(1), r + 1);
  bool sat = true;
  for (std::size_t e = 0; e < sys.m(); ++e) sat = sat && (parity(bits_to_index(sys.A[e]) & vm) == sys.b[e]);
  return sat ? tensor_pass : tensor_pass / Rat(2);
}

LinearPairScan scan_linear_pairs(const QuadSystem& sys, std::size_t max_keep) {
  sys.validate();
  unsigned K = sys.n1 * sys.n1;
  if (sys.n1 + K > 22) throw ResourceError("linear pair scan limited to n1 + n1^2 <= 22");
  auto rows = row_masks(sys);
  std::uint64_t bmask = bits_to_index(sys.b);
  // The acceptance depends only on the rank of V + u u^T and on whether A v = b.
  std::vector<std::array<Rat, 2>> value_of(sys.n1 + 1);
  for (unsigned r = 0; r <= sys.n1; ++r) {
    Rat tensor_pass = r == 0 ? Rat(1) : Rat(1) / Rat(2) + pow2_fraction(mpz_class(1), r + 1);
    value_of[r] = {tensor_pass / Rat(2), tensor_pass};
  }
  LinearPairScan scan;
  int best_rank = -1, best_sat = -1;
  std::vector<std::uint64_t> d(sys.n1);
  for (std::uint64_t um = 0; um < (std::uint64_t{1} << sys.n1); ++um) {
    for (std::uint64_t vm = 0; vm < (std::uint64_t{1} << K); ++vm) {
      std::uint64_t av = 0;
      for (std::size_t e = 0; e < rows.size(); ++e) av |= static_cast<std::uint64_t>(parity(rows[e] & vm)) << e;
      int sat = av == bmask ? 1 : 0;
      for (unsigned i = 0; i < sys.n1; ++i) d[i] = ((vm >> (i * sys.n1)) & mask_of(sys.n1)) ^ (((um >> i) & 1U) ? um : 0);
      auto r = static_cast<int>(gf2_rank(d));
      ++scan.pairs;
      bool better = best_rank < 0 || value_of[static_cast<std::size_t>(r)][static_cast<std::size_t>(sat)] >
                                         value_of[static_cast<std::size_t>(best_rank)][static_cast<std::size_t>(best_sat)];
      if (better) {
        best_rank = r;
        best_sat = sat;
        scan.maximizers.clear();
      }
      if (r == best_rank && sat == best_sat && scan.maximizers.size() < max_keep)
        scan.maximizers.emplace_back(index_to_bits(um, sys.n1), index_to_bits(vm, K));
    }
  }
  scan.best = value_of[static_cast<std::size_t>(best_rank)][static_cast<std::size_t>(best_sat)];
  return scan;
}

AdversaryReport adversary_sweep(const QuadSystem& sys, const AdversaryOptions& opt) {
  AdversaryReport rep;
  auto scan = scan_linear_pairs(sys);
  rep.linear_pairs_best = scan.best;
  rep.worst = scan.best;
  rep.worst_family = "linear-pair";
  rep.proofs = scan.pairs;

  std::optional<RoundAcceptance> champion;
  Rat champion_value(-1);
  auto consider = [&](const RoundAcceptance& ev, const Rat& v, const char* family) {
    ++rep.proofs;
    if (v > rep.worst) {
      rep.worst = v;
      rep.worst_family = family;
    }
    if (v > champion_value) {
      champion_value = v;
      champion = ev;
    }
  };

  Rng rng(opt.seed);
  unsigned K = sys.n1 * sys.n1;
  std::uint64_t gsize = std::uint64_t{1} << K, fsize = std::uint64_t{1} << sys.n1;

  std::vector<ExpPcpProof> bases;
  for (std::uint64_t um = 0; um < fsize; ++um) bases.push_back(tensor_proof(index_to_bits(um, sys.n1)));
  for (const auto& [u, v] : scan.maximizers) bases.push_back(linear_proof(u, v));

  for (auto& base : bases) {
    RoundAcceptance ev(sys, base);
    consider(ev, ev.value(), "codeword");
    for (std::uint64_t x = 0; x < fsize; ++x) {
      RoundAcceptance probe = ev;
      probe.flip_f(x);
      consider(probe, probe.value(), "flip-f");
    }
    auto flip_g_once = [&](std::uint64_t p) {
      ev.flip_g(p);
      consider(ev, ev.value(), "flip-g");
      ev.flip_g(p);
    };
    if (gsize <= opt.exhaustive_flip_limit) {
      for (std::uint64_t p = 0; p < gsize; ++p) flip_g_once(p);
    } else {
      for (std::size_t s = 0; s < opt.sampled_flips; ++s) flip_g_once(rng.below(gsize));
    }
    for (std::size_t s = 0; s < opt.double_flips; ++s) {
      std::uint64_t p = rng.below(gsize), q = rng.below(gsize);
      if (p == q) continue;
      ev.flip_g(p);
      ev.flip_g(q);
      consider(ev, ev.value(), "flip-g2");
      ev.flip_g(q);
      ev.flip_g(p);
    }
  }

  for (std::size_t s = 0; s < opt.random_proofs; ++s) {
    ExpPcpProof p{sys.n1, BoolFn(sys.n1), BoolFn(K)};
    for (std::uint64_t x = 0; x < fsize; ++x) p.f.set(x, rng.coin());
    for (std::uint64_t x = 0; x < gsize; ++x) p.g.set(x, rng.coin());
    RoundAcceptance ev(sys, std::move(p));
    consider(ev, ev.value(), "random");
  }

  if (champion) {
    RoundAcceptance cur = *champion;
    Rat cur_value = champion_value;
    for (unsigned step = 0; step < opt.hill_steps; ++step) {
      std::optional<std::uint64_t> best_flip;
      Rat best_value = cur_value;
      for (unsigned c = 0; c < opt.hill_candidates; ++c) {
        std::uint64_t p = rng.below(gsize);
        cur.flip_g(p);
        Rat v = cur.value();
        consider(cur, v, "hill-climb");
        if (v > best_value) {
          best_value = v;
          best_flip = p;
        }
        cur.flip_g(p);
      }
      if (!best_flip) break;
      cur.flip_g(*best_flip);
      cur_value = best_value;
    }
  }
  return rep;
}

}  // namespace pcpkit
