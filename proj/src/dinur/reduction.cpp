#include <algorithm>
#include <map>

#include "pcpkit/dinur.hpp"
#include "pcpkit/errors.hpp"

namespace pcpkit {

namespace {

unsigned symbol_bits(std::uint32_t W) {
  unsigned s = 0;
  while ((std::uint32_t{1} << s) < W) ++s;
  if ((std::uint32_t{1} << s) != W) throw ParameterError("alphabet reduction needs a power-of-two alphabet");
  return s;
}

}  // namespace

ReducedInstance::ReducedInstance(CspInstance phi, unsigned repetitions) : phi_(std::move(phi)), reps_(repetitions) {
  if (phi_.q() > 2) throw PreconditionError("alphabet reduction needs a 2CSP");
  const unsigned s = symbol_bits(phi_.W());
  const std::uint32_t W = phi_.W();
  std::map<std::vector<std::uint8_t>, std::size_t> cache;
  total_bits_ = std::uint64_t{phi_.n()} << s;
  for (const auto& c : phi_.constraints()) {
    if (c.scope.empty()) throw PreconditionError("constraint with an empty scope has no tester");
    Predicate pred{s, std::vector<std::uint8_t>(std::size_t{1} << (2 * s), 0)};
    for (std::uint32_t a = 0; a < W; ++a)
      for (std::uint32_t b = 0; b < W; ++b)
        pred.table[a | (b << s)] = c.scope.size() == 1 ? c.table[a] : c.table[std::size_t{a} * W + b];
    auto it = cache.find(pred.table);
    if (it == cache.end()) {
      it = cache.emplace(pred.table, testers_.size()).first;
      testers_.emplace_back(std::move(pred), reps_);
    }
    tester_of_.push_back(it->second);
    block_offset_.push_back(total_bits_);
    total_bits_ += block_bits(tester_of_.size() - 1);
  }
}

std::uint64_t ReducedInstance::block_bits(std::size_t c) const {
  const AssignmentTester& t = tester(c);
  return t.proof_bits() - (std::uint64_t{2} << t.n1());
}

unsigned ReducedInstance::block_random_bits(std::size_t c) const { return tester(c).round_bits() * reps_; }

mpz_class ReducedInstance::constraint_count() const {
  unsigned widest = 0;
  for (std::size_t c = 0; c < phi_.m(); ++c) widest = std::max(widest, block_random_bits(c));
  return mpz_class(static_cast<unsigned long>(phi_.m())) << widest;
}

std::vector<std::uint8_t> ReducedInstance::honest(const Assignment& u) const {
  phi_.check_assignment(u);
  const unsigned s = symbol_bits(phi_.W());
  std::vector<std::uint8_t> bits;
  bits.reserve(total_bits_);
  for (auto v : u.values) {
    BoolFn f = wh_encode_index(v, s);
    bits.insert(bits.end(), f.table().begin(), f.table().end());
  }
  for (std::size_t c = 0; c < phi_.m(); ++c) {
    const auto& scope = phi_.constraint(c).scope;
    std::uint64_t a = u.values[scope[0]];
    std::uint64_t b = u.values[scope.size() == 1 ? scope[0] : scope[1]];
    const CircuitSystem& circ = tester(c).circuit();
    ExpPcpProof p = tensor_proof(circ.witness(a, b));
    bits.insert(bits.end(), p.f.table().begin(), p.f.table().end());
    bits.insert(bits.end(), p.g.table().begin(), p.g.table().end());
  }
  return bits;
}

std::vector<std::uint8_t> ReducedInstance::random_proof(Rng& rng) const {
  std::vector<std::uint8_t> bits(total_bits_);
  for (auto& b : bits) b = rng.coin() ? 1 : 0;
  return bits;
}

TesterProof ReducedInstance::block(const std::vector<std::uint8_t>& bits, std::size_t c) const {
  if (bits.size() != total_bits_) throw ShapeError("reduced proof has the wrong length");
  if (c >= phi_.m()) throw IndexError("constraint index out of range");
  const AssignmentTester& t = tester(c);
  const unsigned s = t.n1();
  const std::uint64_t len = std::uint64_t{1} << s;
  const auto& scope = phi_.constraint(c).scope;
  auto slice = [&](std::uint64_t off, std::uint64_t n) {
    return std::vector<std::uint8_t>(bits.begin() + static_cast<std::ptrdiff_t>(off),
                                     bits.begin() + static_cast<std::ptrdiff_t>(off + n));
  };
  std::uint32_t a = scope[0];
  std::uint32_t b = scope.size() == 1 ? scope[0] : scope[1];
  const unsigned N = t.circuit().sys.n1;
  const std::uint64_t off = block_offset_[c];
  const std::uint64_t flen = std::uint64_t{1} << N;
  return TesterProof{BoolFn(s, slice(std::uint64_t{a} * len, len)), BoolFn(s, slice(std::uint64_t{b} * len, len)),
                     ExpPcpProof{N, BoolFn(N, slice(off, flen)), BoolFn(N * N, slice(off + flen, std::uint64_t{1} << (N * N)))}};
}

Rat ReducedInstance::block_accept(const std::vector<std::uint8_t>& bits, std::size_t c) const {
  return tester(c).accept_prob(block(bits, c));
}

Rat ReducedInstance::frac_satisfied(const std::vector<std::uint8_t>& bits) const {
  if (bits.size() != total_bits_) throw ShapeError("reduced proof has the wrong length");
  if (phi_.m() == 0) return Rat(1);
  Rat sum;
  for (std::size_t c = 0; c < phi_.m(); ++c) sum += block_accept(bits, c);
  return sum / Rat(static_cast<unsigned long>(phi_.m()));
}

Assignment ReducedInstance::decode(const std::vector<std::uint8_t>& bits) const {
  if (bits.size() != total_bits_) throw ShapeError("reduced proof has the wrong length");
  const unsigned s = symbol_bits(phi_.W());
  const std::uint64_t len = std::uint64_t{1} << s;
  Assignment u;
  for (std::uint32_t v = 0; v < phi_.n(); ++v) {
    BoolFn f(s, std::vector<std::uint8_t>(bits.begin() + static_cast<std::ptrdiff_t>(v * len),
                                          bits.begin() + static_cast<std::ptrdiff_t>((v + 1) * len)));
    LinearFit fit = nearest_linear(f);
    u.values.push_back(fit.agreement >= Rat(99) / Rat(100) ? static_cast<Symbol>(bits_to_index(fit.u)) : 0);
  }
  return u;
}

std::vector<std::uint64_t> ReducedInstance::queries(std::size_t c, const TesterRandomness& w) const {
  if (c >= phi_.m()) throw IndexError("constraint index out of range");
  const AssignmentTester& t = tester(c);
  const std::uint64_t len = std::uint64_t{1} << t.n1();
  const auto& scope = phi_.constraint(c).scope;
  const std::uint64_t a = std::uint64_t{scope[0]} * len;
  const std::uint64_t b = std::uint64_t{scope.size() == 1 ? scope[0] : scope[1]} * len;
  auto q = t.queries(w);
  for (auto& p : q) {
    if (p < len) p += a;
    else if (p < 2 * len) p = b + (p - len);
    else p = block_offset_[c] + (p - 2 * len);
  }
  return q;
}

bool ReducedInstance::accepts(const std::vector<std::uint8_t>& bits, std::size_t c, const TesterRandomness& w) const {
  if (bits.size() != total_bits_) throw ShapeError("reduced proof has the wrong length");
  auto q = queries(c, w);
  std::vector<std::uint8_t> answers;
  answers.reserve(q.size());
  for (auto p : q) answers.push_back(bits[p]);
  return tester(c).decide(w, answers);
}

ReducedInstance alphabet_reduce(const CspInstance& phi, const PipelineConfig& cfg) {
  cfg.validate();
  if (phi.W() > cfg.W) throw ResourceError("alphabet " + std::to_string(phi.W()) + " exceeds the reduction cap " +
                                           std::to_string(cfg.W));
  return ReducedInstance(phi, cfg.tester_repetitions);
}

}  // namespace pcpkit
