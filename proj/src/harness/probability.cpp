#include <algorithm>

#include "pcpkit/errors.hpp"
#include "pcpkit/harness.hpp"
#include "pcpkit/rng.hpp"

namespace pcpkit {

BinomDist binom_dist(unsigned t) {
  BinomDist d;
  d.t = t;
  mpz_class total = 1;
  total <<= t;
  mpz_class c = 1;
  for (unsigned k = 0; k <= t; ++k) {
    d.probabilities.emplace_back(c, total);
    c = c * (t - k) / (k + 1);
  }
  return d;
}

namespace {

Rat l1_distance(const BinomDist& a, const BinomDist& b) {
  Rat sum;
  const std::size_t top = std::max(a.probabilities.size(), b.probabilities.size());
  for (std::size_t k = 0; k < top; ++k) {
    Rat pa = k < a.probabilities.size() ? a.probabilities[k] : Rat(0);
    Rat pb = k < b.probabilities.size() ? b.probabilities[k] : Rat(0);
    sum += abs(pa - pb);
  }
  return sum;
}

}  // namespace

Rat binom_statdist(unsigned t, unsigned shift) {
  mpz_class root = sqrt(mpz_class(t));
  if (t == 0 || root * root != t) throw ParameterError("binom_statdist needs a positive perfect square t");
  if (shift >= root) throw ParameterError("binom_statdist needs shift below sqrt(t)");
  BinomDist base = binom_dist(t);
  Rat up = l1_distance(base, binom_dist(t + shift));
  Rat down = l1_distance(base, binom_dist(t - shift));
  return std::max(up, down);
}

SecondMoment second_moment_bound(std::span<const Rat> values) {
  if (values.empty()) throw ParameterError("second moment of an empty sample");
  Rat sum, sq;
  std::size_t positive = 0;
  for (const auto& v : values) {
    if (v.sign() < 0) throw DomainError("second moment bound needs nonnegative values");
    if (v.sign() > 0) ++positive;
    sum += v;
    sq += v * v;
  }
  if (sq.is_zero()) throw DomainError("second moment bound undefined when every value is zero");
  const Rat n(static_cast<unsigned long>(values.size()));
  SecondMoment r;
  r.lhs = Rat(positive) / n;
  Rat mean = sum / n;
  r.rhs = mean * mean / (sq / n);
  return r;
}

std::string to_string(ProbMethod m) { return m == ProbMethod::Exact ? "exact" : "sampled"; }

ProbEstimate enumerate_or_sample(std::uint64_t space, const std::function<bool(std::uint64_t)>& accept,
                                 std::uint64_t budget, std::uint64_t seed, const SampleConfig& sample) {
  if (space == 0) throw ParameterError("probability over an empty space");
  ProbEstimate r;
  if (space <= budget) {
    std::uint64_t hits = 0;
    for (std::uint64_t w = 0; w < space; ++w) hits += accept(w) ? 1 : 0;
    r.method = ProbMethod::Exact;
    r.exact = Rat(hits) / Rat(space);
    r.estimate = r.exact->to_double();
    r.ci = {r.estimate, r.estimate};
    r.trials = space;
    r.successes = hits;
    return r;
  }
  if (sample.samples == 0) throw ParameterError("sampling needs at least one sample");
  Rng rng(seed);
  std::uint64_t hits = 0;
  for (std::uint64_t i = 0; i < sample.samples; ++i) hits += accept(rng.below(space)) ? 1 : 0;
  r.method = ProbMethod::Sampled;
  r.trials = sample.samples;
  r.successes = hits;
  r.estimate = static_cast<double>(hits) / static_cast<double>(sample.samples);
  r.ci = clopper_pearson(hits, sample.samples, sample.confidence);
  return r;
}

}  // namespace pcpkit
