#include <cstdio>
#include <limits>

#include "pcpkit/errors.hpp"
#include "pcpkit/specgraph.hpp"

namespace pcpkit {

CertifiedGraph find_base_expander(std::uint32_t n, std::uint32_t d, const Rat& target_lambda, std::uint64_t seed,
                                  std::uint64_t max_attempts, const SpectralOptions& opt) {
  if (n > opt.exact_cap) throw ResourceError("base expander too large to certify");
  if (target_lambda.sign() < 0) throw ParameterError("target lambda must be nonnegative");
  Rng rng(seed);
  const double target = target_lambda.to_double();
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t attempt = 1; attempt <= max_attempts; ++attempt) {
    RotationGraph g = random_regular(n, d, rng);
    double mu = lambda_float(g);
    best = std::min(best, mu);
    if (mu > target) continue;
    SpectralEstimate est = lambda_upper(g, SpectralMethod::ExactSmallN, opt);
    if (est.lambda_upper <= target_lambda) return {std::move(g), std::move(est), attempt};
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "no (%u,%u) graph with lambda <= %.6f after %llu samples; best %.6f", n, d,
                target, static_cast<unsigned long long>(max_attempts), best);
  throw NotFoundError(buf);
}

void validate_family(const FamilyConfig& cfg) {
  const std::uint32_t D = cfg.g1.d();
  if (cfg.g2.d() != D) throw ShapeError("family bases must share one degree");
  if (cfg.b == 0) throw ParameterError("family power must be positive");
  if (std::uint64_t{cfg.h.n()} != std::uint64_t{D} * D) throw ShapeError("|V(H)| must equal deg(G1)^2");
  std::uint64_t deg = 1;
  for (unsigned s = 0; s < cfg.b; ++s) deg *= 2ull * cfg.h.d();
  if (deg != D) throw ShapeError("(2 deg H)^b must equal the base degree");
}

mpz_class family_vertex_count(unsigned k, const FamilyConfig& cfg) {
  if (k == 0) throw ParameterError("family levels start at 1");
  std::vector<mpz_class> n(k + 1);
  n[1] = cfg.g1.n();
  if (k >= 2) n[2] = cfg.g2.n();
  for (unsigned j = 3; j <= k; ++j) n[j] = n[(j - 1) / 2] * n[j - 1 - (j - 1) / 2] * cfg.h.n();
  return n[k];
}

RotationGraph build_family(unsigned k, const FamilyConfig& cfg) {
  ExpanderFamily fam(cfg);
  return fam.level(k);
}

ExpanderFamily::ExpanderFamily(FamilyConfig cfg) : cfg_(std::move(cfg)) { validate_family(cfg_); }

const RotationGraph& ExpanderFamily::level(unsigned k) {
  if (k == 0) throw ParameterError("family levels start at 1");
  if (auto it = graphs_.find(k); it != graphs_.end()) return *it->second;
  std::shared_ptr<const RotationGraph> g;
  if (k == 1) {
    g = std::make_shared<const RotationGraph>(cfg_.g1);
  } else if (k == 2) {
    g = std::make_shared<const RotationGraph>(cfg_.g2);
  } else {
    mpz_class count = family_vertex_count(k, cfg_);
    if (count * cfg_.g1.d() > mpz_class(static_cast<unsigned long>(cfg_.port_budget)))
      throw ResourceError("family level exceeds the port budget");
    const unsigned lo = (k - 1) / 2;
    const unsigned hi = k - 1 - lo;
    RotationGraph prod = tensor(level(lo), level(hi));
    RotationGraph rep = replacement(prod, cfg_.h);
    g = std::make_shared<const RotationGraph>(cfg_.b == 1 ? std::move(rep)
                                                          : graph_power(rep, cfg_.b, cfg_.port_budget));
  }
  return *graphs_.emplace(k, std::move(g)).first->second;
}

const SpectralEstimate& ExpanderFamily::lambda(unsigned k) {
  if (auto it = lambdas_.find(k); it != lambdas_.end()) return it->second;
  return lambdas_.emplace(k, lambda_auto(level(k), cfg_.spectral)).first->second;
}

}  // namespace pcpkit
