#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "pcpkit/errors.hpp"
#include "pcpkit/specgraph.hpp"

namespace pcpkit {

std::string to_string(SpectralMethod m) {
  switch (m) {
    case SpectralMethod::ExactSmallN: return "exact-small-n";
    case SpectralMethod::PowerIteration: return "power-iteration";
    case SpectralMethod::RayleighSample: return "rayleigh-sample";
  }
  return "unknown";
}

namespace {

Eigen::MatrixXd centered_walk(const RotationGraph& g) {
  const std::uint32_t n = g.n();
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(n, n, -1.0 / n);
  const double w = 1.0 / g.d();
  for (std::uint32_t v = 0; v < n; ++v)
    for (std::uint32_t i = 0; i < g.d(); ++i) m(v, g.neighbor(v, i)) += w;
  return m;
}

// y = (A - J) x for a mean-zero x, re-centred to absorb rounding drift.
void apply_centered(const RotationGraph& g, const std::vector<double>& x, std::vector<double>& y) {
  const double w = 1.0 / g.d();
  double mean = 0.0;
  for (std::uint32_t v = 0; v < g.n(); ++v) {
    double acc = 0.0;
    for (std::uint32_t i = 0; i < g.d(); ++i) acc += x[g.neighbor(v, i)];
    y[v] = acc * w;
    mean += y[v];
  }
  mean /= g.n();
  for (auto& e : y) e -= mean;
}

double norm2(const std::vector<double>& x) {
  double s = 0.0;
  for (double e : x) s += e * e;
  return std::sqrt(s);
}

std::vector<double> random_mean_zero(std::uint32_t n, Rng& rng) {
  std::vector<double> x(n);
  double mean = 0.0;
  for (auto& e : x) {
    e = rng.unit() - 0.5;
    mean += e;
  }
  mean /= n;
  for (auto& e : x) e -= mean;
  return x;
}

// beta*I + sign*(A - J), scaled by n*d*den(beta) into an integer matrix.
std::vector<mpz_class> shifted_integer_matrix(const RotationGraph& g, const std::vector<std::uint32_t>& counts,
                                              const Rat& beta, int sign) {
  const std::uint32_t n = g.n();
  const mpz_class nd = mpz_class(static_cast<unsigned long>(n)) * static_cast<unsigned long>(g.d());
  const mpz_class diag = beta.num() * nd;
  std::vector<mpz_class> m(std::size_t{n} * n);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < n; ++j) {
      mpz_class centered = mpz_class(static_cast<unsigned long>(counts[std::size_t{i} * n + j])) *
                               static_cast<unsigned long>(n) -
                           static_cast<unsigned long>(g.d());
      mpz_class e = beta.den() * centered;
      if (sign < 0) e = -e;
      if (i == j) e += diag;
      m[std::size_t{i} * n + j] = std::move(e);
    }
  return m;
}

bool certifies(const RotationGraph& g, const std::vector<std::uint32_t>& counts, const Rat& beta) {
  auto lower = shifted_integer_matrix(g, counts, beta, -1);
  if (!positive_definite(lower, g.n())) return false;
  auto upper = shifted_integer_matrix(g, counts, beta, +1);
  return positive_definite(upper, g.n());
}

SpectralEstimate exact_small_n(const RotationGraph& g, const SpectralOptions& opt) {
  if (g.n() > opt.exact_cap) throw ResourceError("graph exceeds the exact spectral cap");
  if (g.n() == 1) return {Rat(0), SpectralMethod::ExactSmallN, Rat(0)};
  double mu = std::min(lambda_float(g), 1.0);
  Rat estimate = Rat(mpq_class(mu));
  auto counts = multiplicity_matrix(g);
  for (unsigned bits = opt.margin_bits; bits >= 4; bits -= 2) {
    Rat beta = dyadic_above(mu + std::ldexp(1.0, -static_cast<int>(bits)), bits + 12);
    if (certifies(g, counts, beta)) return {beta, SpectralMethod::ExactSmallN, beta - estimate};
  }
  // lambda <= 1 always holds; this enclosure cannot fail.
  Rat beta = Rat(1) + Rat(mpz_class(1), mpz_class(1) << 20);
  if (!certifies(g, counts, beta)) throw ConstructionError("spectral certificate failed at the trivial bound");
  return {beta, SpectralMethod::ExactSmallN, beta - estimate};
}

SpectralEstimate power_iteration(const RotationGraph& g, const SpectralOptions& opt) {
  if (g.n() == 1) return {Rat(0), SpectralMethod::PowerIteration, Rat(0)};
  Rng rng(opt.seed);
  auto x = random_mean_zero(g.n(), rng);
  std::vector<double> y(g.n()), z(g.n());
  double rho = 0.0, res = 1.0;
  for (unsigned it = 0; it < opt.iterations; ++it) {
    double nx = norm2(x);
    if (nx == 0.0) break;
    for (auto& e : x) e /= nx;
    apply_centered(g, x, y);
    apply_centered(g, y, z);
    double ny = norm2(y);
    rho = ny * ny;
    double r2 = 0.0;
    for (std::uint32_t v = 0; v < g.n(); ++v) r2 += (z[v] - rho * x[v]) * (z[v] - rho * x[v]);
    res = std::sqrt(r2);
    std::swap(x, z);
    if (res < 1e-12) break;
  }
  double upper = std::sqrt(std::min(rho + res, 1.0 + res));
  return {Rat(mpq_class(upper)), SpectralMethod::PowerIteration, Rat(mpq_class(res))};
}

SpectralEstimate rayleigh_sample(const RotationGraph& g, const SpectralOptions& opt) {
  if (g.n() == 1) return {Rat(0), SpectralMethod::RayleighSample, Rat(0)};
  Rng rng(opt.seed);
  std::vector<double> y(g.n());
  double best = 0.0;
  for (unsigned s = 0; s < opt.samples; ++s) {
    auto x = random_mean_zero(g.n(), rng);
    double nx = norm2(x);
    if (nx == 0.0) continue;
    apply_centered(g, x, y);
    best = std::max(best, norm2(y) / nx);
  }
  best = std::min(best, 1.0);
  // A sampled ratio only bounds lambda from below; the residual spans the gap to the trivial bound.
  return {Rat(mpq_class(best)), SpectralMethod::RayleighSample, Rat(1) - Rat(mpq_class(best))};
}

}  // namespace

double lambda_float(const RotationGraph& g) {
  if (g.n() == 1) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(centered_walk(g), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

bool positive_definite(std::span<const mpz_class> m, std::uint32_t n) {
  if (m.size() != std::size_t{n} * n) throw ShapeError("matrix has wrong entry count");
  std::vector<mpz_class> a(m.begin(), m.end());
  mpz_class prev = 1;
  for (std::uint32_t k = 0; k < n; ++k) {
    const mpz_class pivot = a[std::size_t{k} * n + k];
    if (sgn(pivot) <= 0) return false;
    for (std::uint32_t i = k + 1; i < n; ++i) {
      const mpz_class aik = a[std::size_t{i} * n + k];
      for (std::uint32_t j = k + 1; j < n; ++j) {
        mpz_class& aij = a[std::size_t{i} * n + j];
        aij = aij * pivot - aik * a[std::size_t{k} * n + j];
        mpz_divexact(aij.get_mpz_t(), aij.get_mpz_t(), prev.get_mpz_t());
      }
    }
    prev = pivot;
  }
  return true;
}

SpectralEstimate lambda_upper(const RotationGraph& g, SpectralMethod mode, const SpectralOptions& opt) {
  switch (mode) {
    case SpectralMethod::ExactSmallN: return exact_small_n(g, opt);
    case SpectralMethod::PowerIteration: return power_iteration(g, opt);
    case SpectralMethod::RayleighSample: return rayleigh_sample(g, opt);
  }
  throw ParameterError("unknown spectral mode");
}

SpectralEstimate lambda_auto(const RotationGraph& g, const SpectralOptions& opt) {
  if (g.n() <= opt.exact_cap) return exact_small_n(g, opt);
  return power_iteration(g, opt);
}

}  // namespace pcpkit
