#include <algorithm>
#include <cmath>

#include "pcpkit/errors.hpp"
#include "pcpkit/harness.hpp"
#include "pcpkit/rng.hpp"

namespace pcpkit {

void LawTally::record(const Rat& lhs, const Rat& rhs) {
  ++checks;
  if (lhs < rhs) ++failures;
  Rat slack = lhs - rhs;
  if (!min_slack || slack < *min_slack) min_slack = slack;
}

bool StageLawReport::ok() const {
  if (!completeness_failures.empty()) return false;
  return std::all_of(laws.begin(), laws.end(), [](const LawTally& l) { return l.failures == 0; });
}

namespace {

Assignment random_assignment(std::uint32_t n, std::uint32_t W, Rng& rng) {
  Assignment u;
  u.values.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) u.values.push_back(static_cast<Symbol>(rng.below(W)));
  return u;
}

void perturb(Assignment& y, std::uint32_t W, unsigned flips, Rng& rng) {
  if (y.values.empty()) return;
  for (unsigned f = 0; f < flips; ++f) y.values[rng.below(y.values.size())] = static_cast<Symbol>(rng.below(W));
}

StageSize size_of(const std::string& stage, const CspInstance& phi) {
  return {stage, phi.n(), phi.m(), std::log2(static_cast<double>(phi.W())), phi.q()};
}

}  // namespace

PlantedCsp planted_csp(std::uint32_t q, std::uint32_t W, std::uint32_t n, std::size_t m, Rng& rng) {
  Assignment plant = random_assignment(n, W, rng);
  CspInstance r = random_csp(q, W, n, m, rng);
  std::vector<Constraint> cs = r.constraints();
  for (auto& c : cs) {
    std::vector<Symbol> vals;
    for (auto v : c.scope) vals.push_back(plant.values[v]);
    c.table[c.index_of(vals, W)] = 1;
  }
  return {CspInstance(q, W, n, std::move(cs)), std::move(plant)};
}

StageLawReport check_stage_laws(const PlantedCsp& in, const PipelineConfig& cfg, unsigned assignments,
                                std::uint64_t seed) {
  const CspInstance& phi = in.phi;
  if (phi.satisfied_count(in.plant) != phi.m()) throw PreconditionError("planted assignment does not satisfy the instance");
  Rng rng(seed);
  StageLawReport rep;
  AmplifyStages s = amplify_stages(phi, cfg);
  rep.sizes = s.sizes;
  const PoweredInstance& pw = *s.powered;

  const Assignment lifted = lift_to_2cspW(phi, in.plant);
  const Assignment spread = spread_to_clouds(s.regular, lifted);
  const Assignment padded = pad_assignment(s.nice, spread);
  if (frac_satisfied(s.two_csp, lifted) != Rat(1)) rep.completeness_failures.emplace_back("qcsp_to_2csp");
  if (frac_satisfied(s.regular.psi, spread) != Rat(1)) rep.completeness_failures.emplace_back("regularize");
  if (frac_satisfied(s.nice.psi, padded) != Rat(1)) rep.completeness_failures.emplace_back("make_nice");
  if (!pw.frac_unsatisfied(pw.induced(padded)).is_zero()) rep.completeness_failures.emplace_back("power");

  const CspInstance& two = s.two_csp;
  const CspInstance& reg = s.regular.psi;
  const CspInstance& nice = s.nice.psi;

  LawTally n1{"qcsp_to_2csp"};
  for (unsigned a = 0; a < assignments; ++a) {
    Assignment y = random_assignment(two.n(), two.W(), rng);
    if (a % 2 == 0) {
      Assignment lift = lift_to_2cspW(phi, random_assignment(phi.n(), phi.W(), rng));
      for (std::uint32_t v = 0; v < phi.n(); ++v) y.values[v] = lift.values[v];
      if (a % 4 == 0) y = lift_to_2cspW(phi, random_assignment(phi.n(), phi.W(), rng));
      perturb(y, two.W(), a % 3, rng);
    }
    n1.record(frac_unsatisfied(two, y) * Rat(phi.q()), frac_unsatisfied(phi, project_source(phi, y)));
  }

  const std::uint64_t d = cfg.cloud_degree, e = cfg.cloud_base;
  const Rat reg_factor = Rat(100) * Rat(two.W()) * Rat(d * e);
  LawTally n2{"regularize"};
  for (unsigned a = 0; a < assignments; ++a) {
    Assignment z = a % 2 ? random_assignment(reg.n(), reg.W(), rng)
                         : spread_to_clouds(s.regular, random_assignment(two.n(), two.W(), rng));
    if (a % 2 == 0) perturb(z, reg.W(), 1 + a % 5, rng);
    n2.record(frac_unsatisfied(reg, z) * reg_factor, frac_unsatisfied(two, cloud_plurality(s.regular, z)));
  }

  const Rat nice_factor = Rat(10) * Rat(std::uint64_t{cfg.d} * cfg.pad_base);
  LawTally n3{"make_nice"};
  for (unsigned a = 0; a < assignments; ++a) {
    Assignment y = a % 2 ? random_assignment(nice.n(), nice.W(), rng)
                         : pad_assignment(s.nice, random_assignment(reg.n(), reg.W(), rng));
    if (a % 2 == 0) perturb(y, nice.W(), 1 + a % 5, rng);
    n3.record(frac_unsatisfied(nice, y) * nice_factor, frac_unsatisfied(reg, restrict_assignment(s.nice, y)));
  }

  // sqrt(t) rounded up; the right-hand side grows with it, so rounding never weakens the check.
  mpz_class root = sqrt(mpz_class(cfg.t));
  if (root * root < cfg.t) ++root;
  const Rat sqrt_t(root, 1);
  const Rat D(pw.degree());
  const Rat cap = Rat(1) / (D * sqrt_t);
  const Rat power_factor = sqrt_t / (Rat(1000000) * D * pow(Rat(nice.W()), 5));
  LawTally pp{"power"};
  for (unsigned a = 0; a < assignments; ++a) {
    PoweredAssignment y;
    if (a % 2) {
      y = pw.random_assignment(rng);
    } else {
      y = pw.induced(random_assignment(nice.n(), nice.W(), rng));
      for (unsigned f = 0; f < a % 7; ++f) {
        auto& ball = y.values[rng.below(y.values.size())];
        ball[rng.below(ball.size())] = static_cast<Symbol>(rng.below(nice.W()));
      }
    }
    Rat eps = frac_unsatisfied(nice, plurality_assignment(pw, y));
    pp.record(pw.frac_unsatisfied(y), std::min(eps, cap) * power_factor);
  }

  rep.laws = {std::move(n1), std::move(n2), std::move(n3), std::move(pp)};
  return rep;
}

StageLawReport check_reduction_law(const PlantedCsp& in, const PipelineConfig& cfg, unsigned proofs,
                                   std::uint64_t seed) {
  const CspInstance& phi = in.phi;
  if (phi.W() != 2 || phi.q() > 2) throw PreconditionError("reduction law runs on binary-alphabet 2CSPs");
  if (phi.satisfied_count(in.plant) != phi.m()) throw PreconditionError("planted assignment does not satisfy the instance");
  Rng rng(seed);
  StageLawReport rep;
  ReducedInstance red = alphabet_reduce(phi, cfg);
  rep.sizes.push_back(size_of("input", phi));
  rep.sizes.push_back({"alphabet_reduce", static_cast<std::uint32_t>(red.proof_bits()), phi.m(), 0, red.arity()});

  const auto honest = red.honest(in.plant);
  if (red.frac_satisfied(honest) != Rat(1)) rep.completeness_failures.emplace_back("alphabet_reduce");

  LawTally law{"alphabet_reduce"};
  LawTally blocks{"alphabet_reduce_block"};
  const Rat half = Rat(1) / Rat(2);
  for (unsigned a = 0; a < proofs; ++a) {
    std::vector<std::uint8_t> bits;
    if (a % 3 == 0) {
      bits = red.random_proof(rng);
    } else {
      bits = red.honest(random_assignment(phi.n(), 2, rng));
      for (unsigned f = 0; f < 1 + a % 4; ++f) bits[rng.below(bits.size())] ^= 1U;
    }
    Assignment dec = red.decode(bits);
    law.record(red.frac_unsatisfied(bits) * Rat(3), frac_unsatisfied(phi, dec));
    for (std::size_t c = 0; c < phi.m(); ++c)
      if (!phi.satisfies(c, dec)) blocks.record(half, red.block_accept(bits, c));
  }
  rep.laws = {std::move(law), std::move(blocks)};
  return rep;
}

CspInstance circulant_qcsp(std::uint32_t n, std::uint32_t W, Rng& rng) {
  if (n < 4) throw ParameterError("circulant family needs n >= 4");
  std::vector<Constraint> cs;
  for (std::uint32_t i = 0; i < n; ++i) {
    Constraint c;
    c.scope = {i, (i + 1) % n, (i + 3) % n};
    c.table.resize(std::size_t{W} * W * W);
    for (auto& b : c.table) b = rng.coin() ? 1 : 0;
    cs.push_back(std::move(c));
  }
  return CspInstance(3, W, n, std::move(cs));
}

BlowupSweep measure_blowup(std::span<const std::uint32_t> ns, std::uint32_t W, const PipelineConfig& cfg,
                           std::uint64_t seed) {
  if (ns.empty()) throw ParameterError("blowup sweep over no sizes");
  Rng rng(seed);
  BlowupSweep sweep;
  for (auto n : ns) {
    BlowupRow row;
    row.n = n;
    row.sizes = amplify_stages(circulant_qcsp(n, W, rng), cfg).sizes;
    std::vector<Constraint> ring;
    for (std::uint32_t i = 0; i < n; ++i) ring.push_back(Constraint{{i, (i + 1) % n}, {0, 1, 1, 0}});
    ReducedInstance red = alphabet_reduce(CspInstance(2, 2, n, std::move(ring)), cfg);
    row.reduced_constraints = red.constraint_count();
    row.reduced_source_constraints = n;
    sweep.rows.push_back(std::move(row));
  }
  const auto& first = sweep.rows.front().sizes;
  for (std::size_t k = 1; k < first.size(); ++k) sweep.names.push_back(first[k].stage);
  sweep.names.emplace_back("alphabet_reduce");
  sweep.factors.assign(sweep.names.size(), {});
  for (const auto& row : sweep.rows) {
    for (std::size_t k = 1; k < row.sizes.size(); ++k)
      sweep.factors[k - 1].push_back(static_cast<double>(row.sizes[k].m) / static_cast<double>(row.sizes[k - 1].m));
    Rat ratio = Rat(row.reduced_constraints, 1) / Rat(row.reduced_source_constraints);
    sweep.factors.back().push_back(ratio.to_double());
  }
  for (const auto& f : sweep.factors) {
    auto [lo, hi] = std::minmax_element(f.begin(), f.end());
    sweep.spread.push_back(*hi / *lo - 1);
  }
  return sweep;
}

}  // namespace pcpkit
