#include "pcpkit/stats.hpp"

#include <boost/math/distributions/beta.hpp>

#include "pcpkit/errors.hpp"

namespace pcpkit {

Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence) {
  if (trials == 0) throw ParameterError("confidence interval over zero trials");
  if (successes > trials) throw ParameterError("more successes than trials");
  if (!(confidence > 0 && confidence < 1)) throw ParameterError("confidence must lie in (0,1)");
  double alpha = 1 - confidence;
  auto k = static_cast<double>(successes);
  auto n = static_cast<double>(trials);
  Interval iv;
  if (successes > 0) iv.lo = boost::math::quantile(boost::math::beta_distribution<>(k, n - k + 1), alpha / 2);
  if (successes < trials) iv.hi = boost::math::quantile(boost::math::beta_distribution<>(k + 1, n - k), 1 - alpha / 2);
  return iv;
}

}  // namespace pcpkit
