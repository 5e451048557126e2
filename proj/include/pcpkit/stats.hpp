#pragma once

#include <cstdint>

namespace pcpkit {

struct Interval {
  double lo = 0;
  double hi = 1;
};

// Two-sided Clopper-Pearson interval for a binomial proportion.
Interval clopper_pearson(std::uint64_t successes, std::uint64_t trials, double confidence = 0.99);

}  // namespace pcpkit
