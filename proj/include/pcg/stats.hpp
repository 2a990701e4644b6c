#pragma once

#include <span>
#include <vector>

namespace pcg::stats {

double mean(std::span<const double> x);

// Sample standard deviation (n - 1 denominator). Returns 0 for fewer than
// two values; callers that care flag that case themselves.
double sample_sd(std::span<const double> x);

double median(std::span<const double> x);

struct MeanSd {
  double mean{0.0};
  double sd{0.0};
  std::size_t n{0};
};

MeanSd summarize(std::span<const double> x);

}  // namespace pcg::stats
