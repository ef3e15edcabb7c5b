#pragma once

#include <span>

namespace lge {

/// Nearest-rank percentile: the ceil(p/100 * n)-th smallest value (1-based).
/// Requires a non-empty list and 0 < p <= 100.
double percentile_nearest_rank(std::span<const double> values, double p);

double mean(std::span<const double> values);
/// Median; average of the two middle values for even sizes.
double median(std::span<const double> values);
/// Sample standard deviation (n - 1 denominator).
double sample_sd(std::span<const double> values);

}  // namespace lge
