#include "lge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "lge/errors.hpp"

namespace lge {

double percentile_nearest_rank(std::span<const double> values, double p) {
  if (values.empty()) throw InvalidArgument("percentile: empty list");
  if (!(p > 0.0 && p <= 100.0)) {
    throw InvalidArgument("percentile: p must lie in (0, 100]");
  }
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  // Tolerance absorbs representation error in p * n / 100 (e.g. 0.9 * 10).
  auto rank = static_cast<std::size_t>(std::ceil(p * n / 100.0 - 1e-9));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

double mean(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("mean: empty list");
  double s = 0.0;
  for (double v : values) s += v;
  return s / static_cast<double>(values.size());
}

double median(std::span<const double> values) {
  if (values.empty()) throw InvalidArgument("median: empty list");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  return n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
}

double sample_sd(std::span<const double> values) {
  if (values.size() < 2) throw InvalidArgument("sample_sd: need >= 2 values");
  const double mu = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - mu) * (v - mu);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

}  // namespace lge
