#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "lge/errors.hpp"
#include "lge/metrics.hpp"

namespace lge::metrics {
namespace {

struct Ranked {
  std::vector<int> doubled_ranks;  // 2 * average rank, always an integer
  std::vector<int> tie_sizes;
  int w_plus_doubled = 0;
};

Ranked rank_differences(const std::vector<double>& diffs) {
  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(diffs[a]) < std::abs(diffs[b]);
  });
  Ranked r;
  r.doubled_ranks.assign(n, 0);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
    // Positions i..j (0-based) share ranks i+1..j+1; doubled mean = i+j+2.
    const int doubled = static_cast<int>(i + j + 2);
    for (std::size_t k = i; k <= j; ++k) r.doubled_ranks[order[k]] = doubled;
    r.tie_sizes.push_back(static_cast<int>(j - i + 1));
    i = j + 1;
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (diffs[k] > 0.0) r.w_plus_doubled += r.doubled_ranks[k];
  }
  return r;
}

// Number of sign assignments whose doubled W+ is <= `bound`, by counting
// subset sums of the doubled ranks.
std::uint64_t count_at_most(const std::vector<int>& doubled_ranks, int bound) {
  const int total = std::accumulate(doubled_ranks.begin(), doubled_ranks.end(), 0);
  std::vector<std::uint64_t> ways(static_cast<std::size_t>(total) + 1, 0);
  ways[0] = 1;
  int reach = 0;
  for (int r : doubled_ranks) {
    for (int s = reach; s >= 0; --s) {
      if (ways[s] != 0) ways[s + r] += ways[s];
    }
    reach += r;
  }
  std::uint64_t count = 0;
  for (int s = 0; s <= std::min(bound, total); ++s) count += ways[s];
  return count;
}

}  // namespace

const char* method_name(WilcoxonMethod m) {
  switch (m) {
    case WilcoxonMethod::kExact:
      return "exact";
    case WilcoxonMethod::kNormal:
      return "normal-approximation";
    case WilcoxonMethod::kAuto:
      break;
  }
  return "auto";
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method) {
  if (a.size() != b.size()) throw InvalidArgument("wilcoxon: length mismatch");
  if (a.empty()) throw InvalidArgument("wilcoxon: empty input");
  std::vector<double> diffs;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    if (!std::isfinite(d)) throw InvalidArgument("wilcoxon: non-finite difference");
    if (d != 0.0) diffs.push_back(d);
  }
  if (diffs.empty()) {
    throw DegenerateInput("wilcoxon: all paired differences are zero");
  }
  const int n = static_cast<int>(diffs.size());
  const Ranked ranked = rank_differences(diffs);
  const int total_doubled = n * (n + 1);
  const int w_min_doubled = std::min(ranked.w_plus_doubled, total_doubled - ranked.w_plus_doubled);

  WilcoxonResult out;
  out.n_effective = n;
  out.statistic = w_min_doubled / 2.0;
  if (method == WilcoxonMethod::kAuto) {
    method = n <= kExactWilcoxonLimit ? WilcoxonMethod::kExact : WilcoxonMethod::kNormal;
  }
  out.method = method;

  if (method == WilcoxonMethod::kExact) {
    if (n > 60) throw InvalidArgument("wilcoxon: exact distribution limited to 60 pairs");
    const std::uint64_t below = count_at_most(ranked.doubled_ranks, w_min_doubled);
    const double p = 2.0 * std::ldexp(static_cast<double>(below), -n);
    out.p_value = std::min(1.0, p);
    return out;
  }

  const double nn = n;
  const double mu = nn * (nn + 1.0) / 4.0;
  double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
  for (int t : ranked.tie_sizes) var -= (static_cast<double>(t) * t * t - t) / 48.0;
  if (var <= 0.0) {
    out.p_value = 1.0;
    return out;
  }
  const double z = std::max(0.0, std::abs(out.statistic - mu) - 0.5) / std::sqrt(var);
  // Floor keeps p strictly positive when the tail underflows.
  out.p_value = std::clamp(std::erfc(z / std::sqrt(2.0)), std::numeric_limits<double>::min(), 1.0);
  return out;
}

}  // namespace lge::metrics
