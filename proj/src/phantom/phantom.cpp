#include "lge/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <queue>

#include "lge/errors.hpp"

namespace lge::phantom {
namespace {

constexpr double kPi = std::numbers::pi;

struct Geometry {
  double cx = 0.0;
  double cy = 0.0;
  double r_in = 0.0;
  double r_out = 0.0;
};

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a - kPi;
}

void check_range(const Range& r, const std::string& name, double lo_bound,
                 double hi_bound) {
  if (!(r.lo < r.hi)) throw InvalidArgument("GenConfig." + name + ": degenerate range");
  if (r.lo < lo_bound || r.hi > hi_bound) {
    throw InvalidArgument("GenConfig." + name + ": range outside [" +
                          std::to_string(lo_bound) + ", " +
                          std::to_string(hi_bound) + "]");
  }
}

// Myocardial pixel indices ordered by `key`, ties by index.
std::vector<int> order_by(const std::vector<int>& pixels,
                          const std::vector<double>& key) {
  std::vector<int> idx(pixels.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(),
                   [&](int a, int b) { return key[a] < key[b]; });
  std::vector<int> out(idx.size());
  for (std::size_t i = 0; i < idx.size(); ++i) out[i] = pixels[idx[i]];
  return out;
}

class ScarBuilder {
 public:
  ScarBuilder(const Geometry& g, const std::vector<int>& myo_pixels, int size,
              PrngStream& rng)
      : g_(g), pixels_(myo_pixels), size_(size), rng_(rng) {}

  double angle_of(int p) const {
    return std::atan2(p / size_ - g_.cy, p % size_ - g_.cx);
  }
  double radius_of(int p) const {
    return std::hypot(p % size_ - g_.cx, p / size_ - g_.cy);
  }

  // Compact transmural sector around a random angle.
  std::vector<int> sector_order() {
    const double centre = rng_.uniform(-kPi, kPi);
    std::vector<double> key(pixels_.size());
    for (std::size_t i = 0; i < pixels_.size(); ++i) {
      key[i] = std::abs(wrap_angle(angle_of(pixels_[i]) - centre)) +
               0.02 * rng_.next_double();
    }
    return order_by(pixels_, key);
  }

  // Elliptical blob around a random myocardial seed with ragged borders.
  std::vector<int> blob_order() {
    const int seed = pixels_[rng_.below(pixels_.size())];
    const double seed_angle = angle_of(seed);
    const double seed_radius = radius_of(seed);
    const double radial_scale = rng_.uniform(0.7, 1.6);
    std::vector<double> key(pixels_.size());
    for (std::size_t i = 0; i < pixels_.size(); ++i) {
      const int p = pixels_[i];
      const double tangential =
          wrap_angle(angle_of(p) - seed_angle) * 0.5 * (g_.r_in + g_.r_out);
      const double radial = (radius_of(p) - seed_radius) * radial_scale;
      key[i] = std::hypot(tangential, radial) + rng_.uniform(0.0, 0.6);
    }
    return order_by(pixels_, key);
  }

  // Random pixels scattered over a wide sector, spilling outward by angle.
  std::vector<int> speckle_order() {
    const double centre = rng_.uniform(-kPi, kPi);
    const double half_width = rng_.uniform(0.6, 1.4);
    std::vector<double> key(pixels_.size());
    for (std::size_t i = 0; i < pixels_.size(); ++i) {
      const double da = std::abs(wrap_angle(angle_of(pixels_[i]) - centre));
      key[i] = da <= half_width ? rng_.next_double() : 1.0 + da;
    }
    return order_by(pixels_, key);
  }

 private:
  const Geometry& g_;
  const std::vector<int>& pixels_;
  int size_;
  PrngStream& rng_;
};

// Greedy growth: take pixels from `order` until `scar` holds `target` pixels.
void grow(std::vector<std::uint8_t>& scar, const std::vector<int>& order,
          int target, int& count) {
  for (int p : order) {
    if (count >= target) return;
    if (!scar[p]) {
      scar[p] = 1;
      ++count;
    }
  }
}

// Like grow, but each new pixel must touch the region (4-neighbourhood), taken
// in `order` priority. Keeps the result a single component.
void grow_connected(std::vector<std::uint8_t>& scar, const std::vector<int>& order,
                    const std::vector<std::uint8_t>& myo, int size, int target, int& count) {
  if (order.empty() || count >= target) return;
  std::vector<int> rank(myo.size(), -1);
  for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = static_cast<int>(i);
  std::priority_queue<int, std::vector<int>, std::greater<>> frontier;
  std::vector<std::uint8_t> queued(myo.size(), 0);
  auto push = [&](int p) {
    if (!queued[p] && myo[p]) {
      queued[p] = 1;
      frontier.push(rank[p]);
    }
  };
  push(order.front());
  while (count < target && !frontier.empty()) {
    const int p = order[frontier.top()];
    frontier.pop();
    if (!scar[p]) {
      scar[p] = 1;
      ++count;
    }
    const int y = p / size, x = p % size;
    if (y > 0) push(p - size);
    if (y + 1 < size) push(p + size);
    if (x > 0) push(p - 1);
    if (x + 1 < size) push(p + 1);
  }
}

std::vector<std::uint8_t> morph(const std::vector<std::uint8_t>& in,
                                const std::vector<std::uint8_t>& myo, int size,
                                bool dilate) {
  std::vector<std::uint8_t> out(in.size(), 0);
  auto at = [&](int y, int x) -> std::uint8_t {
    if (y < 0 || x < 0 || y >= size || x >= size) return 0;
    return in[y * size + x];
  };
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const int p = y * size + x;
      const int n = at(y - 1, x) + at(y + 1, x) + at(y, x - 1) + at(y, x + 1);
      if (dilate) {
        out[p] = (in[p] || n > 0) && myo[p] ? 1 : 0;
      } else {
        out[p] = in[p] && n == 4 ? 1 : 0;
      }
    }
  }
  return out;
}

}  // namespace

void GenConfig::validate() const {
  for (int d = 0; d < kDifficultyLevels; ++d) {
    if (counts[d] < 0) throw InvalidArgument("GenConfig.counts: negative count");
    check_range(contrast_gap[d], "contrast_gap", 0.0, 1.0);
    check_range(burden[d], "burden", 0.0, 1.0);
    if (jitter_prob[d] < 0.0 || jitter_prob[d] > 1.0) {
      throw InvalidArgument("GenConfig.jitter_prob: outside [0, 1]");
    }
    if (jitter_max_px[d] < 0) throw InvalidArgument("GenConfig.jitter_max_px: negative");
  }
  check_range(inner_radius, "inner_radius", 1.0, kImageSize / 2.0);
  check_range(wall_thickness, "wall_thickness", 2.0, kImageSize / 2.0);
  if (center_jitter < 0.0) throw InvalidArgument("GenConfig.center_jitter: negative");
  if (inner_radius.hi + wall_thickness.hi + center_jitter >= kImageSize / 2.0) {
    throw InvalidArgument("GenConfig: myocardium does not fit in the frame");
  }
  if (noise_sd < 0.0) throw InvalidArgument("GenConfig.noise_sd: negative");
  if (zero_scar_prob < 0.0 || zero_scar_prob > 1.0 || speckle_prob < 0.0 ||
      speckle_prob > 1.0) {
    throw InvalidArgument("GenConfig: probability outside [0, 1]");
  }
  if (max_attempts < 1) throw InvalidArgument("GenConfig.max_attempts: must be >= 1");
}

GeneratedSample generate_sample_detailed(const GenConfig& config, int difficulty,
                                         PrngStream& rng, std::int64_t id) {
  if (difficulty < 0 || difficulty >= kDifficultyLevels) {
    throw InvalidArgument("generate_sample: difficulty must be 0, 1 or 2");
  }
  const int n = kImageSize;
  const int d = difficulty;

  Geometry g;
  const double mid = n / 2.0;
  const double jitter = config.center_jitter;
  g.cx = mid + (jitter > 0.0 ? rng.uniform(-jitter, jitter) : 0.0);
  g.cy = mid + (jitter > 0.0 ? rng.uniform(-jitter, jitter) : 0.0);
  g.r_in = rng.uniform(config.inner_radius.lo, config.inner_radius.hi);
  g.r_out = g.r_in + rng.uniform(config.wall_thickness.lo, config.wall_thickness.hi);

  std::vector<std::uint8_t> myo(n * n, 0);
  std::vector<int> myo_pixels;
  for (int y = 0; y < n; ++y) {
    for (int x = 0; x < n; ++x) {
      const double r = std::hypot(x - g.cx, y - g.cy);
      if (r >= g.r_in && r < g.r_out) {
        myo[y * n + x] = 1;
        myo_pixels.push_back(y * n + x);
      }
    }
  }
  const int myo_count = static_cast<int>(myo_pixels.size());

  GeneratedSample out;
  out.contrast_gap = rng.uniform(config.contrast_gap[d].lo, config.contrast_gap[d].hi);

  const Range target = config.burden[d];
  // Pixel counts whose burden lies in [lo, hi).
  const int k_min = static_cast<int>(std::ceil(target.lo * myo_count - 1e-9));
  const int k_max = std::max(k_min, static_cast<int>(std::ceil(target.hi * myo_count - 1e-9)) - 1);
  auto in_range = [&](int count) { return count >= k_min && count <= k_max; };

  std::vector<std::uint8_t> true_scar(n * n, 0);
  std::vector<std::uint8_t> label(n * n, 0);

  out.zero_scar = d == 2 && rng.bernoulli(config.zero_scar_prob);
  if (!out.zero_scar) {
    ScarBuilder builder(g, myo_pixels, n, rng);
    bool accepted = false;
    for (int attempt = 0; attempt < config.max_attempts && !accepted; ++attempt) {
      std::fill(true_scar.begin(), true_scar.end(), 0);
      const double b = rng.uniform(target.lo, target.hi);
      const int k = std::clamp(static_cast<int>(std::lround(b * myo_count)), k_min, k_max);
      int count = 0;
      if (d == 0) {
        grow_connected(true_scar, builder.sector_order(), myo, n, k, count);
      } else if (d == 1) {
        const int blobs = rng.uniform_int(1, 2);
        const int first = blobs == 1 ? k : static_cast<int>(std::lround(k * rng.uniform(0.4, 0.6)));
        grow(true_scar, builder.blob_order(), first, count);
        if (blobs == 2) grow(true_scar, builder.blob_order(), k, count);
      } else if (rng.bernoulli(config.speckle_prob)) {
        grow(true_scar, builder.speckle_order(), k, count);
      } else {
        grow(true_scar, builder.blob_order(), k, count);
      }

      label = true_scar;
      bool jittered = false;
      if (config.jitter_max_px[d] > 0 && rng.bernoulli(config.jitter_prob[d])) {
        const bool dilate = rng.bernoulli(0.5);
        const int px = rng.uniform_int(1, config.jitter_max_px[d]);
        for (int i = 0; i < px; ++i) label = morph(label, myo, n, dilate);
        jittered = true;
      }
      const int labelled = static_cast<int>(std::count(label.begin(), label.end(), 1));
      if (in_range(labelled)) {
        accepted = true;
        out.label_jittered = jittered;
      } else if (attempt + 1 == config.max_attempts) {
        label = true_scar;  // the unjittered region is in range by construction
        accepted = true;
      }
    }
  }

  Sample& s = out.sample;
  s.id = id;
  s.difficulty = d;
  s.image = Grid(1, n, n);
  s.scar = Grid(1, n, n);
  s.myo = Grid(1, n, n);
  const double gap = out.contrast_gap;
  for (int p = 0; p < n * n; ++p) {
    double base = config.background_mean;
    if (myo[p]) base = true_scar[p] ? config.myo_mean + gap : config.myo_mean;
    const double v = std::clamp(base + config.noise_sd * rng.normal(), 0.0, 1.0);
    s.image[p] = static_cast<double>(static_cast<float>(v));
    s.scar[p] = label[p];
    s.myo[p] = myo[p];
  }
  return out;
}

Sample generate_sample(const GenConfig& config, int difficulty,
                       PrngStream& stream, std::int64_t id) {
  return generate_sample_detailed(config, difficulty, stream, id).sample;
}

Dataset generate_dataset(const GenConfig& config) {
  config.validate();
  if (config.total() <= 0) throw InvalidArgument("generate_dataset: empty dataset");
  Dataset ds;
  ds.samples.reserve(config.total());
  std::int64_t id = 0;
  for (int d = 0; d < kDifficultyLevels; ++d) {
    for (int i = 0; i < config.counts[d]; ++i, ++id) {
      PrngStream stream(config.seed, static_cast<std::uint64_t>(id));
      ds.samples.push_back(generate_sample(config, d, stream, id));
    }
  }
  return ds;
}

double burden_of(const Sample& s) {
  double scar = 0.0;
  double myo = 0.0;
  for (std::size_t i = 0; i < s.myo.size(); ++i) {
    if (s.myo[i] > 0.0) {
      myo += 1.0;
      scar += s.scar[i] > 0.0 ? 1.0 : 0.0;
    }
  }
  if (myo == 0.0) throw InvalidArgument("burden_of: empty myocardium");
  return scar / myo;
}

SplitResult split_dataset(const Dataset& ds, double train_fraction,
                          PrngStream& stream) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw InvalidArgument("split_dataset: train fraction must lie in (0, 1)");
  }
  SplitResult result;
  std::array<std::vector<std::size_t>, kDifficultyLevels> classes;
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    const int d = ds.samples[i].difficulty;
    if (d < 0 || d >= kDifficultyLevels) {
      throw InvalidArgument("split_dataset: sample with difficulty outside {0,1,2}");
    }
    classes[d].push_back(i);
  }

  std::array<std::size_t, kDifficultyLevels> quota{};
  std::size_t eligible = 0;
  for (int d = 0; d < kDifficultyLevels; ++d) {
    if (classes[d].empty()) continue;
    if (classes[d].size() < 2) {
      result.warnings.push_back("difficulty " + std::to_string(d) + " has " +
                                std::to_string(classes[d].size()) +
                                " sample(s); assigning the whole class to train");
      quota[d] = classes[d].size();
    } else {
      eligible += classes[d].size();
    }
  }
  // Largest-remainder apportionment of round(fraction * eligible).
  const auto total = static_cast<std::size_t>(std::llround(train_fraction * eligible));
  std::size_t assigned = 0;
  std::array<double, kDifficultyLevels> remainder{};
  for (int d = 0; d < kDifficultyLevels; ++d) {
    if (classes[d].size() < 2) {
      remainder[d] = -1.0;
      continue;
    }
    const double exact = train_fraction * classes[d].size();
    quota[d] = static_cast<std::size_t>(std::floor(exact + 1e-9));
    remainder[d] = exact - quota[d];
    assigned += quota[d];
  }
  while (assigned < total) {
    int best = -1;
    for (int d = 0; d < kDifficultyLevels; ++d) {
      if (remainder[d] < 0.0 || quota[d] >= classes[d].size()) continue;
      if (best < 0 || remainder[d] > remainder[best] + 1e-12) best = d;
    }
    if (best < 0) break;
    ++quota[best];
    remainder[best] = -0.5;  // at most one extra seat per class
    ++assigned;
  }

  std::vector<std::uint8_t> to_train(ds.samples.size(), 0);
  for (int d = 0; d < kDifficultyLevels; ++d) {
    auto members = classes[d];
    // Fisher-Yates, then the first `quota` members train.
    for (std::size_t i = members.size(); i > 1; --i) {
      std::swap(members[i - 1], members[stream.below(i)]);
    }
    for (std::size_t i = 0; i < quota[d]; ++i) to_train[members[i]] = 1;
  }
  for (std::size_t i = 0; i < ds.samples.size(); ++i) {
    (to_train[i] ? result.train : result.test).samples.push_back(ds.samples[i]);
  }
  result.train.manifest = ds.manifest;
  result.test.manifest = ds.manifest;
  return result;
}

}  // namespace lge::phantom
