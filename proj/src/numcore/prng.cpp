#include "lge/prng.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "lge/errors.hpp"
#include "lge/grid.hpp"

namespace lge {
namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

bool all_finite(const Grid& g) {
  for (double v : g.values) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

PrngStream::PrngStream(std::uint64_t seed, std::uint64_t stream_id)
    : state_(mix64(seed + kGolden) ^ mix64(stream_id * 0xD1B54A32D192ED03ULL + 1)),
      stream_(stream_id),
      // Odd increment per stream keeps the Weyl sequence full-period.
      increment_(kGolden ^ (mix64(stream_id) << 1)) {
  increment_ |= 1ULL;
}

std::uint64_t PrngStream::next_u64() {
  state_ += increment_;
  return mix64(state_);
}

double PrngStream::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double PrngStream::uniform(double lo, double hi) {
  if (!(lo < hi)) {
    throw InvalidArgument("prng uniform: require lo < hi, got [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + ")");
  }
  double v = lo + (hi - lo) * next_double();
  // Rounding can land exactly on hi for wide intervals.
  return v < hi ? v : std::nextafter(hi, lo);
}

std::uint64_t PrngStream::below(std::uint64_t n) {
  if (n == 0) throw InvalidArgument("prng below: n must be positive");
  // Lemire's multiply-shift with rejection.
  for (;;) {
    const unsigned __int128 prod =
        static_cast<unsigned __int128>(next_u64()) * n;
    const auto low = static_cast<std::uint64_t>(prod);
    if (low >= n || low >= (-n) % n) {
      return static_cast<std::uint64_t>(prod >> 64);
    }
  }
}

int PrngStream::uniform_int(int lo, int hi) {
  if (hi < lo) throw InvalidArgument("prng uniform_int: hi < lo");
  return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double PrngStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_normal_;
  }
  double u1 = next_double();
  while (u1 <= 0.0) u1 = next_double();
  const double u2 = next_double();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * std::numbers::pi * u2;
  spare_normal_ = r * std::sin(a);
  has_spare_ = true;
  return r * std::cos(a);
}

double prng_uniform(PrngStream& stream, double lo, double hi) {
  return stream.uniform(lo, hi);
}

}  // namespace lge
