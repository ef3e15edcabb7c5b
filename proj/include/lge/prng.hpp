#pragma once

#include <cstdint>

namespace lge {

/// Counter-based splitmix64 stream. Streams with equal (seed, stream id)
/// produce equal sequences; distinct stream ids give statistically independent
/// sequences for the same seed. Not thread-safe: one stream per task.
class PrngStream {
 public:
  PrngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double next_double();
  /// Uniform in [lo, hi). Throws InvalidArgument unless lo < hi.
  double uniform(double lo, double hi);
  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi);
  /// Standard normal via Box-Muller (caches the second variate).
  double normal();
  bool bernoulli(double p) { return next_double() < p; }

  [[nodiscard]] std::uint64_t state() const { return state_; }
  [[nodiscard]] std::uint64_t stream_id() const { return stream_; }

 private:
  std::uint64_t state_;
  std::uint64_t stream_;
  std::uint64_t increment_;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

/// Free-function form of PrngStream::uniform.
double prng_uniform(PrngStream& stream, double lo, double hi);

/// Stream ids reserved for each purpose, so independent consumers never share
/// a sequence for one seed.
namespace streams {
inline constexpr std::uint64_t kInit = 0x1000;
inline constexpr std::uint64_t kSplit = 0x2000;
inline constexpr std::uint64_t kShuffleBase = 0x100000;  // + stage*65536 + epoch
}  // namespace streams

}  // namespace lge
