#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "lge/grid.hpp"
#include "lge/prng.hpp"

namespace lge::phantom {

inline constexpr int kImageSize = 64;
inline constexpr int kDifficultyLevels = 3;

/// One 2D slice. `image` holds values exactly representable in single
/// precision so the on-disk format round-trips bit-exactly.
struct Sample {
  std::int64_t id = 0;
  int difficulty = 0;
  Grid image;  // 1 x H x W, values in [0, 1]
  Grid scar;   // 1 x H x W, 0/1, scar <= myo
  Grid myo;    // 1 x H x W, 0/1

  bool operator==(const Sample&) const = default;
};

struct Dataset {
  std::vector<Sample> samples;
  std::filesystem::path manifest;

  [[nodiscard]] std::size_t size() const { return samples.size(); }
  [[nodiscard]] bool empty() const { return samples.empty(); }
};

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

/// Generator parameters. The defaults reproduce the easy/medium/hard recipe:
/// high-contrast compact sectors, mid-contrast blobs with light label jitter,
/// and low-contrast small or speckled scar with heavier jitter and some
/// scar-free slices.
struct GenConfig {
  std::array<int, kDifficultyLevels> counts{100, 100, 100};
  std::uint64_t seed = 1;

  Range inner_radius{8.0, 12.0};
  Range wall_thickness{4.0, 7.0};
  double center_jitter = 4.0;

  double background_mean = 0.20;
  double myo_mean = 0.35;
  double noise_sd = 0.05;

  std::array<Range, kDifficultyLevels> contrast_gap{
      Range{0.35, 0.50}, Range{0.20, 0.35}, Range{0.08, 0.20}};
  std::array<Range, kDifficultyLevels> burden{
      Range{0.15, 0.35}, Range{0.08, 0.15}, Range{0.01, 0.08}};

  std::array<double, kDifficultyLevels> jitter_prob{0.0, 0.3, 0.5};
  std::array<int, kDifficultyLevels> jitter_max_px{0, 1, 2};
  double zero_scar_prob = 0.15;  // hardest class only
  double speckle_prob = 0.5;     // hardest class, given non-zero scar
  int max_attempts = 200;

  /// Throws InvalidArgument naming the offending field.
  void validate() const;
  [[nodiscard]] int total() const { return counts[0] + counts[1] + counts[2]; }
};

/// Scar-free sample diagnostics alongside the generated slice.
struct GeneratedSample {
  Sample sample;
  double contrast_gap = 0.0;
  bool zero_scar = false;
  bool label_jittered = false;
};

GeneratedSample generate_sample_detailed(const GenConfig& config, int difficulty,
                                         PrngStream& stream,
                                         std::int64_t id = 0);

Sample generate_sample(const GenConfig& config, int difficulty,
                       PrngStream& stream, std::int64_t id = 0);

/// Ids run 0..N-1 grouped by difficulty; sample i draws from stream (seed, i).
Dataset generate_dataset(const GenConfig& config);

/// Fraction of myocardial pixels that are scar. Throws on an empty myocardium.
double burden_of(const Sample& s);

struct SplitResult {
  Dataset train;
  Dataset test;
  std::vector<std::string> warnings;
};

/// Stratified split. The train total is round(fraction * N_eligible), shared
/// across classes by largest remainder (ties to the lower difficulty); a
/// class with fewer than two samples goes entirely to train with a warning.
/// Both halves keep the input order.
SplitResult split_dataset(const Dataset& ds, double train_fraction,
                          PrngStream& stream);

// On-disk formats.

void write_sample(const Sample& s, const std::filesystem::path& path);
Sample read_sample(const std::filesystem::path& path, std::int64_t id = 0);

/// Serialized bytes of a sample file.
std::vector<std::uint8_t> encode_sample(const Sample& s);
Sample decode_sample(std::span<const std::uint8_t> bytes, std::int64_t id = 0,
                     const std::string& origin = "<memory>");

/// Writes sample files plus `manifest.txt` into `dir` (created if needed).
void write_dataset(const Dataset& ds, const std::filesystem::path& dir);
/// Reads `dir/manifest.txt`; sample ids are manifest line order, from 0.
Dataset read_dataset(const std::filesystem::path& dir);

inline constexpr const char* kManifestName = "manifest.txt";

}  // namespace lge::phantom
