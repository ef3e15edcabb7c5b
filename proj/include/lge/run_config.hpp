#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>

#include "lge/curriculum.hpp"
#include "lge/errors.hpp"

namespace lge::cli {

/// Flat `key=value` run configuration with `#` comments. Unknown or duplicate
/// keys and out-of-range values are rejected before any work starts.
struct RunConfig {
  curriculum::TrainConfig train;
  std::array<int, phantom::kDifficultyLevels> counts{100, 100, 100};
  double threshold = 0.5;
  double train_fraction = 0.8;
  bool baseline = false;

  /// Throws ConfigError naming the key and line.
  static RunConfig parse(std::string_view text, const std::string& origin = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  void validate() const;
  /// Canonical text with every key; parse(to_text()) reproduces *this.
  [[nodiscard]] std::string to_text() const;
};

class ConfigError : public InvalidArgument {
 public:
  ConfigError(const std::string& origin, int line, const std::string& key,
              const std::string& what);
  [[nodiscard]] const std::string& key() const { return key_; }
  [[nodiscard]] int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace lge::cli
