#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "lge/errors.hpp"

namespace lge {

/// Dense channels x height x width value grid, row-major within a channel.
struct Grid {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<double> values;

  Grid() = default;
  Grid(int c, int h, int w, double fill = 0.0)
      : channels(c), height(h), width(w),
        values(static_cast<std::size_t>(c) * h * w, fill) {
    if (c < 0 || h < 0 || w < 0) throw InvalidArgument("Grid: negative extent");
  }

  [[nodiscard]] std::size_t size() const { return values.size(); }
  [[nodiscard]] std::size_t plane() const {
    return static_cast<std::size_t>(height) * width;
  }

  double& operator()(int c, int y, int x) {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double operator()(int c, int y, int x) const {
    return values[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }

  std::span<double> channel(int c) {
    return {values.data() + c * plane(), plane()};
  }
  std::span<const double> channel(int c) const {
    return {values.data() + c * plane(), plane()};
  }

  [[nodiscard]] bool same_shape(const Grid& o) const {
    return channels == o.channels && height == o.height && width == o.width;
  }
  [[nodiscard]] std::string shape_string() const {
    return std::to_string(channels) + "x" + std::to_string(height) + "x" +
           std::to_string(width);
  }

  void fill(double v) { std::fill(values.begin(), values.end(), v); }

  bool operator==(const Grid&) const = default;
};

/// True when every value is finite.
bool all_finite(const Grid& g);

inline void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_shape(b)) {
    throw InvalidArgument(std::string(what) + ": shape mismatch " +
                          a.shape_string() + " vs " + b.shape_string());
  }
}

}  // namespace lge
