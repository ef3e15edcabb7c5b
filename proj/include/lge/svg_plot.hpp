#pragma once

#include <string>

#include "lge/metrics.hpp"

namespace lge::cli {

/// Plot-area geometry shared by both panels, in SVG user units.
struct PlotFrame {
  double width = 480.0;
  double height = 400.0;
  double left = 70.0;
  double right = 20.0;
  double top = 40.0;
  double bottom = 60.0;

  [[nodiscard]] double inner_width() const { return width - left - right; }
  [[nodiscard]] double inner_height() const { return height - top - bottom; }
};

/// Ground-truth vs predicted burden with the identity line and Pearson r.
std::string scatter_svg(const metrics::EvalReport& report, const PlotFrame& frame = {});

/// Mean of (gt, pred) against gt - pred with mean-difference and 1.96 SD lines.
/// The y axis spans [-y_extent, y_extent], recorded in the root element.
std::string bland_altman_svg(const metrics::EvalReport& report, const PlotFrame& frame = {});

}  // namespace lge::cli
