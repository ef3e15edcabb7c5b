#include "lge/svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace lge::cli {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

class Canvas {
 public:
  Canvas(const PlotFrame& f, double x_min, double x_max, double y_min, double y_max)
      : f_(f), x_min_(x_min), x_max_(x_max), y_min_(y_min), y_max_(y_max) {}

  [[nodiscard]] double px(double x) const {
    return f_.left + (x - x_min_) / (x_max_ - x_min_) * f_.inner_width();
  }
  [[nodiscard]] double py(double y) const {
    return f_.top + (y_max_ - y) / (y_max_ - y_min_) * f_.inner_height();
  }

  void open(const std::string& title) {
    out_ << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(f_.width)
         << "\" height=\"" << num(f_.height) << "\" viewBox=\"0 0 " << num(f_.width) << ' '
         << num(f_.height) << "\" data-x-min=\"" << x_min_ << "\" data-x-max=\"" << x_max_
         << "\" data-y-min=\"" << y_min_ << "\" data-y-max=\"" << y_max_ << "\">\n";
    out_ << "<title>" << title << "</title>\n";
    out_ << "<rect x=\"0\" y=\"0\" width=\"" << num(f_.width) << "\" height=\""
         << num(f_.height) << "\" fill=\"white\"/>\n";
    out_ << "<rect class=\"plot-area\" x=\"" << num(f_.left) << "\" y=\"" << num(f_.top)
         << "\" width=\"" << num(f_.inner_width()) << "\" height=\"" << num(f_.inner_height())
         << "\" fill=\"none\" stroke=\"black\"/>\n";
    text(f_.width / 2, 24, title, "middle", "title");
  }

  void axes(const std::string& x_label, const std::string& y_label, int ticks) {
    for (int i = 0; i <= ticks; ++i) {
      const double xv = x_min_ + (x_max_ - x_min_) * i / ticks;
      const double yv = y_min_ + (y_max_ - y_min_) * i / ticks;
      const double bx = f_.top + f_.inner_height();
      out_ << "<line class=\"tick\" x1=\"" << num(px(xv)) << "\" y1=\"" << num(bx) << "\" x2=\""
           << num(px(xv)) << "\" y2=\"" << num(bx + 5) << "\" stroke=\"black\"/>\n";
      text(px(xv), bx + 18, num(xv).substr(0, num(xv).size() - 1), "middle", "tick-label");
      out_ << "<line class=\"tick\" x1=\"" << num(f_.left - 5) << "\" y1=\"" << num(py(yv))
           << "\" x2=\"" << num(f_.left) << "\" y2=\"" << num(py(yv)) << "\" stroke=\"black\"/>\n";
      text(f_.left - 8, py(yv) + 4, num(yv).substr(0, num(yv).size() - 1), "end", "tick-label");
    }
    text(f_.left + f_.inner_width() / 2, f_.height - 16, x_label, "middle", "x-label");
    out_ << "<text class=\"y-label\" text-anchor=\"middle\" font-size=\"12\" transform=\"translate(16,"
         << num(f_.top + f_.inner_height() / 2) << ") rotate(-90)\">" << y_label << "</text>\n";
  }

  void line(double x1, double y1, double x2, double y2, const std::string& cls,
            const std::string& style, double value) {
    out_ << "<line class=\"" << cls << "\" data-value=\"" << value << "\" x1=\"" << num(px(x1))
         << "\" y1=\"" << num(py(y1)) << "\" x2=\"" << num(px(x2)) << "\" y2=\"" << num(py(y2))
         << "\" " << style << "/>\n";
  }

  void point(double x, double y, std::int64_t id) {
    out_ << "<circle class=\"point\" data-id=\"" << id << "\" cx=\"" << num(px(x)) << "\" cy=\""
         << num(py(y)) << "\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n";
  }

  void text(double x, double y, const std::string& s, const char* anchor, const char* cls) {
    out_ << "<text class=\"" << cls << "\" x=\"" << num(x) << "\" y=\"" << num(y)
         << "\" text-anchor=\"" << anchor << "\" font-size=\"12\">" << s << "</text>\n";
  }

  std::string close() {
    out_ << "</svg>\n";
    return out_.str();
  }

 private:
  PlotFrame f_;
  double x_min_, x_max_, y_min_, y_max_;
  std::ostringstream out_;
};

}  // namespace

std::string scatter_svg(const metrics::EvalReport& report, const PlotFrame& frame) {
  Canvas c(frame, 0.0, 1.0, 0.0, 1.0);
  c.open("Scar burden: predicted vs ground truth");
  c.axes("Ground-truth scar burden (fraction of myocardium)",
         "Predicted scar burden (fraction of myocardium)", 5);
  c.line(0.0, 0.0, 1.0, 1.0, "identity", "stroke=\"gray\" stroke-dasharray=\"4,3\"", 1.0);
  for (const auto& r : report.rows) c.point(r.gt_burden, r.pred_burden, r.id);
  const auto& r = report.aggregates.pearson_r;
  char label[64];
  if (r) {
    std::snprintf(label, sizeof(label), "Pearson r = %.3f (n = %zu)", *r, report.rows.size());
  } else {
    std::snprintf(label, sizeof(label), "Pearson r undefined (n = %zu)", report.rows.size());
  }
  c.text(frame.left + 8, frame.top + 16, label, "start", "annotation");
  return c.close();
}

std::string bland_altman_svg(const metrics::EvalReport& report, const PlotFrame& frame) {
  const auto& ba = report.aggregates.bland_altman;
  double extent = 0.05;
  for (const auto& r : report.rows) extent = std::max(extent, std::abs(r.gt_burden - r.pred_burden));
  if (ba) extent = std::max({extent, std::abs(ba->loa_low), std::abs(ba->loa_high)});
  extent = std::min(1.0, std::ceil(extent * 1.1 * 20.0) / 20.0);

  Canvas c(frame, 0.0, 1.0, -extent, extent);
  c.open("Bland-Altman: scar burden agreement");
  c.axes("Mean of ground-truth and predicted burden (fraction of myocardium)",
         "Ground truth - predicted burden (fraction of myocardium)", 4);
  c.line(0.0, 0.0, 1.0, 0.0, "zero", "stroke=\"gray\"", 0.0);
  if (ba) {
    c.line(0.0, ba->mean_diff, 1.0, ba->mean_diff, "mean-diff", "stroke=\"firebrick\"",
           ba->mean_diff);
    c.line(0.0, ba->loa_low, 1.0, ba->loa_low, "loa",
           "stroke=\"firebrick\" stroke-dasharray=\"5,4\"", ba->loa_low);
    c.line(0.0, ba->loa_high, 1.0, ba->loa_high, "loa",
           "stroke=\"firebrick\" stroke-dasharray=\"5,4\"", ba->loa_high);
    char label[96];
    std::snprintf(label, sizeof(label), "mean diff %.4f, limits [%.4f, %.4f]", ba->mean_diff,
                  ba->loa_low, ba->loa_high);
    c.text(frame.left + 8, frame.top + 16, label, "start", "annotation");
  }
  for (const auto& r : report.rows) {
    c.point(0.5 * (r.gt_burden + r.pred_burden), r.gt_burden - r.pred_burden, r.id);
  }
  return c.close();
}

}  // namespace lge::cli
