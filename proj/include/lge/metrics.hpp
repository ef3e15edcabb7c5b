#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "lge/grid.hpp"
#include "lge/phantom.hpp"
#include "lge/segnet.hpp"

namespace lge::metrics {

inline constexpr double kDefaultThreshold = 0.5;

/// 2|A∩B| / (|A|+|B|) over binary grids; 1 when both are empty.
double dice_coeff(const Grid& truth, const Grid& pred);

/// Scar pixels inside the myocardium over myocardial pixels. Throws
/// InvalidArgument on an empty myocardium.
double scar_burden(const Grid& mask, const Grid& myo);

/// Binary mask of prob >= threshold restricted to the myocardium.
Grid binarize(const Grid& prob, const Grid& myo, double threshold = kDefaultThreshold);

/// Product-moment correlation. Throws UndefinedStatistic on constant input.
double pearson_r(std::span<const double> x, std::span<const double> y);

struct BlandAltman {
  double mean_diff = 0.0;
  double loa_low = 0.0;
  double loa_high = 0.0;
  double sd = 0.0;
};

/// Differences gt - pred; limits mean ± 1.96 sample SD.
BlandAltman bland_altman(std::span<const double> gt, std::span<const double> pred);

enum class WilcoxonMethod { kAuto, kExact, kNormal };

struct WilcoxonResult {
  int n_effective = 0;
  double statistic = 0.0;  // min(W+, W-)
  double p_value = 1.0;    // two-sided
  WilcoxonMethod method = WilcoxonMethod::kExact;
};

inline constexpr int kExactWilcoxonLimit = 20;

/// Paired signed-rank test on a - b. Zero differences are dropped, ties get
/// average ranks. Exact null distribution for n_eff <= 20 (kAuto), otherwise
/// a normal approximation with continuity and tie-variance corrections.
/// Throws DegenerateInput when every difference is zero.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b,
                                    WilcoxonMethod method = WilcoxonMethod::kAuto);

const char* method_name(WilcoxonMethod m);

struct EvalRow {
  std::int64_t id = 0;
  double dice = 0.0;
  double gt_burden = 0.0;
  double pred_burden = 0.0;
};

struct Aggregates {
  double median_dice = 0.0;
  double mean_dice = 0.0;
  std::optional<double> pearson_r;     // undefined for constant burdens
  std::optional<BlandAltman> bland_altman;  // needs >= 2 rows
};

struct EvalReport {
  std::vector<EvalRow> rows;
  Aggregates aggregates;
};

/// Aggregates recomputed from rows alone.
Aggregates compute_aggregates(std::span<const EvalRow> rows);

EvalRow evaluate_sample(const segnet::ModelParams& params, const phantom::Sample& s,
                        double threshold = kDefaultThreshold);

EvalReport evaluate(const segnet::ModelParams& params, const phantom::Dataset& ds,
                    double threshold = kDefaultThreshold);

/// Header `id,dice,gt_burden,pred_burden`, one row per sample, then
/// `#agg,<name>,<value>` lines (empty value when undefined).
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
std::string format_report_csv(const EvalReport& report);
/// Parses rows and aggregate lines. Throws FormatError naming the line.
EvalReport read_report_csv(const std::filesystem::path& path);

}  // namespace lge::metrics
