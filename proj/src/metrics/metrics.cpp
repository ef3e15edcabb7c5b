#include <algorithm>
#include <cmath>

#include "lge/errors.hpp"
#include "lge/metrics.hpp"
#include "lge/stats.hpp"

namespace lge::metrics {

double dice_coeff(const Grid& truth, const Grid& pred) {
  require_same_shape(truth, pred, "dice_coeff");
  double inter = 0.0, st = 0.0, sp = 0.0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool t = truth[i] > 0.0;
    const bool p = pred[i] > 0.0;
    inter += (t && p) ? 1.0 : 0.0;
    st += t ? 1.0 : 0.0;
    sp += p ? 1.0 : 0.0;
  }
  if (st + sp == 0.0) return 1.0;
  return 2.0 * inter / (st + sp);
}

double scar_burden(const Grid& mask, const Grid& myo) {
  require_same_shape(mask, myo, "scar_burden");
  double scar = 0.0, total = 0.0;
  for (std::size_t i = 0; i < myo.size(); ++i) {
    if (!(myo[i] > 0.0)) continue;
    total += 1.0;
    scar += mask[i] > 0.0 ? 1.0 : 0.0;
  }
  if (total == 0.0) throw InvalidArgument("scar_burden: empty myocardium");
  return scar / total;
}

Grid binarize(const Grid& prob, const Grid& myo, double threshold) {
  require_same_shape(prob, myo, "binarize");
  Grid out(prob.channels, prob.height, prob.width);
  for (std::size_t i = 0; i < prob.size(); ++i) {
    out[i] = (myo[i] > 0.0 && prob[i] >= threshold) ? 1.0 : 0.0;
  }
  return out;
}

double pearson_r(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("pearson_r: length mismatch");
  if (x.size() < 2) throw InvalidArgument("pearson_r: need at least 2 pairs");
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw UndefinedStatistic("pearson_r: constant input has no correlation");
  }
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

BlandAltman bland_altman(std::span<const double> gt, std::span<const double> pred) {
  if (gt.size() != pred.size()) throw InvalidArgument("bland_altman: length mismatch");
  if (gt.size() < 2) throw InvalidArgument("bland_altman: need at least 2 pairs");
  std::vector<double> diff(gt.size());
  for (std::size_t i = 0; i < gt.size(); ++i) diff[i] = gt[i] - pred[i];
  BlandAltman ba;
  ba.mean_diff = mean(diff);
  ba.sd = sample_sd(diff);
  ba.loa_low = ba.mean_diff - 1.96 * ba.sd;
  ba.loa_high = ba.mean_diff + 1.96 * ba.sd;
  return ba;
}

EvalRow evaluate_sample(const segnet::ModelParams& params, const phantom::Sample& s,
                        double threshold) {
  const Grid prob = segnet::predict(params, s.image, s.myo);
  const Grid pred = binarize(prob, s.myo, threshold);
  EvalRow row;
  row.id = s.id;
  row.dice = dice_coeff(s.scar, pred);
  row.gt_burden = scar_burden(s.scar, s.myo);
  row.pred_burden = scar_burden(pred, s.myo);
  return row;
}

EvalReport evaluate(const segnet::ModelParams& params, const phantom::Dataset& ds,
                    double threshold) {
  EvalReport report;
  report.rows.reserve(ds.size());
  for (const auto& s : ds.samples) report.rows.push_back(evaluate_sample(params, s, threshold));
  report.aggregates = compute_aggregates(report.rows);
  return report;
}

Aggregates compute_aggregates(std::span<const EvalRow> rows) {
  if (rows.empty()) throw InvalidArgument("compute_aggregates: no rows");
  std::vector<double> dice, gt, pred;
  for (const auto& r : rows) {
    dice.push_back(r.dice);
    gt.push_back(r.gt_burden);
    pred.push_back(r.pred_burden);
  }
  Aggregates a;
  a.median_dice = median(dice);
  a.mean_dice = mean(dice);
  if (rows.size() >= 2) {
    a.bland_altman = bland_altman(gt, pred);
    try {
      a.pearson_r = pearson_r(gt, pred);
    } catch (const UndefinedStatistic&) {
      a.pearson_r.reset();
    }
  }
  return a;
}

}  // namespace lge::metrics
