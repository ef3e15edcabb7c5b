#include "lge/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lge/errors.hpp"

namespace lge::loss {
namespace {

std::size_t check_inputs(const Grid& target, const Grid& prob, const Grid& myo,
                         const char* who) {
  require_same_shape(target, prob, who);
  require_same_shape(target, myo, who);
  std::size_t n = 0;
  for (double m : myo.values) n += m > 0.0 ? 1 : 0;
  if (n == 0) throw InvalidArgument(std::string(who) + ": empty myocardium");
  return n;
}

// Pow with the convention 0^0 = 1 and derivative factor gamma * x^(gamma-1)
// that vanishes when gamma == 0.
double dpow(double x, double gamma) {
  if (gamma == 0.0) return 0.0;
  if (gamma == 1.0) return 1.0;
  return gamma * std::pow(x, gamma - 1.0);
}

}  // namespace

void LossConfig::validate() const {
  if (w_fg < 0.0 || w_bg < 0.0) throw InvalidArgument("loss: w_fg and w_bg must be >= 0");
  if (std::abs(w_fg + w_bg - 1.0) > 1e-9) {
    throw InvalidArgument("loss: w_fg + w_bg must equal 1");
  }
  if (!(epsilon > 0.0)) throw InvalidArgument("loss: epsilon must be > 0");
  if (alpha < 0.0 || alpha > 1.0) throw InvalidArgument("loss: alpha must lie in [0, 1]");
  if (gamma < 0.0) throw InvalidArgument("loss: gamma must be >= 0");
  if (beta < 0.0) throw InvalidArgument("loss: beta must be >= 0");
}

DiceTerms soft_dice_terms(const Grid& target, const Grid& prob, const Grid& myo,
                          double epsilon) {
  double inter = 0.0, sy = 0.0, sp = 0.0;
  double inter_b = 0.0, sy_b = 0.0, sp_b = 0.0;
  for (std::size_t i = 0; i < myo.size(); ++i) {
    if (!(myo[i] > 0.0)) continue;
    const double y = target[i];
    const double p = prob[i];
    inter += y * p;
    sy += y;
    sp += p;
    inter_b += (1.0 - y) * (1.0 - p);
    sy_b += 1.0 - y;
    sp_b += 1.0 - p;
  }
  return {(2.0 * inter + epsilon) / (sy + sp + epsilon),
          (2.0 * inter_b + epsilon) / (sy_b + sp_b + epsilon)};
}

LossValue wdice_loss(const Grid& target, const Grid& prob, const Grid& myo,
                     const LossConfig& cfg) {
  check_inputs(target, prob, myo, "wdice_loss");
  const double eps = cfg.epsilon;
  double inter = 0.0, sy = 0.0, sp = 0.0;
  double inter_b = 0.0, sy_b = 0.0, sp_b = 0.0;
  for (std::size_t i = 0; i < myo.size(); ++i) {
    if (!(myo[i] > 0.0)) continue;
    const double y = target[i];
    const double p = prob[i];
    inter += y * p;
    sy += y;
    sp += p;
    inter_b += (1.0 - y) * (1.0 - p);
    sy_b += 1.0 - y;
    sp_b += 1.0 - p;
  }
  const double num_f = 2.0 * inter + eps;
  const double den_f = sy + sp + eps;
  const double num_b = 2.0 * inter_b + eps;
  const double den_b = sy_b + sp_b + eps;

  LossValue out;
  out.value = 1.0 - (cfg.w_fg * num_f / den_f + cfg.w_bg * num_b / den_b);
  out.grad = Grid(prob.channels, prob.height, prob.width);
  // Quotient rule: d(N/D)/dp_i = (dN * D - N * dD) / D^2, with dD/dp_i = 1 for
  // the foreground ratio and -1 for the background ratio.
  const double df2 = den_f * den_f;
  const double db2 = den_b * den_b;
  for (std::size_t i = 0; i < myo.size(); ++i) {
    if (!(myo[i] > 0.0)) continue;
    const double y = target[i];
    const double d_fg = (2.0 * y * den_f - num_f) / df2;
    const double d_bg = -(2.0 * (1.0 - y) * den_b - num_b) / db2;
    out.grad[i] = -(cfg.w_fg * d_fg + cfg.w_bg * d_bg);
  }
  return out;
}

LossValue focal_loss(const Grid& target, const Grid& prob, const Grid& myo,
                     const LossConfig& cfg) {
  const std::size_t n = check_inputs(target, prob, myo, "focal_loss");
  const double a = cfg.alpha;
  const double g = cfg.gamma;
  const double inv_n = 1.0 / static_cast<double>(n);

  LossValue out;
  out.grad = Grid(prob.channels, prob.height, prob.width);
  double sum = 0.0;
  for (std::size_t i = 0; i < myo.size(); ++i) {
    if (!(myo[i] > 0.0)) continue;
    const double y = target[i];
    const double raw = prob[i];
    const double p = std::clamp(raw, kProbClamp, 1.0 - kProbClamp);
    const double q = 1.0 - p;
    const double log_p = std::log(p);
    const double log_q = std::log(q);
    const double pos = y > 0.0 ? -a * y * std::pow(q, g) * log_p : 0.0;
    const double neg = y < 1.0 ? -(1.0 - a) * (1.0 - y) * std::pow(p, g) * log_q : 0.0;
    sum += pos + neg;

    // Outside the clamp band the loss is flat in the raw probability.
    if (raw < kProbClamp || raw > 1.0 - kProbClamp) continue;
    double d = 0.0;
    if (y > 0.0) d += -a * y * (-dpow(q, g) * log_p + std::pow(q, g) / p);
    if (y < 1.0) d += -(1.0 - a) * (1.0 - y) * (dpow(p, g) * log_q - std::pow(p, g) / q);
    out.grad[i] = d * inv_n;
  }
  out.value = sum * inv_n;
  return out;
}

HybridValue hybrid_loss(const Grid& target, const Grid& prob, const Grid& myo,
                        const LossConfig& cfg) {
  LossValue dice = wdice_loss(target, prob, myo, cfg);
  LossValue focal = focal_loss(target, prob, myo, cfg);
  const DiceTerms terms = soft_dice_terms(target, prob, myo, cfg.epsilon);

  HybridValue out;
  out.breakdown.wdice = dice.value;
  out.breakdown.focal = focal.value;
  out.breakdown.total = dice.value + cfg.beta * focal.value;
  out.breakdown.dice_fg = terms.fg;
  out.breakdown.dice_bg = terms.bg;
  out.grad = std::move(dice.grad);
  for (std::size_t i = 0; i < out.grad.size(); ++i) out.grad[i] += cfg.beta * focal.grad[i];
  return out;
}

}  // namespace lge::loss
