#pragma once

#include "lge/grid.hpp"

/// Hybrid segmentation objective restricted to myocardial pixels:
/// foreground-weighted soft Dice plus a focal term.
namespace lge::loss {

struct LossConfig {
  double w_fg = 0.6;
  double w_bg = 0.4;
  double epsilon = 1e-6;  // Dice stabilizer
  double alpha = 0.25;    // focal class balance
  double gamma = 2.0;     // focal exponent
  double beta = 0.5;      // focal weight in the hybrid sum

  /// Throws InvalidArgument naming the violated constraint.
  void validate() const;
};

/// Probabilities are clamped to this band before any logarithm.
inline constexpr double kProbClamp = 1e-7;

struct LossValue {
  double value = 0.0;
  Grid grad;  // dValue / dY_hat, zero outside the myocardium
};

struct LossBreakdown {
  double total = 0.0;
  double wdice = 0.0;
  double focal = 0.0;
  double dice_fg = 0.0;
  double dice_bg = 0.0;
};

struct HybridValue {
  LossBreakdown breakdown;
  Grid grad;
};

/// Soft Dice ratios over myocardial pixels, without gradients.
struct DiceTerms {
  double fg = 0.0;
  double bg = 0.0;
};
DiceTerms soft_dice_terms(const Grid& target, const Grid& prob, const Grid& myo,
                          double epsilon);

/// 1 - (w_fg * Dice_fg + w_bg * Dice_bg).
LossValue wdice_loss(const Grid& target, const Grid& prob, const Grid& myo,
                     const LossConfig& cfg);

/// Mean over myocardial pixels of
/// -a*y*(1-p)^g*log p - (1-a)*(1-y)*p^g*log(1-p).
LossValue focal_loss(const Grid& target, const Grid& prob, const Grid& myo,
                     const LossConfig& cfg);

/// wdice + beta * focal.
HybridValue hybrid_loss(const Grid& target, const Grid& prob, const Grid& myo,
                        const LossConfig& cfg);

}  // namespace lge::loss
