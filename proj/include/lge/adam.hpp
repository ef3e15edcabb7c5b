#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lge/grid.hpp"

namespace lge {

/// Adam moments plus hyperparameters. Weight decay is decoupled: after the
/// moment update each decayed tensor is shrunk by lr * weight_decay * theta.
struct AdamState {
  std::vector<Grid> m;
  std::vector<Grid> v;
  std::uint64_t step = 0;
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 1e-9;

  /// Zeroed moments shaped like `params`.
  static AdamState for_params(std::span<const Grid> params, double lr,
                              double weight_decay);
};

/// Default decay interval; endpoints inclusive.
inline constexpr double kMinWeightDecay = 1e-14;
inline constexpr double kMaxWeightDecay = 1e-9;

/// One Adam update of `theta` in place. `decay_mask[i]` selects which tensors
/// receive weight decay; an empty mask decays all of them.
void adam_step(std::span<Grid> theta, std::span<const Grid> grads,
               AdamState& state, std::span<const bool> decay_mask = {});

}  // namespace lge
