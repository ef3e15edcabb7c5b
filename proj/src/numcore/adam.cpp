#include "lge/adam.hpp"

#include <cmath>
#include <string>

namespace lge {

AdamState AdamState::for_params(std::span<const Grid> params, double lr,
                                double weight_decay) {
  AdamState s;
  s.lr = lr;
  s.weight_decay = weight_decay;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Grid& p : params) {
    s.m.emplace_back(p.channels, p.height, p.width);
    s.v.emplace_back(p.channels, p.height, p.width);
  }
  return s;
}

void adam_step(std::span<Grid> theta, std::span<const Grid> grads,
               AdamState& state, std::span<const bool> decay_mask) {
  if (theta.size() != grads.size()) {
    throw InvalidArgument("adam_step: " + std::to_string(theta.size()) +
                          " parameters but " + std::to_string(grads.size()) +
                          " gradients");
  }
  if (!decay_mask.empty() && decay_mask.size() != theta.size()) {
    throw InvalidArgument("adam_step: decay mask length mismatch");
  }
  if (state.m.size() != theta.size() || state.v.size() != theta.size()) {
    throw InvalidArgument("adam_step: moment count mismatch");
  }
  for (std::size_t k = 0; k < theta.size(); ++k) {
    require_same_shape(theta[k], grads[k], "adam_step gradient");
    require_same_shape(theta[k], state.m[k], "adam_step first moment");
    require_same_shape(theta[k], state.v[k], "adam_step second moment");
  }
  if (state.weight_decay < 0.0) {
    throw InvalidArgument("adam_step: negative weight decay");
  }

  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(state.beta1, t);
  const double bc2 = 1.0 - std::pow(state.beta2, t);
  const double shrink = state.lr * state.weight_decay;

  for (std::size_t k = 0; k < theta.size(); ++k) {
    auto& p = theta[k].values;
    const auto& g = grads[k].values;
    auto& m = state.m[k].values;
    auto& v = state.v[k].values;
    const bool decay = decay_mask.empty() || decay_mask[k];
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bc1;
      const double v_hat = v[i] / bc2;
      p[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
      if (decay) p[i] -= shrink * p[i];
    }
  }
}

}  // namespace lge
