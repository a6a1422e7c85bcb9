// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/adam.hpp"

#include <cmath>

namespace nca {

AdamStepInfo adam_update(ParamSet& params, const ParamSet& grads, AdamState& state) {
  if (!params.same_layout(grads)) {
    throw std::invalid_argument("adam_update: gradient layout does not match parameters");
  }
  if (!params.same_layout(state.m) || !params.same_layout(state.v)) {
    throw std::invalid_argument("adam_update: optimizer state layout does not match parameters");
  }
  const auto& cfg = state.config;

  double sq = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!grads[i].all_finite()) throw NonFiniteGradientError(grads.name(i));
    for (float g : grads[i].data()) sq += static_cast<double>(g) * g;
  }
  const double norm = std::sqrt(sq);
  const bool clipped = cfg.clip_norm > 0.0 && norm > cfg.clip_norm;
  const double scale = clipped ? cfg.clip_norm / norm : 1.0;

  state.t += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));

  for (std::size_t i = 0; i < params.size(); ++i) {
    auto theta = params[i].data();
    auto m = state.m[i].data();
    auto v = state.v[i].data();
    auto g = grads[i].data();
    for (std::size_t k = 0; k < theta.size(); ++k) {
      const double gk = scale * static_cast<double>(g[k]);
      const double mk = cfg.beta1 * m[k] + (1.0 - cfg.beta1) * gk;
      const double vk = cfg.beta2 * v[k] + (1.0 - cfg.beta2) * gk * gk;
      m[k] = static_cast<float>(mk);
      v[k] = static_cast<float>(vk);
      const double step = cfg.lr * (mk / bc1) / (std::sqrt(vk / bc2) + cfg.eps);
      if (step != 0.0) theta[k] = static_cast<float>(static_cast<double>(theta[k]) - step);
    }
  }
  return {norm, clipped};
}

}  // namespace nca
