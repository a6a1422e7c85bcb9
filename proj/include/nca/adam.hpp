// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "nca/tensor.hpp"

namespace nca {

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  /// Global-norm clip applied to the gradients before the update; <= 0
  /// disables clipping.
  double clip_norm = 5.0;
};

/// Moment accumulators for one parameter set. Bound to the layout it was
/// created for.
struct AdamState {
  AdamConfig config;
  ParamSet m;
  ParamSet v;
  std::int64_t t = 0;

  AdamState() = default;
  AdamState(const ParamSet& params, AdamConfig cfg)
      : config(cfg), m(params.zeros_like()), v(params.zeros_like()) {}
};

class NonFiniteGradientError : public std::runtime_error {
 public:
  explicit NonFiniteGradientError(std::string tensor)
      : std::runtime_error("non-finite gradient in tensor '" + tensor + "'; update skipped"),
        tensor_(std::move(tensor)) {}
  const std::string& tensor() const { return tensor_; }

 private:
  std::string tensor_;
};

struct AdamStepInfo {
  double grad_norm;  // before clipping
  bool clipped;
};

/// One Adam step in place. Throws NonFiniteGradientError (leaving params and
/// state untouched) if any gradient entry is NaN or infinite, and
/// std::invalid_argument on layout mismatch.
AdamStepInfo adam_update(ParamSet& params, const ParamSet& grads, AdamState& state);

}  // namespace nca
