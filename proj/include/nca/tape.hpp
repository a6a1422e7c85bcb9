// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "nca/nn.hpp"
#include "nca/tensor.hpp"

namespace nca {

/// Gradient record: one tensor per parameter, same names and shapes.
using Gradients = ParamSet;

/// Records a forward pass over a fixed parameter set so it can be replayed
/// in reverse. Every intermediate value lives in a numbered slot; ops read
/// and write slots and reference parameters by their index in the ParamSet.
///
/// The referenced ParamSet must outlive the tape and must not be modified
/// while the tape is in use.
class GradTape {
 public:
  using Slot = std::size_t;

  explicit GradTape(const ParamSet& params) : params_(&params) {}

  Slot constant(Vec value);
  Slot embed(std::size_t table, TokenId id);
  /// Returns the (h, c) slots of the new state.
  std::pair<Slot, Slot> lstm_step(std::size_t w, std::size_t b, Slot x, Slot h_prev, Slot c_prev);
  Slot linear(std::size_t w, std::size_t b, Slot x);
  /// Adds weight * xent(logits, target) to the tape's total loss and returns
  /// the unweighted term.
  double xent(Slot logits, TokenId target, double weight);

  std::span<const double> value(Slot s) const { return values_[s]; }
  double loss() const { return loss_; }
  std::size_t op_count() const { return ops_.size(); }
  bool has_loss() const { return has_loss_; }

  /// Gradient of loss_grad * loss() with respect to every parameter.
  /// Throws std::logic_error if no loss term was recorded.
  Gradients backward(double loss_grad = 1.0) const;

 private:
  struct EmbedOp {
    std::size_t table;
    TokenId id;
    Slot out;
  };
  struct LstmOp {
    std::size_t w, b;
    Slot x, h_prev, c_prev, h_out, c_out;
    LstmCache cache;
  };
  struct LinearOp {
    std::size_t w, b;
    Slot x, out;
  };
  struct XentOp {
    Slot logits;
    TokenId target;
    double weight;
  };
  using Op = std::variant<EmbedOp, LstmOp, LinearOp, XentOp>;

  Slot push(Vec value);
  void check_param(std::size_t index) const;

  const ParamSet* params_;
  std::vector<Vec> values_;
  std::vector<Op> ops_;
  double loss_ = 0.0;
  bool has_loss_ = false;
};

}  // namespace nca
