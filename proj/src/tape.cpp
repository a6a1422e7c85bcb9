// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/tape.hpp"

#include <stdexcept>
#include <string>

namespace nca {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

GradTape::Slot GradTape::push(Vec value) {
  values_.push_back(std::move(value));
  return values_.size() - 1;
}

void GradTape::check_param(std::size_t index) const {
  if (index >= params_->size()) {
    throw std::invalid_argument("parameter index " + std::to_string(index) + " out of range");
  }
}

GradTape::Slot GradTape::constant(Vec value) { return push(std::move(value)); }

GradTape::Slot GradTape::embed(std::size_t table, TokenId id) {
  check_param(table);
  auto v = nca::embed(id, (*params_)[table]);
  const Slot out = push(std::move(v));
  ops_.emplace_back(EmbedOp{table, id, out});
  return out;
}

std::pair<GradTape::Slot, GradTape::Slot> GradTape::lstm_step(std::size_t w, std::size_t b, Slot x,
                                                              Slot h_prev, Slot c_prev) {
  check_param(w);
  check_param(b);
  const LstmWeights weights{(*params_)[w], (*params_)[b]};
  LstmState prev{values_[h_prev], values_[c_prev]};
  auto cache = lstm_forward(values_[x], prev, weights);
  const Slot h = push(cache.h);
  const Slot c = push(cache.c);
  ops_.emplace_back(LstmOp{w, b, x, h_prev, c_prev, h, c, std::move(cache)});
  return {h, c};
}

GradTape::Slot GradTape::linear(std::size_t w, std::size_t b, Slot x) {
  check_param(w);
  check_param(b);
  auto y = nca::linear(values_[x], (*params_)[w], (*params_)[b]);
  const Slot out = push(std::move(y));
  ops_.emplace_back(LinearOp{w, b, x, out});
  return out;
}

double GradTape::xent(Slot logits, TokenId target, double weight) {
  const double term = nca::xent(values_[logits], target);
  loss_ += weight * term;
  has_loss_ = true;
  ops_.emplace_back(XentOp{logits, target, weight});
  return term;
}

Gradients GradTape::backward(double loss_grad) const {
  if (!has_loss_) {
    throw std::logic_error("backward called on a tape with no recorded loss");
  }
  const ParamSet& params = *params_;
  std::vector<Vec> pgrad(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) pgrad[i].assign(params[i].size(), 0.0);

  std::vector<Vec> sgrad(values_.size());
  for (std::size_t s = 0; s < values_.size(); ++s) sgrad[s].assign(values_[s].size(), 0.0);

  auto accumulate = [](Vec& into, const Vec& from) {
    for (std::size_t k = 0; k < into.size(); ++k) into[k] += from[k];
  };

  for (auto it = ops_.rbegin(); it != ops_.rend(); ++it) {
    std::visit(
        Overloaded{
            [&](const XentOp& op) {
              if (loss_grad == 0.0) return;
              auto g = xent_grad(values_[op.logits], op.target);
              const double scale = loss_grad * op.weight;
              auto& dst = sgrad[op.logits];
              for (std::size_t k = 0; k < g.size(); ++k) dst[k] += scale * g[k];
            },
            [&](const LinearOp& op) {
              Vec dx(values_[op.x].size());
              linear_backward(values_[op.x], params[op.w], sgrad[op.out], pgrad[op.w], pgrad[op.b],
                              dx);
              accumulate(sgrad[op.x], dx);
            },
            [&](const LstmOp& op) {
              const LstmWeights weights{params[op.w], params[op.b]};
              Vec dx(values_[op.x].size());
              Vec dh(values_[op.h_prev].size());
              Vec dc(values_[op.c_prev].size());
              lstm_backward(op.cache, sgrad[op.h_out], sgrad[op.c_out], weights, pgrad[op.w],
                            pgrad[op.b], dx, dh, dc);
              accumulate(sgrad[op.x], dx);
              accumulate(sgrad[op.h_prev], dh);
              accumulate(sgrad[op.c_prev], dc);
            },
            [&](const EmbedOp& op) {
              embed_backward(op.id, sgrad[op.out], params[op.table].cols(), pgrad[op.table]);
            },
        },
        *it);
  }

  Gradients grads = params.zeros_like();
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto dst = grads[i].data();
    for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<float>(pgrad[i][k]);
  }
  return grads;
}

}  // namespace nca
