// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "nca/tensor.hpp"

// Forward and analytic backward for the four layer types of the
// encoder-decoder: embedding lookup, LSTM cell, linear projection and
// softmax cross-entropy. Parameters are float32; activations and all
// reductions are carried in double.

namespace nca {

using TokenId = std::int32_t;
using Vec = std::vector<double>;

struct LstmState {
  Vec h;
  Vec c;

  static LstmState zeros(std::size_t hidden) { return {Vec(hidden, 0.0), Vec(hidden, 0.0)}; }
  std::size_t hidden_size() const { return h.size(); }

  friend bool operator==(const LstmState&, const LstmState&) = default;
};

/// Non-owning view of one LSTM layer: `w` is 4H x (E+H) with gate blocks
/// ordered input, forget, candidate, output; `b` is 4H. The first E columns
/// multiply the input, the last H the previous hidden state.
struct LstmWeights {
  const Tensor& w;
  const Tensor& b;

  std::size_t hidden_size() const { return w.rows() / 4; }
  std::size_t input_size() const { return w.cols() - hidden_size(); }
};

/// Activations kept for the backward pass of one LSTM step.
struct LstmCache {
  Vec xh;  // [x; h_prev]
  Vec c_prev;
  Vec i, f, g, o;
  Vec c;
  Vec tanh_c;
  Vec h;
};

/// Throws std::invalid_argument with the offending shapes.
void check_lstm_shapes(const LstmWeights& w, std::size_t input_size, std::size_t hidden_size);

LstmCache lstm_forward(std::span<const double> x, const LstmState& prev, const LstmWeights& w);

/// One LSTM step. The returned state's `h` is the cell output.
LstmState lstm_step(std::span<const double> x, const LstmState& prev, const LstmWeights& w);

/// Accumulates into dw/db (laid out like w/b) and writes dx, dh_prev, dc_prev.
void lstm_backward(const LstmCache& cache, std::span<const double> dh, std::span<const double> dc,
                   const LstmWeights& w, std::span<double> dw, std::span<double> db,
                   std::span<double> dx, std::span<double> dh_prev, std::span<double> dc_prev);

Vec embed(TokenId id, const Tensor& table);
void embed_backward(TokenId id, std::span<const double> dy, std::size_t embed_dim,
                    std::span<double> dtable);

/// w * x + b with w of shape V x H.
Vec linear(std::span<const double> x, const Tensor& w, const Tensor& b);
void linear_backward(std::span<const double> x, const Tensor& w, std::span<const double> dy,
                     std::span<double> dw, std::span<double> db, std::span<double> dx);

Vec log_softmax(std::span<const double> logits);

/// -log softmax(logits)[target], max-subtracted.
double xent(std::span<const double> logits, TokenId target);
/// softmax(logits) - onehot(target).
Vec xent_grad(std::span<const double> logits, TokenId target);

}  // namespace nca
