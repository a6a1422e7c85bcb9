// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/nn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace nca {
namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void check_vocab_index(TokenId id, std::size_t v, const char* what) {
  if (id < 0 || static_cast<std::size_t>(id) >= v) {
    throw std::invalid_argument(std::string(what) + " " + std::to_string(id) +
                                " out of range [0, " + std::to_string(v) + ")");
  }
}

}  // namespace

void check_lstm_shapes(const LstmWeights& w, std::size_t input_size, std::size_t hidden_size) {
  const auto& ws = w.w.shape();
  const auto& bs = w.b.shape();
  const bool ok = ws.size() == 2 && ws[0] == 4 * hidden_size && ws[1] == input_size + hidden_size &&
                  bs.size() == 1 && bs[0] == 4 * hidden_size;
  if (!ok) {
    throw std::invalid_argument("lstm shape mismatch: w " + shape_string(ws) + ", b " +
                                shape_string(bs) + " for input " + std::to_string(input_size) +
                                ", hidden " + std::to_string(hidden_size));
  }
}

LstmCache lstm_forward(std::span<const double> x, const LstmState& prev, const LstmWeights& w) {
  const std::size_t hidden = prev.h.size();
  if (prev.c.size() != hidden) {
    throw std::invalid_argument("lstm state h/c length mismatch");
  }
  check_lstm_shapes(w, x.size(), hidden);
  const std::size_t in = x.size() + hidden;

  LstmCache cache;
  cache.xh.resize(in);
  std::copy(x.begin(), x.end(), cache.xh.begin());
  std::copy(prev.h.begin(), prev.h.end(), cache.xh.begin() + static_cast<std::ptrdiff_t>(x.size()));
  cache.c_prev = prev.c;

  Vec z(4 * hidden);
  const float* wd = w.w.data().data();
  for (std::size_t r = 0; r < 4 * hidden; ++r) {
    const float* wr = wd + r * in;
    double acc = w.b[r];
    for (std::size_t k = 0; k < in; ++k) acc += static_cast<double>(wr[k]) * cache.xh[k];
    z[r] = acc;
  }

  cache.i.resize(hidden);
  cache.f.resize(hidden);
  cache.g.resize(hidden);
  cache.o.resize(hidden);
  cache.c.resize(hidden);
  cache.tanh_c.resize(hidden);
  cache.h.resize(hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    cache.i[j] = sigmoid(z[j]);
    cache.f[j] = sigmoid(z[hidden + j]);
    cache.g[j] = std::tanh(z[2 * hidden + j]);
    cache.o[j] = sigmoid(z[3 * hidden + j]);
    cache.c[j] = cache.f[j] * prev.c[j] + cache.i[j] * cache.g[j];
    cache.tanh_c[j] = std::tanh(cache.c[j]);
    cache.h[j] = cache.o[j] * cache.tanh_c[j];
  }
  return cache;
}

LstmState lstm_step(std::span<const double> x, const LstmState& prev, const LstmWeights& w) {
  auto cache = lstm_forward(x, prev, w);
  return {std::move(cache.h), std::move(cache.c)};
}

void lstm_backward(const LstmCache& cache, std::span<const double> dh, std::span<const double> dc,
                   const LstmWeights& w, std::span<double> dw, std::span<double> db,
                   std::span<double> dx, std::span<double> dh_prev, std::span<double> dc_prev) {
  const std::size_t hidden = cache.h.size();
  const std::size_t in = cache.xh.size();

  Vec dz(4 * hidden);
  for (std::size_t j = 0; j < hidden; ++j) {
    const double dct = dc[j] + dh[j] * cache.o[j] * (1.0 - cache.tanh_c[j] * cache.tanh_c[j]);
    const double di = dct * cache.g[j];
    const double df = dct * cache.c_prev[j];
    const double dg = dct * cache.i[j];
    const double d_o = dh[j] * cache.tanh_c[j];
    dz[j] = di * cache.i[j] * (1.0 - cache.i[j]);
    dz[hidden + j] = df * cache.f[j] * (1.0 - cache.f[j]);
    dz[2 * hidden + j] = dg * (1.0 - cache.g[j] * cache.g[j]);
    dz[3 * hidden + j] = d_o * cache.o[j] * (1.0 - cache.o[j]);
    dc_prev[j] = dct * cache.f[j];
  }

  Vec dxh(in, 0.0);
  const float* wd = w.w.data().data();
  for (std::size_t r = 0; r < 4 * hidden; ++r) {
    const double g = dz[r];
    db[r] += g;
    if (g == 0.0) continue;
    const float* wr = wd + r * in;
    double* dwr = dw.data() + r * in;
    for (std::size_t k = 0; k < in; ++k) {
      dwr[k] += g * cache.xh[k];
      dxh[k] += g * static_cast<double>(wr[k]);
    }
  }
  const std::size_t e = in - hidden;
  std::copy(dxh.begin(), dxh.begin() + static_cast<std::ptrdiff_t>(e), dx.begin());
  std::copy(dxh.begin() + static_cast<std::ptrdiff_t>(e), dxh.end(), dh_prev.begin());
}

Vec embed(TokenId id, const Tensor& table) {
  check_vocab_index(id, table.rows(), "token id");
  const auto r = table.row(static_cast<std::size_t>(id));
  return Vec(r.begin(), r.end());
}

void embed_backward(TokenId id, std::span<const double> dy, std::size_t embed_dim,
                    std::span<double> dtable) {
  double* row = dtable.data() + static_cast<std::size_t>(id) * embed_dim;
  for (std::size_t k = 0; k < embed_dim; ++k) row[k] += dy[k];
}

Vec linear(std::span<const double> x, const Tensor& w, const Tensor& b) {
  if (w.rank() != 2 || w.cols() != x.size() || b.rank() != 1 || b.size() != w.rows()) {
    throw std::invalid_argument("linear shape mismatch: w " + shape_string(w.shape()) + ", b " +
                                shape_string(b.shape()) + ", x [" + std::to_string(x.size()) + "]");
  }
  const std::size_t rows = w.rows();
  const std::size_t cols = x.size();
  Vec y(rows);
  const float* wd = w.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const float* wr = wd + r * cols;
    double acc = b[r];
    for (std::size_t k = 0; k < cols; ++k) acc += static_cast<double>(wr[k]) * x[k];
    y[r] = acc;
  }
  return y;
}

void linear_backward(std::span<const double> x, const Tensor& w, std::span<const double> dy,
                     std::span<double> dw, std::span<double> db, std::span<double> dx) {
  const std::size_t rows = w.rows();
  const std::size_t cols = x.size();
  std::fill(dx.begin(), dx.end(), 0.0);
  const float* wd = w.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const double g = dy[r];
    db[r] += g;
    if (g == 0.0) continue;
    const float* wr = wd + r * cols;
    double* dwr = dw.data() + r * cols;
    for (std::size_t k = 0; k < cols; ++k) {
      dwr[k] += g * x[k];
      dx[k] += g * static_cast<double>(wr[k]);
    }
  }
}

Vec log_softmax(std::span<const double> logits) {
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  const double lse = m + std::log(sum);
  Vec out(logits.size());
  for (std::size_t k = 0; k < logits.size(); ++k) out[k] = logits[k] - lse;
  return out;
}

double xent(std::span<const double> logits, TokenId target) {
  check_vocab_index(target, logits.size(), "target");
  const double m = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - m);
  // Clamp the rounding residue that can make this -0.0 or slightly negative.
  return std::max(0.0, m + std::log(sum) - logits[static_cast<std::size_t>(target)]);
}

Vec xent_grad(std::span<const double> logits, TokenId target) {
  check_vocab_index(target, logits.size(), "target");
  const double m = *std::max_element(logits.begin(), logits.end());
  Vec p(logits.size());
  double sum = 0.0;
  for (std::size_t k = 0; k < logits.size(); ++k) {
    p[k] = std::exp(logits[k] - m);
    sum += p[k];
  }
  for (auto& v : p) v /= sum;
  p[static_cast<std::size_t>(target)] -= 1.0;
  return p;
}

}  // namespace nca
