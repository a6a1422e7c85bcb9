// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/model.hpp"

#include <random>
#include <stdexcept>
#include <string>

namespace nca {
namespace {

void check_token(const Seq2SeqParams& params, TokenId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= params.config().vocab_size) {
    throw std::invalid_argument("token id " + std::to_string(id) + " out of range for vocab of " +
                                std::to_string(params.config().vocab_size));
  }
}

}  // namespace

ParamSet make_param_layout(const ModelConfig& c) {
  const std::size_t v = c.vocab_size, e = c.embed_dim, h = c.hidden_dim;
  std::vector<NamedTensor> t;
  t.push_back({"embedding", Tensor({v, e})});
  t.push_back({"encoder.w", Tensor({4 * h, e + h})});
  t.push_back({"encoder.b", Tensor({4 * h})});
  t.push_back({"decoder.w", Tensor({4 * h, e + h})});
  t.push_back({"decoder.b", Tensor({4 * h})});
  t.push_back({"output.w", Tensor({v, h})});
  t.push_back({"output.b", Tensor({v})});
  return ParamSet(std::move(t));
}

Seq2SeqParams::Seq2SeqParams(const ModelConfig& config)
    : config_(config), tensors_(make_param_layout(config)) {}

Seq2SeqParams::Seq2SeqParams(const ModelConfig& config, ParamSet tensors)
    : config_(config), tensors_(std::move(tensors)) {
  if (!tensors_.same_layout(make_param_layout(config_))) {
    throw std::invalid_argument("parameter tensors do not match model config (V=" +
                                std::to_string(config_.vocab_size) +
                                ", E=" + std::to_string(config_.embed_dim) +
                                ", H=" + std::to_string(config_.hidden_dim) + ")");
  }
}

Seq2SeqParams Seq2SeqParams::random(const ModelConfig& config, std::uint64_t seed) {
  Seq2SeqParams p(config);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> dist(-0.08f, 0.08f);
  for (std::size_t i = 0; i < p.tensors_.size(); ++i) {
    for (auto& x : p.tensors_[i].data()) x = dist(rng);
  }
  const std::size_t h = config.hidden_dim;
  for (auto idx : {kEncoderB, kDecoderB}) {
    for (std::size_t j = h; j < 2 * h; ++j) p[idx][j] = 1.0f;
  }
  return p;
}

TokenSeq clip_source(const TokenSeq& src, std::size_t max_len) {
  if (src.size() <= max_len) return src;
  return TokenSeq(src.begin(), src.begin() + static_cast<std::ptrdiff_t>(max_len));
}

TokenSeq clip_target(const TokenSeq& tgt, std::size_t max_len) {
  const std::size_t keep = max_len > 0 ? max_len - 1 : 0;
  if (tgt.size() <= keep) return tgt;
  return TokenSeq(tgt.begin(), tgt.begin() + static_cast<std::ptrdiff_t>(keep));
}

LstmState encode(const Seq2SeqParams& params, const TokenSeq& src) {
  if (src.empty()) throw std::invalid_argument("encode: empty source sequence");
  const LstmWeights w{params[kEncoderW], params[kEncoderB]};
  auto state = LstmState::zeros(params.config().hidden_dim);
  for (auto id : clip_source(src, params.config().max_len)) {
    check_token(params, id);
    state = lstm_step(embed(id, params[kEmbedding]), state, w);
  }
  return state;
}

StepOutput step(const Seq2SeqParams& params, const LstmState& state, TokenId prev_token) {
  check_token(params, prev_token);
  const LstmWeights w{params[kDecoderW], params[kDecoderB]};
  auto next = lstm_step(embed(prev_token, params[kEmbedding]), state, w);
  auto logits = linear(next.h, params[kOutputW], params[kOutputB]);
  return {log_softmax(logits), std::move(next)};
}

PairLoss pair_loss(const Seq2SeqParams& params, const TokenSeq& src, const TokenSeq& tgt) {
  if (src.empty()) throw std::invalid_argument("pair_loss: empty source sequence");
  if (tgt.empty()) throw std::invalid_argument("pair_loss: empty target sequence");
  const auto& cfg = params.config();
  const auto source = clip_source(src, cfg.max_len);
  auto target = clip_target(tgt, cfg.max_len);
  for (auto id : source) check_token(params, id);
  for (auto id : target) check_token(params, id);

  GradTape tape(params.tensors());
  auto h = tape.constant(Vec(cfg.hidden_dim, 0.0));
  auto c = tape.constant(Vec(cfg.hidden_dim, 0.0));
  for (auto id : source) {
    auto x = tape.embed(kEmbedding, id);
    std::tie(h, c) = tape.lstm_step(kEncoderW, kEncoderB, x, h, c);
  }

  TokenSeq inputs;
  inputs.reserve(target.size() + 1);
  inputs.push_back(kSos);
  inputs.insert(inputs.end(), target.begin(), target.end());
  target.push_back(kEos);

  const double weight = 1.0 / static_cast<double>(target.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    auto x = tape.embed(kEmbedding, inputs[t]);
    std::tie(h, c) = tape.lstm_step(kDecoderW, kDecoderB, x, h, c);
    auto logits = tape.linear(kOutputW, kOutputB, h);
    tape.xent(logits, target[t], weight);
  }
  const double loss = tape.loss();
  return {loss, target.size(), std::move(tape)};
}

}  // namespace nca
