// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>

#include "nca/nn.hpp"
#include "nca/tape.hpp"
#include "nca/tensor.hpp"
#include "nca/vocab.hpp"

namespace nca {

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embed_dim = 64;
  std::size_t hidden_dim = 64;
  std::size_t max_len = 20;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Parameter indices inside Seq2SeqParams::tensors().
enum ParamIndex : std::size_t {
  kEmbedding = 0,
  kEncoderW,
  kEncoderB,
  kDecoderW,
  kDecoderB,
  kOutputW,
  kOutputB,
  kParamCount,
};

/// All learnable tensors of the single-layer LSTM encoder-decoder. The
/// embedding table is shared between encoder and decoder.
class Seq2SeqParams {
 public:
  Seq2SeqParams() = default;
  /// All-zero parameters.
  explicit Seq2SeqParams(const ModelConfig& config);
  /// Adopts existing tensors; throws std::invalid_argument on any shape
  /// inconsistency with `config`.
  Seq2SeqParams(const ModelConfig& config, ParamSet tensors);

  /// Uniform init in [-0.08, 0.08], forget-gate biases +1.
  static Seq2SeqParams random(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const ParamSet& tensors() const { return tensors_; }
  ParamSet& tensors() { return tensors_; }
  const Tensor& operator[](ParamIndex i) const { return tensors_[i]; }
  Tensor& operator[](ParamIndex i) { return tensors_[i]; }

  friend bool operator==(const Seq2SeqParams&, const Seq2SeqParams&) = default;

 private:
  ModelConfig config_;
  ParamSet tensors_;
};

ParamSet make_param_layout(const ModelConfig& config);

/// Clips to the first max_len tokens.
TokenSeq clip_source(const TokenSeq& src, std::size_t max_len);
/// Clips to max_len - 1 tokens so the EOS-terminated target fits max_len.
TokenSeq clip_target(const TokenSeq& tgt, std::size_t max_len);

/// Final encoder state after consuming every source embedding.
LstmState encode(const Seq2SeqParams& params, const TokenSeq& src);

struct StepOutput {
  Vec log_probs;
  LstmState state;
};

/// One decoder step: feed prev_token, return log-softmax over the vocab.
StepOutput step(const Seq2SeqParams& params, const LstmState& state, TokenId prev_token);

struct PairLoss {
  double loss;  // mean per-token cross-entropy
  std::size_t tokens;
  GradTape tape;
};

/// Teacher-forced loss of producing tgt + EOS from src, averaged per target
/// token. The tape references params, which must outlive it.
PairLoss pair_loss(const Seq2SeqParams& params, const TokenSeq& src, const TokenSeq& tgt);

}  // namespace nca
