// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "nca/adam.hpp"
#include "nca/checkpoint.hpp"
#include "nca/model.hpp"
#include "nca/vocab.hpp"

namespace nca {

struct EncodedPair {
  TokenSeq src;
  TokenSeq tgt;
};

std::vector<EncodedPair> encode_pairs(const Vocab& vocab, const std::vector<TextPair>& pairs);

/// splitmix64 of (base, stream); used to derive per-epoch and per-turn seeds.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

struct EpochStats {
  double mean_loss = 0.0;  // per target token, over the whole epoch
  std::size_t tokens = 0;
  std::size_t updates = 0;
};

/// Seeded shuffle, then one Adam step per mini-batch on the mean per-token
/// cross-entropy of the batch. NonFiniteGradientError propagates.
EpochStats train_epoch(Seq2SeqParams& params, std::span<const EncodedPair> pairs,
                       std::size_t batch_size, AdamState& adam, std::uint64_t seed);

/// Mean per-token cross-entropy without touching the parameters.
double mean_token_loss(const Seq2SeqParams& params, std::span<const EncodedPair> pairs);
/// exp(mean_token_loss).
double perplexity(const Seq2SeqParams& params, std::span<const EncodedPair> pairs);

struct TwoPhaseConfig {
  std::size_t epochs_a = 30;
  std::size_t epochs_b = 30;
  double lr_a = 0.001;
  double lr_b = 0.001;
  std::size_t batch_size = 10;
  std::uint64_t seed = 0;
  /// When set, "phase1-epochNNN.nca" / "phase2-epochNNN.nca" land here.
  std::optional<std::filesystem::path> checkpoint_dir;
  std::vector<std::string> corpus_hashes;
  std::function<void(int phase, std::size_t epoch, const EpochStats&)> on_epoch;
};

struct TwoPhaseResult {
  Seq2SeqParams phase1;
  Seq2SeqParams final_params;
  std::vector<EpochStats> history_a;
  std::vector<EpochStats> history_b;
  AdamState final_adam;
};

/// Trains on corpus_a from `init`, then continues on corpus_b from the
/// phase-1 weights with a fresh optimizer. Both corpora must already be
/// encoded with `vocab`; throws std::invalid_argument if `init` was sized
/// for a different vocabulary.
TwoPhaseResult two_phase(const Seq2SeqParams& init, const Vocab& vocab,
                         std::span<const EncodedPair> corpus_a,
                         std::span<const EncodedPair> corpus_b, const TwoPhaseConfig& cfg);

}  // namespace nca
