// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

namespace nca {

std::vector<EncodedPair> encode_pairs(const Vocab& vocab, const std::vector<TextPair>& pairs) {
  std::vector<EncodedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    auto src = vocab.encode(p.prompt);
    auto tgt = vocab.encode(p.response);
    if (src.empty() || tgt.empty()) continue;
    out.push_back({std::move(src), std::move(tgt)});
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

EpochStats train_epoch(Seq2SeqParams& params, std::span<const EncodedPair> pairs,
                       std::size_t batch_size, AdamState& adam, std::uint64_t seed) {
  if (pairs.empty()) throw std::invalid_argument("train_epoch: no training pairs");
  if (batch_size < 1) throw std::invalid_argument("train_epoch: batch size must be >= 1");

  std::vector<std::size_t> order(pairs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  EpochStats stats;
  double loss_sum = 0.0;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    const std::size_t end = std::min(order.size(), start + batch_size);
    std::size_t batch_tokens = 0;
    std::vector<PairLoss> losses;
    losses.reserve(end - start);
    for (std::size_t k = start; k < end; ++k) {
      const auto& p = pairs[order[k]];
      losses.push_back(pair_loss(params, p.src, p.tgt));
      batch_tokens += losses.back().tokens;
    }
    // Per-pair losses are token means; reweight so the batch loss is the
    // mean over all target tokens in the batch.
    std::vector<std::vector<double>> acc(params.tensors().size());
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i].assign(params.tensors()[i].size(), 0.0);
    for (auto& pl : losses) {
      const double w = static_cast<double>(pl.tokens) / static_cast<double>(batch_tokens);
      const auto g = pl.tape.backward(w);
      for (std::size_t i = 0; i < acc.size(); ++i) {
        auto src = g[i].data();
        for (std::size_t k = 0; k < src.size(); ++k) acc[i][k] += src[k];
      }
      loss_sum += pl.loss * static_cast<double>(pl.tokens);
    }
    Gradients grads = params.tensors().zeros_like();
    for (std::size_t i = 0; i < acc.size(); ++i) {
      auto dst = grads[i].data();
      for (std::size_t k = 0; k < dst.size(); ++k) dst[k] = static_cast<float>(acc[i][k]);
    }
    losses.clear();
    adam_update(params.tensors(), grads, adam);
    stats.tokens += batch_tokens;
    ++stats.updates;
  }
  stats.mean_loss = loss_sum / static_cast<double>(stats.tokens);
  return stats;
}

double mean_token_loss(const Seq2SeqParams& params, std::span<const EncodedPair> pairs) {
  if (pairs.empty()) throw std::invalid_argument("mean_token_loss: no pairs");
  double sum = 0.0;
  std::size_t tokens = 0;
  for (const auto& p : pairs) {
    const auto pl = pair_loss(params, p.src, p.tgt);
    sum += pl.loss * static_cast<double>(pl.tokens);
    tokens += pl.tokens;
  }
  return sum / static_cast<double>(tokens);
}

double perplexity(const Seq2SeqParams& params, std::span<const EncodedPair> pairs) {
  return std::exp(mean_token_loss(params, pairs));
}

namespace {

void run_phase(int phase, Seq2SeqParams& params, const Vocab& vocab,
               std::span<const EncodedPair> pairs, std::size_t epochs, double lr,
               const TwoPhaseConfig& cfg, std::vector<EpochStats>& history, AdamState& adam) {
  AdamConfig ac;
  ac.lr = lr;
  adam = AdamState(params.tensors(), ac);
  for (std::size_t epoch = 1; epoch <= epochs; ++epoch) {
    const auto seed = derive_seed(cfg.seed, static_cast<std::uint64_t>(phase) * 1000003ULL + epoch);
    auto stats = train_epoch(params, pairs, cfg.batch_size, adam, seed);
    history.push_back(stats);
    if (cfg.on_epoch) cfg.on_epoch(phase, epoch, stats);
    if (cfg.checkpoint_dir) {
      char name[32];
      std::snprintf(name, sizeof(name), "phase%d-epoch%03zu.nca", phase, epoch);
      Checkpoint ckpt{vocab, params, adam,
                      Provenance{"phase" + std::to_string(phase), epoch, cfg.corpus_hashes, cfg.seed}};
      save_checkpoint(ckpt, *cfg.checkpoint_dir / name);
    }
  }
}

}  // namespace

TwoPhaseResult two_phase(const Seq2SeqParams& init, const Vocab& vocab,
                         std::span<const EncodedPair> corpus_a,
                         std::span<const EncodedPair> corpus_b, const TwoPhaseConfig& cfg) {
  if (init.config().vocab_size != vocab.size()) {
    throw std::invalid_argument("vocabulary mismatch: model sized for " +
                                std::to_string(init.config().vocab_size) + " tokens, vocab has " +
                                std::to_string(vocab.size()));
  }
  const auto v = static_cast<TokenId>(vocab.size());
  for (auto corpus : {corpus_a, corpus_b}) {
    for (const auto& p : corpus) {
      for (const auto* seq : {&p.src, &p.tgt}) {
        for (auto id : *seq) {
          if (id < 0 || id >= v) throw std::invalid_argument("vocabulary mismatch: token id out of range");
        }
      }
    }
  }
  if (cfg.checkpoint_dir) std::filesystem::create_directories(*cfg.checkpoint_dir);

  TwoPhaseResult result{init, init, {}, {}, {}};
  Seq2SeqParams params = init;
  if (cfg.epochs_a > 0) {
    run_phase(1, params, vocab, corpus_a, cfg.epochs_a, cfg.lr_a, cfg, result.history_a, result.final_adam);
  }
  result.phase1 = params;
  if (cfg.epochs_b > 0) {
    run_phase(2, params, vocab, corpus_b, cfg.epochs_b, cfg.lr_b, cfg, result.history_b, result.final_adam);
  }
  result.final_params = std::move(params);
  return result;
}

}  // namespace nca
