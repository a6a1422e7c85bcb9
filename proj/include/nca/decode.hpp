// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nca/model.hpp"
#include "nca/vocab.hpp"

namespace nca {

enum class DisplayOrdering { kLikelihood, kRandom };

std::string to_string(DisplayOrdering ordering);
/// Accepts "likelihood" or "random"; throws std::invalid_argument otherwise.
DisplayOrdering parse_ordering(std::string_view name);

struct DecodeConfig {
  std::size_t k = 5;
  double lambda_first = 100.0;  // diversity weight at the first position
  double lambda_rest = 2.0;     // diversity weight at every later position
  std::size_t max_len = 20;
  DisplayOrdering ordering = DisplayOrdering::kLikelihood;

  /// Throws std::invalid_argument naming the bad field.
  void validate() const;
};

struct Beam {
  TokenSeq tokens;  // includes the terminating kEos when finished
  double log_score = 0.0;  // sum of raw (unpenalized) log-probs of the chosen tokens
  bool finished = false;
};

struct BeamSet {
  std::vector<Beam> beams;
};

/// Anything that can produce next-token log-probabilities for a growing
/// prefix. `advance` feeds `prev` (kSos on the first call) and returns the
/// distribution over the next token, updating the per-beam state.
template <class S>
concept StepScorer = requires(S& scorer, typename S::State& state, TokenId prev) {
  { scorer.initial_state() } -> std::convertible_to<typename S::State>;
  { scorer.advance(state, prev) } -> std::convertible_to<Vec>;
};

/// Decoder of a trained model for one encoded source. Forbids kPad and kUnk
/// everywhere and kEos at the first position, so responses are never empty.
class ModelScorer {
 public:
  struct State {
    LstmState lstm;
    std::size_t position = 0;
  };

  ModelScorer(const Seq2SeqParams& params, const TokenSeq& src)
      : params_(&params), encoded_(encode(params, src)) {}

  State initial_state() const { return {encoded_, 0}; }
  Vec advance(State& state, TokenId prev) const;

 private:
  const Seq2SeqParams* params_;
  LstmState encoded_;
};

/// Index of the maximum; ties go to the lowest index.
std::size_t argmax(std::span<const double> scores);

/// score(w) = log_probs[w] - lambda * |{j : prior[j] == w}|
Vec augmented_scores(std::span<const double> log_probs, std::span<const TokenId> prior,
                     double lambda);

template <StepScorer S>
TokenSeq greedy_decode(S& scorer, std::size_t max_len) {
  TokenSeq out;
  auto state = scorer.initial_state();
  TokenId prev = kSos;
  while (out.size() < max_len) {
    const Vec lp = scorer.advance(state, prev);
    prev = static_cast<TokenId>(argmax(lp));
    out.push_back(prev);
    if (prev == kEos) break;
  }
  return out;
}

/// K greedy-within-beam decodes run in lockstep. At each position beam 1
/// takes the unpenalized argmax; beam i takes the argmax of the log-probs
/// minus lambda times the number of earlier beams that placed the same token
/// at this position. Penalizing per position is argmax-equivalent to
/// rewarding whole-prefix Hamming distance, which only adds a constant
/// per step. A beam that has emitted kEos is frozen and places no further
/// tokens.
template <StepScorer S>
BeamSet hamming_dbs(S& scorer, const DecodeConfig& cfg) {
  cfg.validate();
  BeamSet set;
  set.beams.resize(cfg.k);
  std::vector<typename S::State> states;
  states.reserve(cfg.k);
  for (std::size_t i = 0; i < cfg.k; ++i) states.push_back(scorer.initial_state());

  std::vector<TokenId> placed;
  placed.reserve(cfg.k);
  for (std::size_t t = 0; t < cfg.max_len; ++t) {
    placed.clear();
    const double lambda = t == 0 ? cfg.lambda_first : cfg.lambda_rest;
    bool any_active = false;
    for (std::size_t i = 0; i < cfg.k; ++i) {
      Beam& beam = set.beams[i];
      if (beam.finished) continue;
      any_active = true;
      const TokenId prev = beam.tokens.empty() ? kSos : beam.tokens.back();
      const Vec lp = scorer.advance(states[i], prev);
      const auto w = static_cast<TokenId>(argmax(augmented_scores(lp, placed, lambda)));
      beam.tokens.push_back(w);
      beam.log_score += lp[static_cast<std::size_t>(w)];
      beam.finished = w == kEos;
      placed.push_back(w);
    }
    if (!any_active) break;
  }
  return set;
}

TokenSeq greedy(const Seq2SeqParams& params, const TokenSeq& src, std::size_t max_len);
BeamSet hamming_dbs(const Seq2SeqParams& params, const TokenSeq& src, const DecodeConfig& cfg);

/// Display position p shows beam order[p]. Both vectors are 0-based.
struct DisplayOrder {
  std::vector<std::size_t> order;

  std::size_t beam_at(std::size_t display_pos) const { return order.at(display_pos); }
  std::vector<std::size_t> inverse() const;
};

/// Likelihood: log-score descending, ties by beam index. Random: a shuffle
/// seeded by `seed`.
DisplayOrder order_for_display(const BeamSet& beams, DisplayOrdering policy, std::uint64_t seed);

}  // namespace nca
