// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/decode.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace nca {

std::string to_string(DisplayOrdering ordering) {
  return ordering == DisplayOrdering::kRandom ? "random" : "likelihood";
}

DisplayOrdering parse_ordering(std::string_view name) {
  if (name == "likelihood") return DisplayOrdering::kLikelihood;
  if (name == "random") return DisplayOrdering::kRandom;
  throw std::invalid_argument("ordering must be 'likelihood' or 'random', got '" +
                              std::string(name) + "'");
}

void DecodeConfig::validate() const {
  if (k < 1) throw std::invalid_argument("k must be >= 1");
  if (!(lambda_first >= 0.0)) throw std::invalid_argument("lambdaFirst must be >= 0");
  if (!(lambda_rest >= 0.0)) throw std::invalid_argument("lambdaRest must be >= 0");
  if (max_len < 1) throw std::invalid_argument("maxLen must be >= 1");
}

Vec ModelScorer::advance(State& state, TokenId prev) const {
  auto out = step(*params_, state.lstm, prev);
  state.lstm = std::move(out.state);
  constexpr double kMasked = -std::numeric_limits<double>::infinity();
  out.log_probs[kPad] = kMasked;
  out.log_probs[kUnk] = kMasked;
  if (state.position == 0) out.log_probs[kEos] = kMasked;
  ++state.position;
  return std::move(out.log_probs);
}

std::size_t argmax(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < scores.size(); ++k) {
    if (scores[k] > scores[best]) best = k;
  }
  return best;
}

Vec augmented_scores(std::span<const double> log_probs, std::span<const TokenId> prior,
                     double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("lambda must be >= 0");
  Vec scores(log_probs.begin(), log_probs.end());
  for (auto w : prior) {
    if (w >= 0 && static_cast<std::size_t>(w) < scores.size()) {
      scores[static_cast<std::size_t>(w)] -= lambda;
    }
  }
  return scores;
}

TokenSeq greedy(const Seq2SeqParams& params, const TokenSeq& src, std::size_t max_len) {
  ModelScorer scorer(params, src);
  return greedy_decode(scorer, max_len);
}

BeamSet hamming_dbs(const Seq2SeqParams& params, const TokenSeq& src, const DecodeConfig& cfg) {
  ModelScorer scorer(params, src);
  return hamming_dbs(scorer, cfg);
}

std::vector<std::size_t> DisplayOrder::inverse() const {
  std::vector<std::size_t> inv(order.size());
  for (std::size_t p = 0; p < order.size(); ++p) inv[order[p]] = p;
  return inv;
}

DisplayOrder order_for_display(const BeamSet& beams, DisplayOrdering policy, std::uint64_t seed) {
  DisplayOrder d;
  d.order.resize(beams.beams.size());
  std::iota(d.order.begin(), d.order.end(), std::size_t{0});
  if (policy == DisplayOrdering::kLikelihood) {
    std::stable_sort(d.order.begin(), d.order.end(), [&](std::size_t a, std::size_t b) {
      return beams.beams[a].log_score > beams.beams[b].log_score;
    });
  } else {
    std::mt19937_64 rng(seed);
    std::shuffle(d.order.begin(), d.order.end(), rng);
  }
  return d;
}

}  // namespace nca
