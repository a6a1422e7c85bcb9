// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "nca/decode.hpp"
#include "nca/model.hpp"
#include "nca/session.hpp"
#include "nca/vocab.hpp"

namespace nca {

/// Unique n-grams across all candidates divided by total n-grams; 0 when
/// no candidate is long enough. Throws std::invalid_argument for n == 0.
double distinct_n(std::span<const TokenSeq> candidates, std::size_t n);

/// Drops everything from the first kEos on.
TokenSeq strip_eos(const TokenSeq& seq);

/// Pairs used by the sweeps. `probes` pair a rephrased prompt with the
/// response trained for the original; `held_out` measures forgetting.
struct SweepData {
  std::vector<TextPair> training;
  std::vector<TextPair> probes;
  std::vector<TextPair> held_out;
};

struct ProbeRow {
  double x = 0.0;               // lr, interaction count or lambdaFirst
  double one_shot_rate = 0.0;   // isolated single-update success on training pairs
  double exact_recall = 0.0;    // greedy == trained response, after all updates
  double probe_recall = 0.0;    // same, for the rephrased prompts
  double distinct1 = 0.0;       // mean over candidate sets
  double distinct2 = 0.0;
  double ppl_before = 1.0;      // held-out perplexity of the starting model
  double ppl_after = 1.0;

  double drift() const { return ppl_after - ppl_before; }
};

struct ProbeReport {
  std::string sweep;  // "lr" | "interactions" | "diversity"
  std::string x_label;
  double baseline_rate = 0.0;  // exact recall of the untouched model
  std::vector<ProbeRow> rows;
};

nlohmann::json to_json(const ProbeReport& report);
std::string to_table(const ProbeReport& report);

/// Fraction of pairs whose greedy decode reproduces the response.
double recall(const Seq2SeqParams& params, const Vocab& vocab, std::span<const TextPair> pairs);

/// For each lr: the isolated one-shot rate (every training pair applied to a
/// fresh copy of `base`), then all training pairs applied in order to one
/// copy to measure recall, candidate diversity and held-out perplexity drift.
ProbeReport lr_sweep(const Seq2SeqParams& base, const Vocab& vocab, const SweepData& data,
                     std::span<const double> lrs, const DecodeConfig& decode);

/// Replays growing prefixes of `records` (sizes ascending, each at most
/// records.size()) and measures recall of every prompt trained anywhere in
/// the transcript, plus the rephrased probes.
ProbeReport interaction_sweep(const Seq2SeqParams& base, const Vocab& vocab,
                              const std::vector<InteractionRecord>& records,
                              std::span<const std::size_t> prefix_sizes,
                              std::span<const TextPair> probes, std::span<const TextPair> held_out,
                              std::optional<double> lr_override, const DecodeConfig& decode);

/// Candidate diversity of hamming_dbs over `prompts` for each lambdaFirst.
ProbeReport diversity_sweep(const Seq2SeqParams& params, const Vocab& vocab,
                            std::span<const std::string> prompts, std::span<const double> lambdas,
                            const DecodeConfig& decode);

}  // namespace nca
