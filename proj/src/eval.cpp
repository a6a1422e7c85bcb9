// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "nca/trainer.hpp"

namespace nca {

using nlohmann::json;

double distinct_n(std::span<const TokenSeq> candidates, std::size_t n) {
  if (n == 0) throw std::invalid_argument("distinct_n: n must be >= 1");
  std::set<std::vector<TokenId>> unique;
  std::size_t total = 0;
  for (const auto& seq : candidates) {
    if (seq.size() < n) continue;
    for (std::size_t i = 0; i + n <= seq.size(); ++i) {
      unique.emplace(seq.begin() + static_cast<std::ptrdiff_t>(i),
                     seq.begin() + static_cast<std::ptrdiff_t>(i + n));
      ++total;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(unique.size()) / static_cast<double>(total);
}

TokenSeq strip_eos(const TokenSeq& seq) {
  auto it = std::find(seq.begin(), seq.end(), kEos);
  return TokenSeq(seq.begin(), it);
}

double recall(const Seq2SeqParams& params, const Vocab& vocab, std::span<const TextPair> pairs) {
  if (pairs.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& p : pairs) hits += one_shot_check(params, vocab, p.prompt, p.response) ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(pairs.size());
}

namespace {

struct Diversity {
  double d1 = 0.0;
  double d2 = 0.0;
};

Diversity candidate_diversity(const Seq2SeqParams& params, const Vocab& vocab,
                              std::span<const std::string> prompts, const DecodeConfig& decode) {
  Diversity d;
  std::size_t n = 0;
  for (const auto& prompt : prompts) {
    const auto src = vocab.encode(prompt);
    if (src.empty()) continue;
    const auto beams = hamming_dbs(params, src, decode);
    std::vector<TokenSeq> cands;
    for (const auto& b : beams.beams) cands.push_back(strip_eos(b.tokens));
    d.d1 += distinct_n(cands, 1);
    d.d2 += distinct_n(cands, 2);
    ++n;
  }
  if (n > 0) {
    d.d1 /= static_cast<double>(n);
    d.d2 /= static_cast<double>(n);
  }
  return d;
}

double held_out_ppl(const Seq2SeqParams& params, const std::vector<EncodedPair>& held_out) {
  return held_out.empty() ? 1.0 : perplexity(params, held_out);
}

std::vector<std::string> prompts_of(std::span<const TextPair> pairs) {
  std::vector<std::string> out;
  for (const auto& p : pairs) out.push_back(p.prompt);
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

}  // namespace

ProbeReport lr_sweep(const Seq2SeqParams& base, const Vocab& vocab, const SweepData& data,
                     std::span<const double> lrs, const DecodeConfig& decode) {
  if (lrs.empty()) throw std::invalid_argument("lr_sweep: empty lr list");
  if (data.training.empty()) throw std::invalid_argument("lr_sweep: no training pairs");
  const auto train = encode_pairs(vocab, data.training);
  const auto held_out = encode_pairs(vocab, data.held_out);
  const auto probe_prompts = prompts_of(data.probes.empty() ? std::span<const TextPair>(data.training)
                                                            : std::span<const TextPair>(data.probes));

  ProbeReport report;
  report.sweep = "lr";
  report.x_label = "lr";
  report.baseline_rate = recall(base, vocab, data.training);
  const double ppl_before = held_out_ppl(base, held_out);

  for (double lr : lrs) {
    if (!(lr >= 0.0)) throw std::invalid_argument("lr_sweep: learning rates must be >= 0");
    ProbeRow row;
    row.x = lr;
    AdamConfig ac;
    ac.lr = lr;

    std::size_t hits = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      Seq2SeqParams clone = base;
      AdamState adam(clone.tensors(), ac);
      online_update(clone, adam, train[i].src, train[i].tgt);
      hits += one_shot_check(clone, train[i].src, train[i].tgt) ? 1 : 0;
    }
    row.one_shot_rate = static_cast<double>(hits) / static_cast<double>(train.size());

    Seq2SeqParams seq = base;
    AdamState adam(seq.tensors(), ac);
    for (const auto& p : train) online_update(seq, adam, p.src, p.tgt);
    row.exact_recall = recall(seq, vocab, data.training);
    row.probe_recall = recall(seq, vocab, data.probes);
    const auto div = candidate_diversity(seq, vocab, probe_prompts, decode);
    row.distinct1 = div.d1;
    row.distinct2 = div.d2;
    row.ppl_before = ppl_before;
    row.ppl_after = held_out_ppl(seq, held_out);
    report.rows.push_back(row);
  }
  return report;
}

ProbeReport interaction_sweep(const Seq2SeqParams& base, const Vocab& vocab,
                              const std::vector<InteractionRecord>& records,
                              std::span<const std::size_t> prefix_sizes,
                              std::span<const TextPair> probes, std::span<const TextPair> held_out_text,
                              std::optional<double> lr_override, const DecodeConfig& decode) {
  if (!std::is_sorted(prefix_sizes.begin(), prefix_sizes.end())) {
    throw std::invalid_argument("interaction_sweep: prefix sizes must be ascending");
  }
  for (auto n : prefix_sizes) {
    if (n > records.size()) {
      throw std::invalid_argument("interaction_sweep: prefix " + std::to_string(n) +
                                  " exceeds transcript length " + std::to_string(records.size()));
    }
  }
  std::map<std::string, std::string> trained;
  for (const auto& r : records) {
    if (r.updated()) trained[r.user_msg] = r.chosen_response;
  }
  std::vector<TextPair> trained_pairs;
  for (const auto& [prompt, response] : trained) trained_pairs.push_back({prompt, response});
  const auto held_out = encode_pairs(vocab, std::vector<TextPair>(held_out_text.begin(), held_out_text.end()));
  const auto prompts = prompts_of(probes.empty() ? std::span<const TextPair>(trained_pairs) : probes);

  ProbeReport report;
  report.sweep = "interactions";
  report.x_label = "interactions";
  report.baseline_rate = recall(base, vocab, trained_pairs);
  const double ppl_before = held_out_ppl(base, held_out);

  Seq2SeqParams params = base;
  AdamState adam(params.tensors(), AdamConfig{});
  std::size_t applied = 0;
  for (auto n : prefix_sizes) {
    for (; applied < n; ++applied) {
      const auto& r = records[applied];
      if (!r.updated()) continue;
      adam.config.lr = lr_override.value_or(r.lr);
      online_update(params, adam, vocab.encode(r.user_msg), vocab.encode(r.chosen_response));
    }
    ProbeRow row;
    row.x = static_cast<double>(n);
    row.exact_recall = recall(params, vocab, trained_pairs);
    row.one_shot_rate = row.exact_recall;
    row.probe_recall = recall(params, vocab, probes);
    const auto div = candidate_diversity(params, vocab, prompts, decode);
    row.distinct1 = div.d1;
    row.distinct2 = div.d2;
    row.ppl_before = ppl_before;
    row.ppl_after = held_out_ppl(params, held_out);
    report.rows.push_back(row);
  }
  return report;
}

ProbeReport diversity_sweep(const Seq2SeqParams& params, const Vocab& vocab,
                            std::span<const std::string> prompts, std::span<const double> lambdas,
                            const DecodeConfig& decode) {
  ProbeReport report;
  report.sweep = "diversity";
  report.x_label = "lambdaFirst";
  for (double lambda : lambdas) {
    DecodeConfig cfg = decode;
    cfg.lambda_first = lambda;
    const auto div = candidate_diversity(params, vocab, prompts, cfg);
    ProbeRow row;
    row.x = lambda;
    row.distinct1 = div.d1;
    row.distinct2 = div.d2;
    report.rows.push_back(row);
  }
  report.baseline_rate = 1.0 / static_cast<double>(decode.k);
  return report;
}

json to_json(const ProbeReport& report) {
  json rows = json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{report.x_label, r.x},
                    {"oneShotRate", r.one_shot_rate},
                    {"exactRecall", r.exact_recall},
                    {"probeRecall", r.probe_recall},
                    {"distinct1", r.distinct1},
                    {"distinct2", r.distinct2},
                    {"pplBefore", r.ppl_before},
                    {"pplAfter", r.ppl_after},
                    {"drift", r.drift()}});
  }
  return {{"sweep", report.sweep}, {"baselineRate", report.baseline_rate}, {"rows", std::move(rows)}};
}

std::string to_table(const ProbeReport& report) {
  const std::vector<std::string> header = {report.x_label, "one-shot", "recall", "probe-recall",
                                           "distinct-1", "distinct-2", "ppl-before", "ppl-after"};
  std::vector<std::vector<std::string>> cells = {header};
  for (const auto& r : report.rows) {
    cells.push_back({format_double(r.x), format_double(r.one_shot_rate), format_double(r.exact_recall),
                     format_double(r.probe_recall), format_double(r.distinct1),
                     format_double(r.distinct2), format_double(r.ppl_before),
                     format_double(r.ppl_after)});
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  const char* baseline = report.sweep == "diversity" ? "distinct-1 floor " : "baseline recall ";
  std::string out = report.sweep + " sweep (" + baseline + format_double(report.baseline_rate) + ")\n";
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += "  ";
      out += std::string(width[c] - row[c].size(), ' ') + row[c];
    }
    out += '\n';
  }
  return out;
}

}  // namespace nca
