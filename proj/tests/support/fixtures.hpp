// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "nca/corpus.hpp"
#include "nca/model.hpp"
#include "nca/session.hpp"
#include "nca/trainer.hpp"
#include "nca/vocab.hpp"

#ifndef NCA_DATA_DIR
#define NCA_DATA_DIR "data"
#endif

namespace nca::testing {

inline std::filesystem::path data_path(const std::string& name) {
  return std::filesystem::path(NCA_DATA_DIR) / name;
}

/// Removed with its contents on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("nca-test-" + std::to_string(rd()) + "-" + std::to_string(counter++));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream(p, std::ios::binary) << text;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

/// Deterministic timestamps: 2026-01-01T00:00:00.000Z, then +1 s per call.
inline Session::Clock fixed_clock() {
  auto n = std::make_shared<int>(0);
  return [n] {
    char buf[32];
    const int s = (*n)++;
    std::snprintf(buf, sizeof(buf), "2026-01-01T%02d:%02d:%02d.000Z", s / 3600 % 24, s / 60 % 60, s % 60);
    return std::string(buf);
  };
}

struct ToyModel {
  std::shared_ptr<const Vocab> vocab;
  Seq2SeqParams params;
  std::vector<TextPair> pairs;
};

/// The shipped toy corpus, trained briefly. V is about 50.
inline ToyModel toy_model(std::uint64_t seed, std::size_t hidden = 32, std::size_t epochs = 40,
                          double lr = 0.01) {
  ToyModel m;
  m.pairs = load_corpus(data_path("toy.jsonl"), CorpusFormat::kJsonl).pairs;
  m.vocab = std::make_shared<const Vocab>(build_vocab(m.pairs, 1));
  ModelConfig cfg{m.vocab->size(), 16, hidden, 8};
  m.params = Seq2SeqParams::random(cfg, seed);
  const auto enc = encode_pairs(*m.vocab, m.pairs);
  AdamConfig ac;
  ac.lr = lr;
  AdamState adam(m.params.tensors(), ac);
  for (std::size_t e = 0; e < epochs; ++e) train_epoch(m.params, enc, 10, adam, derive_seed(seed, e));
  return m;
}

/// Random prompt/response pairs over the non-special vocabulary: prompts
/// of 2-3 tokens, responses of 1-`max_tgt` tokens.
inline std::vector<EncodedPair> random_pairs(const Vocab& vocab, std::size_t n, std::uint64_t seed,
                                             std::size_t max_tgt = 4) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<TokenId> tok(static_cast<TokenId>(kNumSpecials), static_cast<TokenId>(vocab.size() - 1));
  std::uniform_int_distribution<std::size_t> src_len(2, 3), tgt_len(1, max_tgt);
  std::vector<EncodedPair> out;
  for (std::size_t i = 0; i < n; ++i) {
    EncodedPair p;
    for (std::size_t k = src_len(rng); k > 0; --k) p.src.push_back(tok(rng));
    for (std::size_t k = tgt_len(rng); k > 0; --k) p.tgt.push_back(tok(rng));
    out.push_back(std::move(p));
  }
  return out;
}

}  // namespace nca::testing
