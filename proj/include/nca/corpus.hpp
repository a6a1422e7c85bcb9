// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "nca/vocab.hpp"

namespace nca {

enum class CorpusFormat { kJsonl, kTsv };

/// Picks the format from the file extension (.jsonl / .tsv).
CorpusFormat corpus_format_for(const std::filesystem::path& path);
CorpusFormat parse_corpus_format(std::string_view name);

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Corpus {
  std::vector<TextPair> pairs;
  std::size_t malformed = 0;  // unparseable lines, skipped
  std::size_t dropped = 0;    // parsed, but prompt or response tokenizes to nothing
};

/// jsonl: one object per line with string fields "prompt" and "response".
/// tsv: exactly two tab-separated columns, no quoting. Blank lines are
/// ignored. Throws CorpusError if the file cannot be read or more than half
/// of the non-blank lines are malformed.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);
Corpus parse_corpus(std::string_view text, CorpusFormat format);

/// FNV-1a 64 of the file bytes, as 16 hex digits.
std::string file_fingerprint(const std::filesystem::path& path);

}  // namespace nca
