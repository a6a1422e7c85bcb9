// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "nca/nn.hpp"

namespace nca {

using TokenSeq = std::vector<TokenId>;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kSos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr std::size_t kNumSpecials = 4;

/// Lowercases ASCII, splits on whitespace and peels leading/trailing
/// punctuation (. , ! ? ; : " and the ellipsis character) off each chunk as
/// single-character tokens. Apostrophes inside words stay attached.
std::vector<std::string> tokenize(std::string_view text);

/// Joins tokens with spaces, attaching punctuation tokens to the preceding
/// token. tokenize(detokenize(t)) == t for any output of tokenize.
std::string detokenize(const std::vector<std::string>& tokens);

class Vocab {
 public:
  /// Vocabulary holding only the four special tokens.
  Vocab();
  /// Specials are prepended; `words` must not contain duplicates or specials.
  explicit Vocab(const std::vector<std::string>& words);

  std::size_t size() const { return id_to_token_.size(); }
  TokenId id(std::string_view token) const;  // kUnk when absent
  bool contains(std::string_view token) const;
  const std::string& token(TokenId id) const;
  const std::vector<std::string>& tokens() const { return id_to_token_; }

  /// Tokenizes and maps to ids; unknown tokens become kUnk.
  TokenSeq encode(std::string_view text) const;
  TokenSeq encode_tokens(const std::vector<std::string>& tokens) const;
  /// Maps ids back to text, stopping at the first kEos.
  std::string decode(const TokenSeq& ids) const;
  std::vector<std::string> decode_tokens(const TokenSeq& ids) const;

  friend bool operator==(const Vocab& a, const Vocab& b) {
    return a.id_to_token_ == b.id_to_token_;
  }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

struct TextPair {
  std::string prompt;
  std::string response;
};

/// Tokens with frequency >= min_freq across prompts and responses, ordered by
/// (frequency desc, token asc), truncated to max_size entries in total.
Vocab build_vocab(const std::vector<TextPair>& corpus, std::size_t min_freq,
                  std::size_t max_size = 8000);

}  // namespace nca
