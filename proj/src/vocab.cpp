// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/vocab.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <map>
#include <stdexcept>

namespace nca {
namespace {

constexpr std::array<std::string_view, 8> kPunctuation = {
    ".", ",", "!", "?", ";", ":", "\"", "\xE2\x80\xA6" /* U+2026 */};

const std::array<std::string, kNumSpecials> kSpecialTokens = {"<pad>", "<sos>", "<eos>", "<unk>"};

std::string_view leading_punct(std::string_view s) {
  for (auto p : kPunctuation) {
    if (s.starts_with(p)) return p;
  }
  return {};
}

std::string_view trailing_punct(std::string_view s) {
  for (auto p : kPunctuation) {
    if (s.ends_with(p)) return p;
  }
  return {};
}

bool is_punct_token(std::string_view s) {
  return std::find(kPunctuation.begin(), kPunctuation.end(), s) != kPunctuation.end();
}

void split_chunk(std::string_view chunk, std::vector<std::string>& out) {
  while (!chunk.empty()) {
    auto p = leading_punct(chunk);
    if (p.empty()) break;
    out.emplace_back(p);
    chunk.remove_prefix(p.size());
  }
  std::vector<std::string> tail;
  while (!chunk.empty()) {
    auto p = trailing_punct(chunk);
    if (p.empty()) break;
    tail.emplace_back(p);
    chunk.remove_suffix(p.size());
  }
  if (!chunk.empty()) out.emplace_back(chunk);
  out.insert(out.end(), tail.rbegin(), tail.rend());
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::string lowered(text);
  for (auto& ch : lowered) {
    const auto u = static_cast<unsigned char>(ch);
    if (u < 0x80) ch = static_cast<char>(std::tolower(u));
  }
  std::vector<std::string> out;
  std::size_t i = 0;
  const std::string_view s = lowered;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    std::size_t j = i;
    while (j < s.size() && !std::isspace(static_cast<unsigned char>(s[j]))) ++j;
    if (j > i) split_chunk(s.substr(i, j - i), out);
    i = j;
  }
  return out;
}

std::string detokenize(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) {
    if (!out.empty() && !is_punct_token(t)) out += ' ';
    out += t;
  }
  return out;
}

Vocab::Vocab() : Vocab(std::vector<std::string>{}) {}

Vocab::Vocab(const std::vector<std::string>& words) {
  id_to_token_.reserve(kNumSpecials + words.size());
  id_to_token_.assign(kSpecialTokens.begin(), kSpecialTokens.end());
  id_to_token_.insert(id_to_token_.end(), words.begin(), words.end());
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    auto [_, inserted] = token_to_id_.emplace(id_to_token_[i], static_cast<TokenId>(i));
    if (!inserted) throw std::invalid_argument("duplicate vocabulary token '" + id_to_token_[i] + "'");
  }
}

TokenId Vocab::id(std::string_view token) const {
  auto it = token_to_id_.find(std::string(token));
  return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocab::contains(std::string_view token) const {
  return token_to_id_.contains(std::string(token));
}

const std::string& Vocab::token(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= size()) {
    throw std::invalid_argument("token id " + std::to_string(id) + " out of range");
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

TokenSeq Vocab::encode_tokens(const std::vector<std::string>& tokens) const {
  TokenSeq ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id(t));
  return ids;
}

TokenSeq Vocab::encode(std::string_view text) const { return encode_tokens(tokenize(text)); }

std::vector<std::string> Vocab::decode_tokens(const TokenSeq& ids) const {
  std::vector<std::string> out;
  for (auto id : ids) {
    if (id == kEos) break;
    out.push_back(token(id));
  }
  return out;
}

std::string Vocab::decode(const TokenSeq& ids) const { return detokenize(decode_tokens(ids)); }

Vocab build_vocab(const std::vector<TextPair>& corpus, std::size_t min_freq, std::size_t max_size) {
  if (min_freq < 1) throw std::invalid_argument("min_freq must be >= 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& pair : corpus) {
    for (const auto* text : {&pair.prompt, &pair.response}) {
      for (auto& t : tokenize(*text)) ++counts[t];
    }
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, n] : counts) {
    const bool special =
        std::find(kSpecialTokens.begin(), kSpecialTokens.end(), token) != kSpecialTokens.end();
    if (n >= min_freq && !special) kept.emplace_back(token, n);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t room = max_size > kNumSpecials ? max_size - kNumSpecials : 0;
  if (kept.size() > room) kept.resize(room);
  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [token, _] : kept) words.push_back(token);
  return Vocab(words);
}

}  // namespace nca
