// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include "nca/corpus.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>

#include "json.hpp"

namespace nca {
namespace {

std::optional<TextPair> parse_jsonl_line(std::string_view line) {
  auto j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (!j.is_object()) return std::nullopt;
  auto p = j.find("prompt");
  auto r = j.find("response");
  if (p == j.end() || r == j.end() || !p->is_string() || !r->is_string()) return std::nullopt;
  return TextPair{p->get<std::string>(), r->get<std::string>()};
}

std::optional<TextPair> parse_tsv_line(std::string_view line) {
  const auto tab = line.find('\t');
  if (tab == std::string_view::npos) return std::nullopt;
  if (line.find('\t', tab + 1) != std::string_view::npos) return std::nullopt;
  return TextPair{std::string(line.substr(0, tab)), std::string(line.substr(tab + 1))};
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorpusError("cannot read corpus file " + path.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

CorpusFormat corpus_format_for(const std::filesystem::path& path) {
  const auto ext = path.extension().string();
  if (ext == ".tsv") return CorpusFormat::kTsv;
  return CorpusFormat::kJsonl;
}

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "tsv") return CorpusFormat::kTsv;
  throw std::invalid_argument("corpus format must be jsonl or tsv, got '" + std::string(name) + "'");
}

Corpus parse_corpus(std::string_view text, CorpusFormat format) {
  Corpus corpus;
  std::size_t lines = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (is_blank(line)) continue;
    ++lines;
    auto pair = format == CorpusFormat::kJsonl ? parse_jsonl_line(line) : parse_tsv_line(line);
    if (!pair) {
      ++corpus.malformed;
      continue;
    }
    if (tokenize(pair->prompt).empty() || tokenize(pair->response).empty()) {
      ++corpus.dropped;
      continue;
    }
    corpus.pairs.push_back(std::move(*pair));
  }
  if (lines > 0 && 2 * corpus.malformed > lines) {
    throw CorpusError(std::to_string(corpus.malformed) + " of " + std::to_string(lines) +
                      " lines are malformed; wrong format?");
  }
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  auto corpus = parse_corpus(read_file(path), format);
  if (corpus.malformed > 0 || corpus.dropped > 0) {
    std::fprintf(stderr, "warning: %s: skipped %zu malformed line(s), dropped %zu empty pair(s)\n",
                 path.string().c_str(), corpus.malformed, corpus.dropped);
  }
  return corpus;
}

std::string file_fingerprint(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace nca
