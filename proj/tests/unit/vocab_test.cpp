// Copyright 2026 The NCA Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "nca/vocab.hpp"

namespace nca {
namespace {

using Tokens = std::vector<std::string>;

TEST(Tokenize, SplitsTrailingPunctuation) {
  EXPECT_EQ(tokenize("Hello my friend."), (Tokens{"hello", "my", "friend", "."}));
  EXPECT_EQ(tokenize("Why not?"), (Tokens{"why", "not", "?"}));
}

TEST(Tokenize, KeepsInteriorApostrophe) {
  EXPECT_EQ(tokenize("I don't know."), (Tokens{"i", "don't", "know", "."}));
}

TEST(Tokenize, LeadingPunctuationAndRuns) {
  EXPECT_EQ(tokenize("\"Wait...\" she said!"),
            (Tokens{"\"", "wait", ".", ".", ".", "\"", "she", "said", "!"}));
  EXPECT_EQ(tokenize("well\xE2\x80\xA6"), (Tokens{"well", "\xE2\x80\xA6"}));
}

TEST(Tokenize, EmptyAndWhitespace) {
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_TRUE(tokenize(" \t\n ").empty());
}

TEST(Tokenize, IdempotentOnJoinedOutput) {
  const std::vector<std::string> samples = {"Good idea, may I join you?", "I don't know.",
                                            "\"Quote\" me: now!", "a  b\tc", "...?!", "It's 5 o'clock; ok."};
  for (const auto& s : samples) {
    const auto once = tokenize(s);
    std::string joined;
    for (const auto& t : once) joined += (joined.empty() ? "" : " ") + t;
    EXPECT_EQ(tokenize(joined), once) << s;
  }
}

TEST(BuildVocab, MinFreqOne) {
  const Vocab v = build_vocab({{"a b", "a"}}, 1);
  ASSERT_EQ(v.size(), 6u);
  EXPECT_EQ(v.token(kPad), "<pad>");
  EXPECT_EQ(v.token(kSos), "<sos>");
  EXPECT_EQ(v.token(kEos), "<eos>");
  EXPECT_EQ(v.token(kUnk), "<unk>");
  EXPECT_EQ(v.token(4), "a");  // frequency 2 before frequency 1
  EXPECT_EQ(v.token(5), "b");
}

TEST(BuildVocab, MinFreqTwo) {
  const Vocab v = build_vocab({{"a b", "a"}}, 2);
  ASSERT_EQ(v.size(), 5u);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_FALSE(v.contains("b"));
  EXPECT_EQ(v.id("b"), kUnk);
}

TEST(BuildVocab, EmptyCorpusHasOnlySpecials) { EXPECT_EQ(build_vocab({}, 1).size(), kNumSpecials); }

TEST(BuildVocab, TiesBrokenAlphabetically) {
  const Vocab v = build_vocab({{"zeta beta", "alpha"}}, 1);
  EXPECT_EQ(v.tokens(), (Tokens{"<pad>", "<sos>", "<eos>", "<unk>", "alpha", "beta", "zeta"}));
}

TEST(BuildVocab, CapLimitsTotalSize) {
  const Vocab v = build_vocab({{"a a a b b c", "d"}}, 1, 6);
  EXPECT_EQ(v.size(), 6u);
  EXPECT_TRUE(v.contains("a"));
  EXPECT_TRUE(v.contains("b"));
  EXPECT_FALSE(v.contains("c"));
}

TEST(BuildVocab, IdsFormABijection) {
  const Vocab v = build_vocab({{"the cat sat on the mat .", "did it ?"}}, 1);
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.id(v.token(static_cast<TokenId>(i))), static_cast<TokenId>(i));
}

TEST(Vocab, EncodeDecodeRoundTrip) {
  const Vocab v = build_vocab({{"hello my friend .", "why not ?"}, {"i don't know .", "ok"}}, 1);
  for (const std::string s : {"hello my friend.", "why not?", "i don't know."}) {
    const auto ids = v.encode(s);
    for (auto id : ids) EXPECT_NE(id, kUnk);
    EXPECT_EQ(v.decode(ids), s);
    EXPECT_EQ(v.encode(v.decode(ids)), ids);
  }
}

TEST(Vocab, UnknownTokensMapToUnk) {
  const Vocab v = build_vocab({{"a", "b"}}, 1);
  EXPECT_EQ(v.encode("a zebra"), (TokenSeq{v.id("a"), kUnk}));
}

TEST(Vocab, DecodeStopsAtEos) {
  const Vocab v = build_vocab({{"yes", "no"}}, 1);
  EXPECT_EQ(v.decode({v.id("yes"), kEos, v.id("no")}), "yes");
}

TEST(Vocab, RejectsDuplicatesAndSpecials) {
  EXPECT_THROW(Vocab(Tokens{"a", "a"}), std::invalid_argument);
  EXPECT_THROW(Vocab(Tokens{"<eos>"}), std::invalid_argument);
  const Vocab v;
  EXPECT_THROW(v.token(4), std::invalid_argument);
}

}  // namespace
}  // namespace nca
