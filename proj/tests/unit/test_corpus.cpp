#include <cstdlib>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "ncache/corpus.hpp"
#include "ncache/errors.hpp"
#include "ncache/vocabulary.hpp"

namespace ncache {
namespace {

std::vector<std::string> words(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

TEST(BuildVocab, EmptyInputHasOnlyReservedTokens) {
  const Vocabulary v = build_vocab({});
  EXPECT_EQ(v.size(), 2u);
  EXPECT_EQ(v.word(v.unk_id()), "<unk>");
  EXPECT_EQ(v.word(v.eos_id()), "<eos>");
  EXPECT_NE(v.unk_id(), v.eos_id());
}

TEST(BuildVocab, CountsAndOrdersByFrequency) {
  const auto tokens = words("a a b");
  VocabOptions opts;
  opts.max_size = 10;
  const Vocabulary v = build_vocab(tokens, opts);
  ASSERT_EQ(v.size(), 4u);
  EXPECT_EQ(v.word(2), "a");
  EXPECT_EQ(v.word(3), "b");
  EXPECT_EQ(v.count(2), 2u);
  EXPECT_EQ(v.count(3), 1u);
}

TEST(BuildVocab, TiesBrokenLexicographically) {
  const Vocabulary v = build_vocab(words("zeta alpha mid alpha zeta mid"));
  EXPECT_EQ(v.word(2), "alpha");
  EXPECT_EQ(v.word(3), "mid");
  EXPECT_EQ(v.word(4), "zeta");
}

TEST(BuildVocab, MaxSizeIncludesReservedTokens) {
  VocabOptions opts;
  opts.max_size = 3;
  const Vocabulary v = build_vocab(words("x x x y y z"), opts);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v.word(2), "x");
  EXPECT_EQ(v.id("y"), v.unk_id());
}

TEST(BuildVocab, MinCountDropsRareTokens) {
  VocabOptions opts;
  opts.min_count = 2;
  const Vocabulary v = build_vocab(words("x x y"), opts);
  EXPECT_EQ(v.size(), 3u);
  EXPECT_FALSE(v.find("y").has_value());
}

TEST(BuildVocab, LiteralReservedTokensFeedReservedCounts) {
  const Vocabulary v = build_vocab(words("<unk> a <unk> <eos>"));
  EXPECT_EQ(v.size(), 3u);
  EXPECT_EQ(v.count(v.unk_id()), 2u);
  EXPECT_EQ(v.count(v.eos_id()), 1u);
}

TEST(BuildVocab, RejectsMaxSizeBelowTwo) {
  VocabOptions opts;
  opts.max_size = 1;
  EXPECT_THROW(build_vocab(words("a"), opts), ConfigError);
}

TEST(Vocabulary, SaveLoadRoundTripIsExact) {
  const Vocabulary v = build_vocab(flatten_with_eos(tokenize_lines("the cat sat\nthe dog\n")));
  std::stringstream ss;
  v.save(ss);
  EXPECT_EQ(ss.str(), "<unk>\t0\n<eos>\t2\nthe\t2\ncat\t1\ndog\t1\nsat\t1\n");
  const Vocabulary back = Vocabulary::load(ss);
  EXPECT_EQ(back, v);
  EXPECT_EQ(back.content_hash(), v.content_hash());
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(back.id(v.word(static_cast<TokenId>(i))), static_cast<TokenId>(i));
  }
}

TEST(Vocabulary, LoadRejectsMalformedInput) {
  std::istringstream no_tab("<unk>\t0\n<eos>\t0\nword\n");
  EXPECT_THROW(Vocabulary::load(no_tab), IoError);
  std::istringstream no_reserved("a\t1\n");
  EXPECT_THROW(Vocabulary::load(no_reserved), IoError);
  std::istringstream dup("<unk>\t0\n<eos>\t0\na\t1\na\t2\n");
  EXPECT_THROW(Vocabulary::load(dup), IoError);
  std::istringstream bad_count("<unk>\tx\n<eos>\t0\n");
  EXPECT_THROW(Vocabulary::load(bad_count), IoError);
}

TEST(Encode, KnownTokensThenEos) {
  const Vocabulary v = Vocabulary::from_entries({{"<unk>", 0}, {"<eos>", 0}, {"a", 1}, {"b", 1}});
  const TokenStream s = encode(tokenize_lines("a b"), v);
  EXPECT_EQ(s.ids, (std::vector<TokenId>{2, 3, v.eos_id()}));
  EXPECT_EQ(s.vocab_hash, v.content_hash());
  EXPECT_EQ(s.eos_id, v.eos_id());
}

TEST(Encode, UnknownTokenMapsToUnk) {
  const Vocabulary v = Vocabulary::from_entries({{"<unk>", 0}, {"<eos>", 0}, {"a", 1}});
  EXPECT_EQ(encode(tokenize_lines("zzz"), v).ids, (std::vector<TokenId>{v.unk_id(), v.eos_id()}));
}

TEST(Encode, EmptyLineIsJustEos) {
  const Vocabulary v;
  EXPECT_EQ(encode({Line{}}, v).ids, (std::vector<TokenId>{v.eos_id()}));
}

TEST(Encode, RoundTripReplacesOutOfVocabularyTokens) {
  std::mt19937_64 rng(3);
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g", "h"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Line> lines(1 + rng() % 5);
    for (auto& l : lines) {
      const std::size_t n = rng() % 7;
      for (std::size_t i = 0; i < n; ++i) l.push_back(pool[rng() % pool.size()]);
    }
    VocabOptions opts;
    opts.max_size = 2 + rng() % 6;
    std::vector<Line> train(1, Line{});
    for (int i = 0; i < 20; ++i) train[0].push_back(pool[rng() % pool.size()]);
    const Vocabulary v = build_vocab(flatten_with_eos(train), opts);

    const TokenStream s = encode(lines, v);
    for (TokenId id : s.ids) ASSERT_TRUE(v.contains(id));
    auto expected = flatten_with_eos(lines);
    for (auto& w : expected) {
      if (!v.find(w)) w = std::string(Vocabulary::kUnknown);
    }
    EXPECT_EQ(decode(s, v), expected);
  }
}

TokenStream iota_stream(std::size_t n) {
  TokenStream s;
  for (std::size_t i = 0; i < n; ++i) s.ids.push_back(static_cast<TokenId>(i));
  return s;
}

TEST(MakeBatches, SingleLaneSingleSegment) {
  const auto b = make_batches(iota_stream(21), 1, 20);
  ASSERT_EQ(b.segments.size(), 1u);
  for (std::size_t t = 0; t < 20; ++t) {
    EXPECT_EQ(b.segments[0].inputs(0, t), static_cast<TokenId>(t));
    EXPECT_EQ(b.segments[0].targets(0, t), static_cast<TokenId>(t + 1));
  }
}

TEST(MakeBatches, TwoLanesDropRemainder) {
  // Chunks [0..4] and [5..9]; two 2-step segments per lane.
  const auto b = make_batches(iota_stream(10), 2, 2);
  ASSERT_EQ(b.segments.size(), 2u);
  EXPECT_EQ(b.segments[0].inputs(0, 0), 0);
  EXPECT_EQ(b.segments[0].inputs(0, 1), 1);
  EXPECT_EQ(b.segments[0].inputs(1, 0), 5);
  EXPECT_EQ(b.segments[1].inputs(0, 0), 2);
  EXPECT_EQ(b.segments[1].targets(0, 1), 4);
  EXPECT_EQ(b.segments[1].inputs(1, 1), 8);
  EXPECT_EQ(b.segments[1].targets(1, 1), 9);
}

TEST(MakeBatches, UnitUnrollGivesNextTokenPairs) {
  const auto b = make_batches(iota_stream(6), 1, 1);
  ASSERT_EQ(b.segments.size(), 5u);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(b.segments[k].inputs(0, 0), static_cast<TokenId>(k));
    EXPECT_EQ(b.segments[k].targets(0, 0), static_cast<TokenId>(k + 1));
  }
}

TEST(MakeBatches, TooShortStreamIsASizingError) {
  EXPECT_THROW(make_batches(iota_stream(20), 1, 20), SizingError);
  EXPECT_THROW(make_batches(iota_stream(5), 2, 2), SizingError);
  EXPECT_THROW(make_batches(iota_stream(5), 0, 2), ConfigError);
}

TEST(MakeBatches, PairsAreAdjacentPairsOfEachLaneChunk) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t lanes = 1 + rng() % 4;
    const std::size_t unroll = 1 + rng() % 6;
    const std::size_t n = lanes * (unroll + 1) + rng() % 60;
    TokenStream s;
    for (std::size_t i = 0; i < n; ++i) s.ids.push_back(static_cast<TokenId>(rng() % 9));
    const auto b = make_batches(s, lanes, unroll);
    const std::size_t chunk = n / lanes;
    const std::size_t used = b.segments.size() * unroll;
    ASSERT_LE(used + 1, chunk);
    for (std::size_t lane = 0; lane < lanes; ++lane) {
      std::multiset<std::pair<TokenId, TokenId>> got, want;
      std::size_t pos = lane * chunk;
      for (const auto& seg : b.segments) {
        for (std::size_t t = 0; t < unroll; ++t) {
          // Contiguity: inputs walk the chunk in order.
          ASSERT_EQ(seg.inputs(lane, t), s.ids[pos]);
          ++pos;
          got.emplace(seg.inputs(lane, t), seg.targets(lane, t));
        }
      }
      for (std::size_t i = lane * chunk; i < lane * chunk + used; ++i) want.emplace(s.ids[i], s.ids[i + 1]);
      EXPECT_EQ(got, want);
    }
  }
}

// Runs only when a Penn Tree Bank copy is available locally.
TEST(BuildVocab, PennTreeBankHasTenThousandTypes) {
  const char* dir = std::getenv("NCACHE_PTB_DIR");
  if (dir == nullptr) GTEST_SKIP() << "set NCACHE_PTB_DIR to a directory holding ptb.train.txt";
  const auto path = std::filesystem::path(dir) / "ptb.train.txt";
  if (!std::filesystem::exists(path)) GTEST_SKIP() << path << " not found";
  const Vocabulary v = build_vocab(flatten_with_eos(read_corpus(path.string())));
  EXPECT_EQ(v.size(), 10000u);
}

}  // namespace
}  // namespace ncache
