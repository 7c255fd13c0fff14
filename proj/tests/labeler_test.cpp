#include <gtest/gtest.h>

#include <set>

#include "segrefine/decoder.hpp"
#include "segrefine/labeler.hpp"
#include "segrefine/synth.hpp"
#include "candidates.hpp"
#include "test_util.hpp"

using namespace segrefine;
using testutil::S;
using testutil::T;
using L = LabelTag;
using testutil::corrupt_edges;
using testutil::over_segment;

namespace {

std::vector<SegmentedSentence> synthetic(std::size_t n, std::uint64_t seed) {
  SynthSpec spec;
  spec.vocab_size = 80;
  spec.seed = seed;
  return generate(spec, n);
}

}  // namespace

TEST(LabelTag, NamesRoundTrip) {
  EXPECT_EQ(serialize_labels({L::B, L::M, L::E, L::S, L::XB, L::XM, L::XE}), "B M E S -B -M -E");
  EXPECT_EQ(parse_labels("B M E S -B -M -E"), (std::vector<L>{L::B, L::M, L::E, L::S, L::XB, L::XM, L::XE}));
  EXPECT_THROW(parse_labels("B X"), FormatError);
  EXPECT_EQ(kNumLabels, 7u);
}

TEST(LabelTag, Automaton) {
  EXPECT_TRUE(is_valid_label_sequence({L::B, L::M, L::E, L::XB, L::XE, L::S}));
  EXPECT_FALSE(is_valid_label_sequence({L::B, L::XE}));
  EXPECT_FALSE(is_valid_label_sequence({L::XB, L::E}));
  EXPECT_FALSE(is_valid_label_sequence({L::M, L::E}));
  EXPECT_FALSE(is_valid_label_sequence({L::B, L::M}));
  EXPECT_FALSE(is_valid_label_sequence({}));
}

TEST(AlignLabels, OverSegmentedSecondWord) {
  const auto ls = align_labels(testutil::pieces({"ab", "c", "d"}), S("ab cd"));
  EXPECT_EQ(ls.labels, (std::vector<L>{L::S, L::B, L::E}));
}

TEST(AlignLabels, MisalignedSpanBecomesVirtualWord) {
  const auto ls = align_labels(testutil::pieces({"a", "bc", "d"}), S("ab cd"));
  EXPECT_EQ(ls.labels, (std::vector<L>{L::XB, L::XM, L::XE}));
}

TEST(AlignLabels, IdentityIsAllS) {
  const auto ls = align_labels(testutil::pieces({"ab", "c", "def"}), S("ab c def"));
  EXPECT_EQ(ls.labels, (std::vector<L>{L::S, L::S, L::S}));
}

TEST(AlignLabels, SingleTokenCoveringTwoWordsIsS) {
  const auto ls = align_labels(testutil::pieces({"abcd", "e"}), S("ab cd e"));
  EXPECT_EQ(ls.labels, (std::vector<L>{L::S, L::S}));
}

TEST(AlignLabels, RepeatedWordsUseOffsets) {
  // both halves are "ab"; only offsets decide which span is a word
  const auto ls = align_labels(testutil::pieces({"a", "b", "ab"}), S("ab ab"));
  EXPECT_EQ(ls.labels, (std::vector<L>{L::B, L::E, L::S}));
}

TEST(AlignLabels, TextMismatch) {
  EXPECT_THROW(align_labels(testutil::pieces({"ab", "x"}), S("ab c")), TextMismatch);
}

TEST(AlignLabels, OutputIsAlwaysValid) {
  Rng rng(71);
  for (const auto& gold : synthetic(300, 3)) {
    const auto ls = align_labels(corrupt_edges(gold, rng), gold);
    EXPECT_EQ(ls.labels.size(), ls.tokens.size());
    EXPECT_TRUE(is_valid_label_sequence(ls.labels)) << serialize_labels(ls.labels);
  }
}

TEST(AlignLabels, DecodeInvertsOverSegmentation) {
  Rng rng(73);
  for (const auto& gold : synthetic(500, 5)) {
    const auto cand = over_segment(gold, rng, 0.3);
    const auto ls = align_labels(cand, gold);
    EXPECT_EQ(decode(ls.tokens, ls.labels), gold);
    for (L l : ls.labels) EXPECT_TRUE(l == L::B || l == L::M || l == L::E || l == L::S);
  }
}

TEST(AlignLabels, SpansAreMinimalAndGoldAligned) {
  Rng rng(79);
  for (const auto& gold : synthetic(500, 7)) {
    const auto cand = corrupt_edges(gold, rng);
    const auto ls = align_labels(cand, gold);
    const auto gb = gold.boundaries();
    const std::set<std::size_t> gset(gb.begin(), gb.end());
    std::size_t span_start = 0, first = 0;
    for (std::size_t i = 0; i < ls.labels.size(); ++i) {
      if (!closes_word(ls.labels[i])) continue;
      const std::size_t span_end = cand.tokens[i].end;
      EXPECT_TRUE(gset.count(span_start));
      EXPECT_TRUE(gset.count(span_end));
      for (std::size_t k = first; k < i; ++k) EXPECT_FALSE(gset.count(cand.tokens[k].end));
      std::size_t inner = 0;
      for (std::size_t o = span_start + 1; o < span_end; ++o) inner += gset.count(o);
      const bool minus = ls.labels[i] == L::XE;
      EXPECT_EQ(minus, inner > 0 && i > first);
      span_start = span_end;
      first = i + 1;
    }
  }
}

TEST(MakeTrainingPair, CorrectBaselineGivesPlainLabels) {
  const auto gold = S("ab cd e");
  const auto ls = make_training_pair(gold, gold, BpeModel{});
  EXPECT_EQ(ls.labels, (std::vector<L>{L::B, L::E, L::B, L::E, L::S}));
  EXPECT_EQ(decode(ls.tokens, ls.labels), gold);
}

TEST(MakeTrainingPair, MergedUnsplitTokenIsS) {
  BpeModel m;
  m.merges = {{T("a"), T("b")}, {T("ab"), T("c")}, {T("abc"), T("d</w>")}};
  const auto ls = make_training_pair(S("ab cd"), S("abcd"), m);
  ASSERT_EQ(ls.tokens.size(), 1u);
  EXPECT_EQ(ls.labels, (std::vector<L>{L::S}));
}

TEST(MakeTrainingPair, ShapesAgreeOnSyntheticCorruption) {
  const auto gold = synthetic(200, 9);
  Rng rng(83);
  SubwordSegmenter seg(learn_bpe(word_frequencies(gold), 50));
  std::vector<std::string> token_rows, label_rows;
  for (const auto& g : gold) {
    const auto ls = make_training_pair(g, corrupt(g, 0.2, 0.2, rng), seg);
    ASSERT_EQ(ls.labels.size(), ls.tokens.size());
    token_rows.push_back(serialize_pieces(ls.tokens));
    label_rows.push_back(serialize_labels(ls.labels));
  }
  EXPECT_EQ(token_rows.size(), label_rows.size());
}

TEST(MakeTrainingPair, TextMismatch) { EXPECT_THROW(make_training_pair(S("ab"), S("ac"), BpeModel{}), TextMismatch); }

TEST(LabelCorpus, ReadReportsLine) {
  testutil::TempDir dir("labels");
  testutil::spit(dir / "l.txt", "B E S\nS Q\n");
  try {
    read_label_corpus(dir / "l.txt");
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("l.txt:2:"), std::string::npos) << e.what();
  }
}
