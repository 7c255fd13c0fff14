#include <gtest/gtest.h>

#include <map>

#include "segrefine/baseline.hpp"
#include "segrefine/evaluator.hpp"
#include "segrefine/synth.hpp"
#include "test_util.hpp"

using namespace segrefine;
using testutil::S;

TEST(Generate, ZeroSentences) { EXPECT_TRUE(generate(SynthSpec{}, 0).empty()); }

TEST(Generate, DeterministicPerSeed) {
  SynthSpec spec;
  spec.seed = 42;
  EXPECT_EQ(generate(spec, 200), generate(spec, 200));
  SynthSpec other = spec;
  other.seed = 43;
  EXPECT_NE(generate(spec, 200), generate(other, 200));
}

TEST(Generate, TopWordFrequencyFollowsZipfNormalization) {
  SynthSpec spec;
  spec.vocab_size = 500;
  spec.zipf_exponent = 1.1;
  spec.seed = 1;
  const auto corpus = generate(spec, 10000);
  std::map<Text, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& s : corpus) {
    for (const auto& w : s.words()) {
      ++counts[w];
      ++total;
    }
  }
  std::size_t top = 0;
  for (const auto& [w, c] : counts) top = std::max(top, c);
  double harmonic = 0.0;
  for (int r = 1; r <= 500; ++r) harmonic += 1.0 / std::pow(double(r), 1.1);
  const double expected = 1.0 / harmonic;
  EXPECT_NEAR(double(top) / double(total), expected, 0.1 * expected);
}

TEST(Generate, WordsAreWholeAtomsAndVocabularyIsBounded) {
  SynthSpec spec;
  spec.vocab_size = 100;
  const auto corpus = generate(spec, 500);
  const AtomizerConfig cfg;
  std::set<Text> vocab;
  for (const auto& s : corpus) {
    EXPECT_NO_THROW(gold_tags(s, atomize(s.text(), cfg)));
    for (const auto& w : s.words()) {
      EXPECT_EQ(w.back(), kTsheg);
      vocab.insert(w);
    }
    EXPECT_GE(s.size(), 4u);
    EXPECT_LE(s.size(), 16u);
  }
  EXPECT_LE(vocab.size(), 100u);
}

TEST(Generate, AtomInventoryAndVocabularyAreUnique) {
  SynthSpec spec;
  Rng rng(1);
  const auto atoms = synth_atoms(spec, rng);
  EXPECT_EQ(atoms.size(), spec.n_atoms_alphabet);
  EXPECT_EQ(std::set<Text>(atoms.begin(), atoms.end()).size(), atoms.size());
  const auto words = synth_vocabulary(spec, atoms, rng);
  EXPECT_EQ(words.size(), spec.vocab_size);
  EXPECT_EQ(std::set<Text>(words.begin(), words.end()).size(), words.size());
}

TEST(SynthSpec, RejectsInvalidSpecs) {
  SynthSpec spec;
  spec.word_len_weights = {0, 0};
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = SynthSpec{};
  spec.n_atoms_alphabet = 2;
  spec.word_len_weights = {1};
  spec.vocab_size = 3;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = SynthSpec{};
  spec.sentence_len_weights = {-1, 2};
  EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Corrupt, ZeroRatesAreIdentity) {
  Rng rng(1);
  for (const auto& s : generate(SynthSpec{}, 100)) EXPECT_EQ(corrupt(s, 0.0, 0.0, rng), s);
}

TEST(Corrupt, FullMergeJoinsSentence) {
  Rng rng(1);
  for (const auto& s : generate(SynthSpec{}, 50)) {
    const auto c = corrupt(s, 1.0, 0.0, rng);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c.words()[0], s.text());
  }
}

TEST(Corrupt, PreservesTextAndAtomAlignment) {
  Rng rng(2);
  const AtomizerConfig cfg;
  for (const auto& s : generate(SynthSpec{}, 300)) {
    const auto c = corrupt(s, 0.3, 0.3, rng);
    EXPECT_EQ(c.text(), s.text());
    EXPECT_NO_THROW(gold_tags(c, atomize(c.text(), cfg)));
  }
}

TEST(Corrupt, DefaultRatesLandInBaselineWindow) {
  SynthSpec spec;
  spec.seed = 1;
  const auto gold = generate(spec, 1000);
  Rng rng(1);
  std::vector<SegmentedSentence> noisy;
  for (const auto& s : gold) noisy.push_back(corrupt(s, 0.1, 0.1, rng));
  const double f = evaluate(gold, noisy, {}).f_score;
  EXPECT_GE(f, 0.80);
  EXPECT_LE(f, 0.93);
}

TEST(Corrupt, FScoreFallsWithMergeRate) {
  const auto gold = generate(SynthSpec{}, 300);
  const std::vector<double> rates = {0.0, 0.1, 0.2, 0.4, 0.8};
  std::vector<double> mean_f(rates.size(), 0.0);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    for (std::size_t k = 0; k < rates.size(); ++k) {
      Rng rng(seed);
      std::vector<SegmentedSentence> noisy;
      for (const auto& s : gold) noisy.push_back(corrupt(s, rates[k], 0.05, rng));
      mean_f[k] += evaluate(gold, noisy, {}).f_score / 10.0;
    }
  }
  for (std::size_t k = 1; k < rates.size(); ++k) EXPECT_LE(mean_f[k], mean_f[k - 1]);
}

TEST(Corrupt, RejectsBadRatesAndMisalignedGold) {
  Rng rng(1);
  EXPECT_THROW(corrupt(S("ཀ་ཁ་"), -0.1, 0.0, rng), ConfigError);
  EXPECT_THROW(corrupt(S("ཀ་ཁ་"), 0.0, 1.5, rng), ConfigError);
  EXPECT_THROW(corrupt(S("ཀ ་ཁ་"), 0.0, 0.0, rng), AtomMisalignment);
}
