#ifndef SEGREFINE_SYNTH_HPP
#define SEGREFINE_SYNTH_HPP

// Synthetic segmented corpora over a Tibetan-like syllable inventory, and a
// boundary corruptor that imitates a noisy baseline segmenter.

#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "segrefine/atomizer.hpp"
#include "segrefine/corpus.hpp"
#include "segrefine/error.hpp"
#include "segrefine/rng.hpp"

namespace segrefine {

struct SynthSpec {
  std::size_t n_atoms_alphabet = 120;
  std::size_t vocab_size = 500;
  std::vector<double> word_len_weights = {0.72, 0.2, 0.06, 0.02};  // 1..4 atoms
  double zipf_exponent = 1.1;
  std::vector<double> sentence_len_weights = {0, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};  // 1..16 words
  std::uint64_t seed = 1;

  void validate() const {
    if (n_atoms_alphabet < 2) throw ConfigError("n_atoms_alphabet must be >= 2");
    if (n_atoms_alphabet > 40 * 5) throw ConfigError("n_atoms_alphabet must be <= 200");
    if (vocab_size < 1) throw ConfigError("vocab_size must be >= 1");
    auto check = [](const std::vector<double>& w, const char* what) {
      double sum = 0.0;
      for (double x : w) {
        if (!(x >= 0.0) || !std::isfinite(x)) throw ConfigError(std::string(what) + " weights must be finite and >= 0");
        sum += x;
      }
      if (w.empty() || sum <= 0.0) throw ConfigError(std::string(what) + " weights must have positive mass");
    };
    check(word_len_weights, "word length");
    check(sentence_len_weights, "sentence length");
    if (word_len_weights.size() > 4) throw ConfigError("word lengths are limited to 1..4 atoms");
    if (!(zipf_exponent >= 0.0)) throw ConfigError("zipf_exponent must be >= 0");
    // Distinct words available for the allowed lengths.
    double capacity = 0.0;
    for (std::size_t k = 0; k < word_len_weights.size(); ++k) {
      if (word_len_weights[k] > 0) capacity += std::pow(double(n_atoms_alphabet), double(k + 1));
    }
    if (capacity < double(vocab_size)) throw ConfigError("vocab_size exceeds the number of distinct words");
  }
};

/// Syllable inventory: consonant, optional vowel sign, tsheg.
inline std::vector<Text> synth_atoms(const SynthSpec& spec, Rng& rng) {
  static constexpr char32_t kVowels[] = {0, U'\u0F72', U'\u0F74', U'\u0F7A', U'\u0F7C'};
  std::vector<char32_t> consonants;
  for (char32_t c = U'\u0F40'; c <= U'\u0F68'; ++c) {
    if (c != U'\u0F48') consonants.push_back(c);
  }
  std::set<Text> seen;
  std::vector<Text> atoms;
  while (atoms.size() < spec.n_atoms_alphabet) {
    Text a(1, consonants[uniform_index(rng, consonants.size())]);
    const char32_t v = kVowels[uniform_index(rng, 5)];
    if (v) a.push_back(v);
    a.push_back(kTsheg);
    if (seen.insert(a).second) atoms.push_back(std::move(a));
  }
  return atoms;
}

/// Unique words in Zipf rank order (index 0 most frequent).
inline std::vector<Text> synth_vocabulary(const SynthSpec& spec, const std::vector<Text>& atoms, Rng& rng) {
  const Categorical len_dist(spec.word_len_weights);
  std::set<Text> seen;
  std::vector<Text> words;
  while (words.size() < spec.vocab_size) {
    const std::size_t n = len_dist(rng) + 1;
    Text w;
    for (std::size_t i = 0; i < n; ++i) w += atoms[uniform_index(rng, atoms.size())];
    if (seen.insert(w).second) words.push_back(std::move(w));
  }
  return words;
}

inline std::vector<double> zipf_weights(std::size_t n, double exponent) {
  std::vector<double> w(n);
  for (std::size_t r = 0; r < n; ++r) w[r] = 1.0 / std::pow(double(r + 1), exponent);
  return w;
}

/// Corpus of `n_sentences`, deterministic in spec.seed.
inline std::vector<SegmentedSentence> generate(const SynthSpec& spec, std::size_t n_sentences) {
  spec.validate();
  Rng rng(spec.seed);
  const auto atoms = synth_atoms(spec, rng);
  const auto vocab = synth_vocabulary(spec, atoms, rng);
  const Categorical word_dist(zipf_weights(vocab.size(), spec.zipf_exponent));
  const Categorical sent_dist(spec.sentence_len_weights);
  std::vector<SegmentedSentence> out;
  out.reserve(n_sentences);
  for (std::size_t s = 0; s < n_sentences; ++s) {
    const std::size_t len = sent_dist(rng) + 1;
    std::vector<Text> words;
    words.reserve(len);
    for (std::size_t i = 0; i < len; ++i) words.push_back(vocab[word_dist(rng)]);
    out.emplace_back(std::move(words));
  }
  return out;
}

/// Deletes each internal word boundary with p_merge and inserts a boundary
/// at each internal non-word atom edge with p_split. Text is unchanged.
inline SegmentedSentence corrupt(const SegmentedSentence& gold, double p_merge, double p_split, Rng& rng,
                                 const AtomizerConfig& cfg = {}) {
  if (!(p_merge >= 0.0 && p_merge <= 1.0) || !(p_split >= 0.0 && p_split <= 1.0)) {
    throw ConfigError("corruption rates must lie in [0, 1]");
  }
  const Text text = gold.text();
  const auto atoms = atomize(text, cfg);
  const auto bounds = gold.boundaries();
  std::vector<bool> is_word_edge(text.size() + 1, false);
  for (auto b : bounds) is_word_edge[b] = true;
  std::vector<bool> is_atom_edge(text.size() + 1, false);
  is_atom_edge[0] = true;
  for (const auto& a : atoms) is_atom_edge[a.end] = true;
  for (auto b : bounds) {
    if (!is_atom_edge[b]) throw AtomMisalignment("word boundary falls inside an atom");
  }

  std::vector<Text> words;
  std::size_t start = 0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) {
    const std::size_t edge = atoms[i].end;
    const bool cut = is_word_edge[edge] ? !bernoulli(rng, p_merge) : bernoulli(rng, p_split);
    if (cut) {
      words.push_back(text.substr(start, edge - start));
      start = edge;
    }
  }
  words.push_back(text.substr(start));
  return SegmentedSentence(std::move(words));
}

}  // namespace segrefine

#endif  // SEGREFINE_SYNTH_HPP
