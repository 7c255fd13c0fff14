#ifndef SEGREFINE_TESTS_BPE_ORACLE_HPP
#define SEGREFINE_TESTS_BPE_ORACLE_HPP

// Straightforward BPE learner that recounts every pair on every iteration.

#include <map>
#include <vector>

#include "segrefine/bpe.hpp"
#include "segrefine/rng.hpp"

namespace testutil {

inline std::vector<segrefine::SymbolPair> brute_force_bpe(const std::map<segrefine::Text, std::size_t>& freqs,
                                                          std::size_t n_merges) {
  using segrefine::Text;
  std::vector<std::pair<std::vector<Text>, std::size_t>> words;
  for (const auto& [w, f] : freqs) {
    std::vector<Text> syms;
    for (char32_t c : w) syms.emplace_back(1, c);
    syms.back() += U"</w>";
    words.emplace_back(syms, f);
  }
  std::vector<segrefine::SymbolPair> merges;
  while (merges.size() < n_merges) {
    std::map<segrefine::SymbolPair, std::size_t> counts;
    for (const auto& [syms, f] : words) {
      for (std::size_t i = 0; i + 1 < syms.size(); ++i) counts[{syms[i], syms[i + 1]}] += f;
    }
    const segrefine::SymbolPair* best = nullptr;
    std::size_t best_count = 0;
    for (const auto& [p, c] : counts) {
      if (c > best_count) {
        best = &p;
        best_count = c;
      }
    }
    if (!best || best_count < 2) break;
    const auto pair = *best;
    merges.push_back(pair);
    for (auto& [syms, f] : words) {
      std::vector<Text> next;
      for (std::size_t i = 0; i < syms.size(); ++i) {
        if (i + 1 < syms.size() && syms[i] == pair.first && syms[i + 1] == pair.second) {
          next.push_back(syms[i] + syms[i + 1]);
          ++i;
        } else {
          next.push_back(syms[i]);
        }
      }
      syms = next;
    }
  }
  return merges;
}

/// Random toy corpus: up to `max_words` distinct words over the first
/// `alphabet` letters, with counts 1..5.
inline std::map<segrefine::Text, std::size_t> random_word_freqs(segrefine::Rng& rng, std::size_t max_words,
                                                                std::size_t alphabet) {
  std::map<segrefine::Text, std::size_t> freqs;
  const std::size_t n = 1 + segrefine::uniform_index(rng, max_words);
  for (std::size_t i = 0; i < n; ++i) {
    segrefine::Text w;
    const std::size_t len = 1 + segrefine::uniform_index(rng, 6);
    for (std::size_t k = 0; k < len; ++k) w.push_back(char32_t(U'a' + segrefine::uniform_index(rng, alphabet)));
    freqs[w] += 1 + segrefine::uniform_index(rng, 5);
  }
  return freqs;
}

}  // namespace testutil

#endif  // SEGREFINE_TESTS_BPE_ORACLE_HPP
