#ifndef SEGREFINE_EVALUATOR_HPP
#define SEGREFINE_EVALUATOR_HPP

// Bakeoff-style segmentation scoring. A predicted word is correct iff its
// character span equals the span of some gold word.

#include <cstddef>
#include <cstdio>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "segrefine/corpus.hpp"
#include "segrefine/error.hpp"

namespace segrefine {

inline double f_score(double p, double r) { return p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0; }

struct SentenceScore {
  std::size_t gold_words = 0;
  std::size_t pred_words = 0;
  std::size_t correct_words = 0;
  std::vector<bool> gold_recovered;  // per gold word
};

inline SentenceScore score_sentence(const SegmentedSentence& gold, const SegmentedSentence& pred) {
  if (gold.text() != pred.text()) throw TextMismatch("predicted text differs from gold text");
  const auto gb = gold.boundaries();
  const auto pb = pred.boundaries();
  SentenceScore r;
  r.gold_words = gold.size();
  r.pred_words = pred.size();
  r.gold_recovered.assign(gold.size(), false);
  // Both boundary lists are strictly increasing: merge-walk the spans.
  std::size_t g = 0, p = 0;
  while (g < gold.size() && p < pred.size()) {
    const auto gs = std::pair{gb[g], gb[g + 1]};
    const auto ps = std::pair{pb[p], pb[p + 1]};
    if (gs == ps) {
      ++r.correct_words;
      r.gold_recovered[g] = true;
      ++g;
      ++p;
    } else if (gs.second < ps.second) {
      ++g;
    } else if (ps.second < gs.second) {
      ++p;
    } else {
      ++g;
      ++p;
    }
  }
  return r;
}

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
  double oov_rate = 0.0;
  double oov_recall = 0.0;
  double iv_recall = 0.0;
  std::size_t gold_words = 0;
  std::size_t pred_words = 0;
  std::size_t correct_words = 0;
  std::size_t oov_gold = 0;
  std::size_t oov_correct = 0;
  std::size_t iv_gold = 0;
  std::size_t iv_correct = 0;

  /// Fixed-order `key: value` report, rates with 4 decimals.
  std::string report() const {
    char buf[1024];
    std::snprintf(buf, sizeof buf,
                  "gold_words: %zu\npred_words: %zu\ncorrect_words: %zu\n"
                  "oov_gold: %zu\noov_correct: %zu\niv_gold: %zu\niv_correct: %zu\n"
                  "precision: %.4f\nrecall: %.4f\nf_score: %.4f\n"
                  "oov_rate: %.4f\noov_recall: %.4f\niv_recall: %.4f\n",
                  gold_words, pred_words, correct_words, oov_gold, oov_correct, iv_gold, iv_correct, precision,
                  recall, f_score, oov_rate, oov_recall, iv_recall);
    return buf;
  }

  /// Single tab-separated record: the seven counts then the six rates.
  std::string record() const {
    char buf[512];
    std::snprintf(buf, sizeof buf, "%zu\t%zu\t%zu\t%zu\t%zu\t%zu\t%zu\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f",
                  gold_words, pred_words, correct_words, oov_gold, oov_correct, iv_gold, iv_correct, precision,
                  recall, f_score, oov_rate, oov_recall, iv_recall);
    return buf;
  }
};

namespace detail {
/// numerator/denominator; an empty universe counts as perfect.
inline double rate(std::size_t num, std::size_t den) {
  return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}
}  // namespace detail

inline Metrics evaluate(const std::vector<SegmentedSentence>& gold, const std::vector<SegmentedSentence>& pred,
                        const std::unordered_set<Text>& train_vocab) {
  if (gold.size() != pred.size()) throw CorpusMismatch("gold and predicted corpora differ in sentence count");
  Metrics m;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    SentenceScore s;
    try {
      s = score_sentence(gold[i], pred[i]);
    } catch (const TextMismatch&) {
      throw CorpusMismatch("sentence " + std::to_string(i + 1) + ": predicted text differs from gold text");
    }
    m.gold_words += s.gold_words;
    m.pred_words += s.pred_words;
    m.correct_words += s.correct_words;
    for (std::size_t w = 0; w < gold[i].size(); ++w) {
      const bool oov = !train_vocab.count(gold[i].words()[w]);
      (oov ? m.oov_gold : m.iv_gold) += 1;
      if (s.gold_recovered[w]) (oov ? m.oov_correct : m.iv_correct) += 1;
    }
  }
  // With no predicted words precision is 0 unless there was nothing to find.
  m.precision = m.pred_words == 0 ? (m.gold_words == 0 ? 1.0 : 0.0) : detail::rate(m.correct_words, m.pred_words);
  m.recall = detail::rate(m.correct_words, m.gold_words);
  m.f_score = segrefine::f_score(m.precision, m.recall);
  m.oov_rate = m.gold_words == 0 ? 0.0 : static_cast<double>(m.oov_gold) / static_cast<double>(m.gold_words);
  m.oov_recall = detail::rate(m.oov_correct, m.oov_gold);
  m.iv_recall = detail::rate(m.iv_correct, m.iv_gold);
  return m;
}

}  // namespace segrefine

#endif  // SEGREFINE_EVALUATOR_HPP
