#ifndef SEGREFINE_LABELER_HPP
#define SEGREFINE_LABELER_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "segrefine/bpe.hpp"
#include "segrefine/corpus.hpp"
#include "segrefine/error.hpp"

namespace segrefine {

/// Augmented BMES alphabet. XB/XM/XE tag tokens of a virtual word (a
/// minimal gold-aligned span that covers several gold words). Enumerator
/// order is the argmax tie-break order.
enum class LabelTag : std::uint8_t { B = 0, M, E, S, XB, XM, XE };
inline constexpr std::size_t kNumLabels = 7;
inline constexpr std::array<LabelTag, kNumLabels> kLabels = {LabelTag::B,  LabelTag::M,  LabelTag::E, LabelTag::S,
                                                             LabelTag::XB, LabelTag::XM, LabelTag::XE};

inline std::string_view label_name(LabelTag t) {
  static constexpr std::array<std::string_view, kNumLabels> names = {"B", "M", "E", "S", "-B", "-M", "-E"};
  return names[static_cast<std::size_t>(t)];
}

inline std::optional<LabelTag> parse_label(std::string_view s) {
  for (LabelTag t : kLabels) {
    if (label_name(t) == s) return t;
  }
  return std::nullopt;
}

/// True for the labels that close a word: E, -E and S.
inline bool closes_word(LabelTag t) { return t == LabelTag::E || t == LabelTag::XE || t == LabelTag::S; }

inline bool label_can_start(LabelTag t) { return t == LabelTag::B || t == LabelTag::S || t == LabelTag::XB; }

inline bool label_can_follow(LabelTag prev, LabelTag next) {
  switch (prev) {
    case LabelTag::B:
    case LabelTag::M: return next == LabelTag::M || next == LabelTag::E;
    case LabelTag::XB:
    case LabelTag::XM: return next == LabelTag::XM || next == LabelTag::XE;
    default: return label_can_start(next);
  }
}

inline bool is_valid_label_sequence(const std::vector<LabelTag>& labels) {
  if (labels.empty() || !label_can_start(labels.front()) || !closes_word(labels.back())) return false;
  for (std::size_t i = 1; i < labels.size(); ++i) {
    if (!label_can_follow(labels[i - 1], labels[i])) return false;
  }
  return true;
}

struct LabeledSequence {
  SubwordSequence tokens;
  std::vector<LabelTag> labels;
};

/// Tags candidate tokens against the gold segmentation. Tokens accumulate
/// into a span that closes at the first token ending on a gold boundary. A
/// span equal to one gold word gets S or B M.. E; a span covering several
/// gold words gets -B -M.. -E, or S when it is a single token.
inline LabeledSequence align_labels(const SubwordSequence& cand, const SegmentedSentence& gold) {
  Text cand_text;
  for (const auto& t : cand.tokens) cand_text += t.text;
  const Text gold_text = gold.text();
  if (cand_text != gold_text) throw TextMismatch("candidate text differs from gold text");

  const auto bounds = gold.boundaries();
  std::vector<bool> is_gold(gold_text.size() + 1, false);
  for (auto b : bounds) is_gold[b] = true;

  LabeledSequence out{cand, {}};
  out.labels.reserve(cand.tokens.size());
  std::size_t span_first = 0;     // token index
  std::size_t span_start = 0;     // char offset
  std::size_t off = 0;
  for (std::size_t i = 0; i < cand.tokens.size(); ++i) {
    off += cand.tokens[i].text.size();
    if (!is_gold[off]) continue;
    std::size_t inner = 0;  // gold boundaries strictly inside the span
    for (std::size_t c = span_start + 1; c < off; ++c) inner += is_gold[c];
    const std::size_t n = i + 1 - span_first;
    const bool virtual_word = inner > 0;
    if (n == 1) {
      out.labels.push_back(LabelTag::S);
    } else {
      out.labels.push_back(virtual_word ? LabelTag::XB : LabelTag::B);
      for (std::size_t k = 1; k + 1 < n; ++k) out.labels.push_back(virtual_word ? LabelTag::XM : LabelTag::M);
      out.labels.push_back(virtual_word ? LabelTag::XE : LabelTag::E);
    }
    span_first = i + 1;
    span_start = off;
  }
  return out;
}

inline LabeledSequence make_training_pair(const SegmentedSentence& gold, const SegmentedSentence& baseline_out,
                                          SubwordSegmenter& bpe) {
  if (baseline_out.text() != gold.text()) throw TextMismatch("baseline output text differs from gold text");
  return align_labels(bpe(baseline_out), gold);
}

inline LabeledSequence make_training_pair(const SegmentedSentence& gold, const SegmentedSentence& baseline_out,
                                          const BpeModel& model) {
  SubwordSegmenter seg(model);
  return make_training_pair(gold, baseline_out, seg);
}

inline std::string serialize_labels(const std::vector<LabelTag>& labels) {
  std::string out;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i) out.push_back(' ');
    out += label_name(labels[i]);
  }
  return out;
}

inline std::vector<LabelTag> parse_labels(std::string_view line) {
  std::vector<LabelTag> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) {
      auto t = parse_label(line.substr(i, j - i));
      if (!t) throw FormatError("unknown label '" + std::string(line.substr(i, j - i)) + "'");
      out.push_back(*t);
    }
    i = j;
  }
  return out;
}

inline std::vector<std::vector<LabelTag>> read_label_corpus(const std::string& path) {
  std::vector<std::vector<LabelTag>> out;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out.push_back(with_location(path, i + 1, [&] { return parse_labels(lines[i]); }));
  }
  return out;
}

}  // namespace segrefine

#endif  // SEGREFINE_LABELER_HPP
