#ifndef SEGREFINE_BPE_HPP
#define SEGREFINE_BPE_HPP

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "segrefine/corpus.hpp"
#include "segrefine/error.hpp"
#include "segrefine/text.hpp"

namespace segrefine {

/// Appended to the last symbol of a word while learning/applying merges.
inline const Text kEndOfWord = U"</w>";
/// Suffix marking a non-final piece in serialized subword corpora.
inline const std::string kContinuation = "@@";

using SymbolPair = std::pair<Text, Text>;

struct BpeModel {
  std::vector<SymbolPair> merges;  // learning order

  std::size_t n_merges() const { return merges.size(); }

  void save(const std::string& path) const {
    std::vector<std::string> lines;
    lines.reserve(merges.size() + 1);
    lines.push_back("BPE v1 " + std::to_string(merges.size()));
    for (const auto& [l, r] : merges) lines.push_back(to_utf8(l) + " " + to_utf8(r));
    write_lines(path, lines);
  }

  static BpeModel load(const std::string& path) {
    const auto lines = read_lines(path);
    const std::string header = "BPE v1 ";
    if (lines.empty() || lines[0].rfind(header, 0) != 0) {
      throw FormatError(path + ":1: expected header 'BPE v1 <n_merges>'");
    }
    std::size_t n = 0;
    try {
      n = std::stoul(lines[0].substr(header.size()));
    } catch (const std::exception&) {
      throw FormatError(path + ":1: bad merge count");
    }
    BpeModel m;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      const auto sp = lines[i].find(' ');
      if (sp == std::string::npos || sp == 0 || sp + 1 == lines[i].size() ||
          lines[i].find(' ', sp + 1) != std::string::npos) {
        throw FormatError(path + ":" + std::to_string(i + 1) + ": expected 'left right'");
      }
      m.merges.emplace_back(with_location(path, i + 1, [&] { return from_utf8(lines[i].substr(0, sp)); }),
                            with_location(path, i + 1, [&] { return from_utf8(lines[i].substr(sp + 1)); }));
    }
    if (m.merges.size() != n) throw FormatError(path + ": header merge count does not match body");
    return m;
  }
};

/// Character symbols of a word, the last one carrying the end-of-word sentinel.
inline std::vector<Text> initial_symbols(TextView word) {
  std::vector<Text> syms;
  syms.reserve(word.size());
  for (char32_t c : word) syms.emplace_back(1, c);
  if (!syms.empty()) syms.back() += kEndOfWord;
  return syms;
}

namespace detail {
inline void merge_pair(std::vector<Text>& syms, const SymbolPair& p) {
  std::vector<Text> out;
  out.reserve(syms.size());
  for (std::size_t i = 0; i < syms.size(); ++i) {
    if (i + 1 < syms.size() && syms[i] == p.first && syms[i + 1] == p.second) {
      out.push_back(syms[i] + syms[i + 1]);
      ++i;
    } else {
      out.push_back(std::move(syms[i]));
    }
  }
  syms = std::move(out);
}
}  // namespace detail

/// Greedy merge learning: repeatedly merge the most frequent adjacent pair
/// (ties: smallest (left, right)), stopping after `n_merges` or when no pair
/// occurs at least twice. Pair statistics are maintained incrementally.
inline BpeModel learn_bpe(const std::map<Text, std::size_t>& word_freqs, std::size_t n_merges) {
  struct Entry {
    std::vector<Text> syms;
    std::size_t freq;
  };
  std::vector<Entry> words;
  words.reserve(word_freqs.size());
  for (const auto& [w, f] : word_freqs) {
    if (!w.empty() && f > 0) words.push_back({initial_symbols(w), f});
  }

  std::map<SymbolPair, long> counts;
  std::map<SymbolPair, std::set<std::size_t>> where;
  // Ordered by (count desc, pair asc) so begin() is the next merge.
  auto rank_less = [](const std::pair<long, SymbolPair>& a, const std::pair<long, SymbolPair>& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  };
  std::set<std::pair<long, SymbolPair>, decltype(rank_less)> queue(rank_less);

  auto adjust = [&](const SymbolPair& p, long delta, std::size_t wi) {
    auto& c = counts[p];
    if (c > 0) queue.erase({c, p});
    c += delta;
    if (c > 0) queue.insert({c, p});
    if (delta > 0) where[p].insert(wi);
  };
  auto add_word = [&](std::size_t wi, long sign) {
    const auto& syms = words[wi].syms;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      adjust({syms[i], syms[i + 1]}, sign * static_cast<long>(words[wi].freq), wi);
    }
  };
  for (std::size_t wi = 0; wi < words.size(); ++wi) add_word(wi, +1);

  BpeModel model;
  while (model.merges.size() < n_merges && !queue.empty()) {
    const auto [count, best] = *queue.begin();
    if (count < 2) break;
    model.merges.push_back(best);
    const auto affected = where[best];
    for (std::size_t wi : affected) {
      add_word(wi, -1);
      detail::merge_pair(words[wi].syms, best);
      add_word(wi, +1);
    }
    where.erase(best);
  }
  return model;
}

/// Text-level word frequencies of a corpus.
inline std::map<Text, std::size_t> word_frequencies(const std::vector<SegmentedSentence>& corpus) {
  std::map<Text, std::size_t> freqs;
  for (const auto& s : corpus) {
    for (const auto& w : s.words()) ++freqs[w];
  }
  return freqs;
}

struct SubwordToken {
  Text text;
  bool is_subword = false;
  std::size_t start = 0;
  std::size_t end = 0;
  bool continuation = false;

  /// Serialized form: text plus the continuation suffix on non-final pieces.
  std::string surface() const { return to_utf8(text) + (continuation ? kContinuation : std::string()); }
  Text surface_text() const { return continuation ? text + U"@@" : text; }

  friend bool operator==(const SubwordToken&, const SubwordToken&) = default;
};

struct PairHash {
  std::size_t operator()(const SymbolPair& p) const {
    const std::size_t a = std::hash<Text>{}(p.first);
    return a ^ (std::hash<Text>{}(p.second) + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  }
};

using MergeRanks = std::unordered_map<SymbolPair, std::size_t, PairHash>;

inline MergeRanks merge_ranks(const BpeModel& model) {
  MergeRanks ranks;
  for (std::size_t i = 0; i < model.merges.size(); ++i) ranks.emplace(model.merges[i], i);
  return ranks;
}

/// Replays the merges in learned order on one word: after applying the merge
/// of rank r, only merges of rank > r are considered.
inline std::vector<SubwordToken> apply_bpe(const BpeModel& model, const MergeRanks& ranks, TextView word) {
  if (word.empty()) throw FormatError("cannot apply BPE to an empty word");
  auto syms = initial_symbols(word);
  long applied = -1;
  while (syms.size() > 1) {
    std::size_t best = SIZE_MAX;
    for (std::size_t i = 0; i + 1 < syms.size(); ++i) {
      auto it = ranks.find({syms[i], syms[i + 1]});
      if (it != ranks.end() && static_cast<long>(it->second) > applied && it->second < best) best = it->second;
    }
    if (best == SIZE_MAX) break;
    detail::merge_pair(syms, model.merges[best]);
    applied = static_cast<long>(best);
  }
  std::vector<SubwordToken> pieces;
  pieces.reserve(syms.size());
  const bool split = syms.size() > 1;
  std::size_t off = 0;
  for (std::size_t i = 0; i < syms.size(); ++i) {
    Text t = std::move(syms[i]);
    if (i + 1 == syms.size()) t.resize(t.size() - kEndOfWord.size());
    const std::size_t len = t.size();
    pieces.push_back({std::move(t), split, off, off + len, i + 1 < syms.size()});
    off += len;
  }
  return pieces;
}

inline std::vector<SubwordToken> apply_bpe(const BpeModel& model, TextView word) {
  return apply_bpe(model, merge_ranks(model), word);
}

/// BPE tokens of a segmented sentence; spans are offsets into its text.
struct SubwordSequence {
  std::vector<SubwordToken> tokens;
  SegmentedSentence source;

  std::size_t size() const { return tokens.size(); }

  std::vector<Text> surfaces() const {
    std::vector<Text> out;
    out.reserve(tokens.size());
    for (const auto& t : tokens) out.push_back(t.surface_text());
    return out;
  }
};

/// Applies BPE word by word, memoizing per distinct word.
class SubwordSegmenter {
 public:
  explicit SubwordSegmenter(BpeModel model) : model_(std::move(model)), ranks_(merge_ranks(model_)) {}

  const BpeModel& model() const { return model_; }

  const std::vector<SubwordToken>& pieces(const Text& word) {
    auto it = cache_.find(word);
    if (it == cache_.end()) it = cache_.emplace(word, apply_bpe(model_, ranks_, word)).first;
    return it->second;
  }

  SubwordSequence operator()(const SegmentedSentence& s) {
    SubwordSequence seq;
    seq.source = s;
    std::size_t off = 0;
    for (const auto& w : s.words()) {
      for (auto tok : pieces(w)) {
        tok.start += off;
        tok.end += off;
        seq.tokens.push_back(std::move(tok));
      }
      off += w.size();
    }
    return seq;
  }

 private:
  BpeModel model_;
  MergeRanks ranks_;
  std::unordered_map<Text, std::vector<SubwordToken>> cache_;
};

inline SubwordSequence segment_to_subwords(const BpeModel& model, const SegmentedSentence& s) {
  SubwordSegmenter seg(model);
  return seg(s);
}

// ---------------------------------------------------------------------------
// Subword corpus files: pieces line + parallel 1/0 feature line.

inline std::string serialize_pieces(const SubwordSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += seq.tokens[i].surface();
  }
  return out;
}

inline std::string serialize_features(const SubwordSequence& seq) {
  std::string out;
  for (std::size_t i = 0; i < seq.tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out.push_back(seq.tokens[i].is_subword ? '1' : '0');
  }
  return out;
}

/// Inverse of serialize_pieces/serialize_features.
inline SubwordSequence parse_subword_line(std::string_view pieces_line, std::string_view features_line) {
  const auto pieces = parse_segmented_line(pieces_line).words();
  std::vector<std::string> feats;
  std::string cur;
  for (char c : features_line) {
    if (c == ' ' || c == '\t') {
      if (!cur.empty()) feats.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) feats.push_back(std::move(cur));
  if (feats.size() != pieces.size()) throw LengthMismatch("feature count differs from piece count");

  SubwordSequence seq;
  std::vector<Text> words;
  Text word;
  std::size_t off = 0;
  const Text marker = U"@@";
  for (std::size_t i = 0; i < pieces.size(); ++i) {
    Text t = pieces[i];
    bool cont = t.size() > marker.size() && t.ends_with(marker);
    if (cont) t.resize(t.size() - marker.size());
    if (feats[i] != "0" && feats[i] != "1") throw FormatError("feature must be 0 or 1");
    const std::size_t len = t.size();
    word += t;
    seq.tokens.push_back({std::move(t), feats[i] == "1", off, off + len, cont});
    off += len;
    if (!cont) {
      words.push_back(std::move(word));
      word.clear();
    }
  }
  if (!word.empty()) words.push_back(std::move(word));
  seq.source = SegmentedSentence(std::move(words));
  return seq;
}

inline void write_subword_corpus(const std::string& pieces_path, const std::string& features_path,
                                 const std::vector<SubwordSequence>& corpus) {
  std::vector<std::string> p, f;
  for (const auto& s : corpus) {
    p.push_back(serialize_pieces(s));
    f.push_back(serialize_features(s));
  }
  write_lines(pieces_path, p);
  write_lines(features_path, f);
}

inline std::vector<SubwordSequence> read_subword_corpus(const std::string& pieces_path,
                                                        const std::string& features_path) {
  const auto p = read_lines(pieces_path);
  const auto f = read_lines(features_path);
  if (p.size() != f.size()) throw FormatError(features_path + ": line count differs from " + pieces_path);
  std::vector<SubwordSequence> out;
  out.reserve(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    out.push_back(with_location(pieces_path, i + 1, [&] { return parse_subword_line(p[i], f[i]); }));
  }
  return out;
}

/// Tagger vocabulary over serialized subword surfaces.
inline Vocabulary build_vocab(const std::vector<SubwordSequence>& corpus, std::size_t max_size) {
  std::vector<std::vector<Text>> seqs;
  seqs.reserve(corpus.size());
  for (const auto& s : corpus) seqs.push_back(s.surfaces());
  return build_vocab(seqs, max_size);
}

}  // namespace segrefine

#endif  // SEGREFINE_BPE_HPP
