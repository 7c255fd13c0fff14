#ifndef SEGREFINE_CORPUS_HPP
#define SEGREFINE_CORPUS_HPP

#include <algorithm>
#include <cstddef>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "segrefine/error.hpp"
#include "segrefine/text.hpp"

namespace segrefine {

/// A sentence as an ordered list of non-empty words.
class SegmentedSentence {
 public:
  SegmentedSentence() = default;
  explicit SegmentedSentence(std::vector<Text> words) : words_(std::move(words)) {
    if (words_.empty()) throw EmptyLine("sentence has no words");
    for (const auto& w : words_) {
      if (w.empty()) throw FormatError("empty word in sentence");
    }
  }

  const std::vector<Text>& words() const { return words_; }
  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }

  Text text() const {
    Text t;
    for (const auto& w : words_) t += w;
    return t;
  }

  /// Character offsets of word edges: 0, end of word 1, ..., total length.
  std::vector<std::size_t> boundaries() const {
    std::vector<std::size_t> b;
    b.reserve(words_.size() + 1);
    b.push_back(0);
    for (const auto& w : words_) b.push_back(b.back() + w.size());
    return b;
  }

  friend bool operator==(const SegmentedSentence&, const SegmentedSentence&) = default;

 private:
  std::vector<Text> words_;
};

/// Splits on ASCII space/tab; empty fields are dropped.
inline SegmentedSentence parse_segmented_line(TextView line) {
  std::vector<Text> words;
  Text cur;
  for (char32_t c : line) {
    if (c == U'\n') throw FormatError("newline inside sentence");
    if (is_blank(c)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  if (words.empty()) throw EmptyLine("line is empty");
  return SegmentedSentence(std::move(words));
}

inline SegmentedSentence parse_segmented_line(std::string_view utf8) {
  return parse_segmented_line(TextView(from_utf8(utf8)));
}

inline std::string serialize(const SegmentedSentence& s) {
  std::string out;
  for (std::size_t i = 0; i < s.words().size(); ++i) {
    if (i) out.push_back(' ');
    out += to_utf8(s.words()[i]);
  }
  return out;
}

/// Reads all lines of a UTF-8 file, stripping a trailing '\r'. Throws
/// FormatError naming the file when it cannot be opened.
inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError(path + ": cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

/// Rethrows any library error as a FormatError prefixed with `path:line: `.
template <typename F>
auto with_location(const std::string& path, std::size_t lineno, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    throw FormatError(path + ":" + std::to_string(lineno) + ": " + e.what());
  }
}

inline std::vector<SegmentedSentence> read_corpus(const std::string& path) {
  std::vector<SegmentedSentence> out;
  const auto lines = read_lines(path);
  out.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    out.push_back(with_location(path, i + 1, [&] { return parse_segmented_line(lines[i]); }));
  }
  return out;
}

inline void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError(path + ": cannot write file");
  for (const auto& l : lines) out << l << '\n';
}

inline void write_corpus(const std::string& path, const std::vector<SegmentedSentence>& corpus) {
  std::vector<std::string> lines;
  lines.reserve(corpus.size());
  for (const auto& s : corpus) lines.push_back(serialize(s));
  write_lines(path, lines);
}

inline std::unordered_set<Text> word_set(const std::vector<SegmentedSentence>& corpus) {
  std::unordered_set<Text> words;
  for (const auto& s : corpus) words.insert(s.words().begin(), s.words().end());
  return words;
}

// ---------------------------------------------------------------------------
// Vocabulary

inline constexpr char32_t kUnkToken[] = U"<UNK>";

class Vocabulary {
 public:
  static constexpr int kUnk = 0;

  Vocabulary() : Vocabulary(std::vector<Text>{}) {}

  /// `tokens` excludes UNK; ids are assigned 1..n in the given order.
  explicit Vocabulary(const std::vector<Text>& tokens) {
    add(Text(kUnkToken));
    for (const auto& t : tokens) {
      if (t == kUnkToken) continue;
      if (index_.count(t)) throw FormatError("duplicate vocabulary token");
      add(t);
    }
  }

  int id(const Text& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? kUnk : it->second;
  }
  bool contains(const Text& token) const { return index_.count(token) != 0; }
  const Text& token(int id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<Text>& tokens() const { return tokens_; }

  void save(const std::string& path) const {
    std::vector<std::string> lines;
    for (const auto& t : tokens_) lines.push_back(to_utf8(t));
    write_lines(path, lines);
  }

  static Vocabulary load(const std::string& path) {
    const auto lines = read_lines(path);
    if (lines.empty() || from_utf8(lines[0]) != kUnkToken) {
      throw FormatError(path + ":1: vocabulary must start with <UNK>");
    }
    std::vector<Text> tokens;
    for (std::size_t i = 1; i < lines.size(); ++i) {
      tokens.push_back(with_location(path, i + 1, [&] { return from_utf8(lines[i]); }));
    }
    return Vocabulary(tokens);
  }

 private:
  void add(const Text& t) {
    index_.emplace(t, static_cast<int>(tokens_.size()));
    tokens_.push_back(t);
  }

  std::vector<Text> tokens_;
  std::unordered_map<Text, int> index_;
};

/// UNK plus the (max_size - 1) most frequent tokens; ties broken by
/// lexicographic (code point) order. `sequences` is any range of token lists.
template <typename Sequences>
Vocabulary build_vocab(const Sequences& sequences, std::size_t max_size) {
  std::map<Text, std::size_t> counts;
  for (const auto& seq : sequences) {
    for (const auto& tok : seq) ++counts[Text(tok)];
  }
  counts.erase(Text(kUnkToken));
  std::vector<std::pair<Text, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  const std::size_t keep = max_size == 0 ? 0 : std::min(ranked.size(), max_size - 1);
  std::vector<Text> tokens;
  tokens.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) tokens.push_back(std::move(ranked[i].first));
  return Vocabulary(tokens);
}

// ---------------------------------------------------------------------------
// Long-sentence splitting

namespace detail {
inline bool is_terminator_word(const Text& w, const std::u32string& terminators) {
  return !w.empty() && std::all_of(w.begin(), w.end(), [&](char32_t c) {
    return terminators.find(c) != std::u32string::npos;
  });
}
}  // namespace detail

/// Cuts a sentence into pieces of at most `max_len` words, preferring to cut
/// right after the last all-terminator word inside each window.
inline std::vector<SegmentedSentence> split_long(const SegmentedSentence& s, std::size_t max_len,
                                                 const std::u32string& terminators) {
  if (max_len < 2) throw ConfigError("max_len must be >= 2");
  std::vector<SegmentedSentence> out;
  const auto& words = s.words();
  std::size_t start = 0;
  while (words.size() - start > max_len) {
    std::size_t cut = start + max_len;
    for (std::size_t i = start + max_len; i > start; --i) {
      if (detail::is_terminator_word(words[i - 1], terminators)) {
        cut = i;
        break;
      }
    }
    out.emplace_back(std::vector<Text>(words.begin() + start, words.begin() + cut));
    start = cut;
  }
  out.emplace_back(std::vector<Text>(words.begin() + start, words.end()));
  return out;
}

}  // namespace segrefine

#endif  // SEGREFINE_CORPUS_HPP
