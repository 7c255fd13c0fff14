#ifndef SEGREFINE_TESTS_TEST_UTIL_HPP
#define SEGREFINE_TESTS_TEST_UTIL_HPP

#include <cstdint>
#include <filesystem>
#include <functional>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "segrefine/bpe.hpp"
#include "segrefine/corpus.hpp"
#include "segrefine/rng.hpp"
#include "segrefine/text.hpp"

namespace testutil {

using segrefine::Text;

inline Text T(const std::string& s) { return segrefine::from_utf8(s); }

inline segrefine::SegmentedSentence S(const std::string& line) { return segrefine::parse_segmented_line(line); }

inline std::vector<std::string> words_utf8(const segrefine::SegmentedSentence& s) {
  std::vector<std::string> out;
  for (const auto& w : s.words()) out.push_back(segrefine::to_utf8(w));
  return out;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

/// Fresh scratch directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    segrefine::Rng rng(std::hash<std::string>{}(tag) ^ std::uint64_t(reinterpret_cast<std::uintptr_t>(this)));
    path_ = std::filesystem::temp_directory_path() / ("segrefine_" + tag + "_" + std::to_string(rng() % 1000000007));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  std::string operator/(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

/// Random sentence over a small alphabet: `n_words` words of 1..max_len letters.
inline segrefine::SegmentedSentence random_sentence(segrefine::Rng& rng, std::size_t n_words, std::size_t max_len,
                                                    std::size_t alphabet = 4) {
  std::vector<Text> words;
  for (std::size_t i = 0; i < n_words; ++i) {
    Text w;
    const std::size_t len = 1 + segrefine::uniform_index(rng, max_len);
    for (std::size_t k = 0; k < len; ++k) w.push_back(char32_t(U'a' + segrefine::uniform_index(rng, alphabet)));
    words.push_back(w);
  }
  return segrefine::SegmentedSentence(words);
}


/// Token sequence with the given piece texts; each piece is its own source word.
inline segrefine::SubwordSequence pieces(const std::vector<std::string>& texts) {
  segrefine::SubwordSequence seq;
  std::vector<segrefine::Text> words;
  std::size_t off = 0;
  for (const auto& s : texts) {
    const auto t = segrefine::from_utf8(s);
    seq.tokens.push_back({t, false, off, off + t.size(), false});
    off += t.size();
    words.push_back(t);
  }
  seq.source = segrefine::SegmentedSentence(words);
  return seq;
}

/// Cuts `text` at the given interior offsets (sorted, unique, in (0, size)).
inline segrefine::SegmentedSentence cut(const segrefine::Text& text, const std::vector<std::size_t>& offsets) {
  std::vector<segrefine::Text> words;
  std::size_t prev = 0;
  for (std::size_t o : offsets) {
    words.push_back(text.substr(prev, o - prev));
    prev = o;
  }
  words.push_back(text.substr(prev));
  return segrefine::SegmentedSentence(words);
}

}  // namespace testutil

#endif  // SEGREFINE_TESTS_TEST_UTIL_HPP
