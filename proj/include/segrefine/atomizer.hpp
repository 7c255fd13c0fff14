#ifndef SEGREFINE_ATOMIZER_HPP
#define SEGREFINE_ATOMIZER_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "segrefine/text.hpp"

namespace segrefine {

inline constexpr char32_t kTsheg = U'\u0F0B';
inline constexpr char32_t kShad = U'\u0F0D';

/// Atom = syllable-like minimal unit; spans are [start, end) character offsets.
struct Atom {
  Text text;
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const Atom&, const Atom&) = default;
};

struct AtomizerConfig {
  std::u32string atom_delimiters = {kTsheg};
  std::u32string punctuation_atoms = {kShad};
  std::u32string presegment_chars = {kShad};

  bool is_delimiter(char32_t c) const { return atom_delimiters.find(c) != std::u32string::npos; }
  bool is_punctuation(char32_t c) const { return punctuation_atoms.find(c) != std::u32string::npos; }
  bool is_presegment(char32_t c) const { return presegment_chars.find(c) != std::u32string::npos; }
};

/// Maximal runs ending with (and including) a delimiter; punctuation
/// characters stand alone. An empty delimiter set makes every character an
/// atom.
inline std::vector<Atom> atomize(TextView text, const AtomizerConfig& cfg) {
  std::vector<Atom> atoms;
  const bool per_char = cfg.atom_delimiters.empty();
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    if (end > start) atoms.push_back({Text(text.substr(start, end - start)), start, end});
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char32_t c = text[i];
    if (cfg.is_punctuation(c)) {
      flush(i);
      flush(i + 1);
    } else if (per_char || cfg.is_delimiter(c)) {
      flush(i + 1);
    }
  }
  flush(text.size());
  return atoms;
}

/// Cuts after every presegment character, dropping empty pieces.
inline std::vector<Text> presegment(TextView text, const AtomizerConfig& cfg) {
  std::vector<Text> pieces;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (cfg.is_presegment(text[i])) {
      pieces.emplace_back(text.substr(start, i + 1 - start));
      start = i + 1;
    }
  }
  if (start < text.size()) pieces.emplace_back(text.substr(start));
  return pieces;
}

}  // namespace segrefine

#endif  // SEGREFINE_ATOMIZER_HPP
