#ifndef SEGREFINE_DECODER_HPP
#define SEGREFINE_DECODER_HPP

#include <vector>

#include "segrefine/bpe.hpp"
#include "segrefine/corpus.hpp"
#include "segrefine/error.hpp"
#include "segrefine/labeler.hpp"

namespace segrefine {

/// Buffer rule: append each token to a buffer and emit the buffer as a word
/// on E, -E or S. A non-empty buffer left at the end is emitted as a final
/// word, so the output text always equals the token text.
inline SegmentedSentence decode(const SubwordSequence& tokens, const std::vector<LabelTag>& labels) {
  if (tokens.tokens.size() != labels.size()) throw LengthMismatch("label count differs from token count");
  std::vector<Text> words;
  Text buffer;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    buffer += tokens.tokens[i].text;
    if (closes_word(labels[i])) {
      words.push_back(std::move(buffer));
      buffer.clear();
    }
  }
  if (!buffer.empty()) words.push_back(std::move(buffer));
  return SegmentedSentence(std::move(words));
}

}  // namespace segrefine

#endif  // SEGREFINE_DECODER_HPP
