#ifndef SEGREFINE_TEXT_HPP
#define SEGREFINE_TEXT_HPP

#include <boost/locale/encoding_utf.hpp>

#include <string>
#include <string_view>

#include "segrefine/error.hpp"

namespace segrefine {

// Internally all text is a sequence of Unicode scalar values so that spans
// are character offsets.
using Text = std::u32string;
using TextView = std::u32string_view;

inline Text from_utf8(std::string_view s) {
  try {
    return boost::locale::conv::utf_to_utf<char32_t>(
        s.data(), s.data() + s.size(), boost::locale::conv::stop);
  } catch (const boost::locale::conv::conversion_error&) {
    throw EncodingError("invalid UTF-8");
  }
}

inline std::string to_utf8(TextView s) {
  return boost::locale::conv::utf_to_utf<char>(s.data(), s.data() + s.size());
}

inline bool is_blank(char32_t c) { return c == U' ' || c == U'\t' || c == U'\r'; }

}  // namespace segrefine

#endif  // SEGREFINE_TEXT_HPP
