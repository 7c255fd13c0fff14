#ifndef SEGREFINE_ERROR_HPP
#define SEGREFINE_ERROR_HPP

#include <stdexcept>
#include <string>

namespace segrefine {

/// Base of every error raised by the library. The CLI maps these to exit 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SEGREFINE_DEFINE_ERROR(Name)      \
  class Name : public Error {             \
   public:                                \
    using Error::Error;                   \
  };

SEGREFINE_DEFINE_ERROR(EmptyLine)
SEGREFINE_DEFINE_ERROR(EncodingError)
SEGREFINE_DEFINE_ERROR(FormatError)
SEGREFINE_DEFINE_ERROR(AtomMisalignment)
SEGREFINE_DEFINE_ERROR(BeamEmpty)
SEGREFINE_DEFINE_ERROR(NoPath)
SEGREFINE_DEFINE_ERROR(TextMismatch)
SEGREFINE_DEFINE_ERROR(LengthMismatch)
SEGREFINE_DEFINE_ERROR(CorpusMismatch)
SEGREFINE_DEFINE_ERROR(ShapeMismatch)
SEGREFINE_DEFINE_ERROR(LengthExceeded)
SEGREFINE_DEFINE_ERROR(DimensionMismatch)
SEGREFINE_DEFINE_ERROR(ConfigError)

#undef SEGREFINE_DEFINE_ERROR

}  // namespace segrefine

#endif  // SEGREFINE_ERROR_HPP
