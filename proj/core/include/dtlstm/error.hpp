#pragma once

#include <stdexcept>
#include <string>

namespace dtlstm {

// Base of every error raised by the library. The CLI maps InputNotFound to
// exit code 2 and every other Error to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define DTLSTM_DEFINE_ERROR(Name)            \
  class Name : public Error {                \
   public:                                   \
    using Error::Error;                      \
  }

DTLSTM_DEFINE_ERROR(ParseError);
DTLSTM_DEFINE_ERROR(DimensionError);
DTLSTM_DEFINE_ERROR(ConfigError);
DTLSTM_DEFINE_ERROR(ArgumentError);
DTLSTM_DEFINE_ERROR(SplitError);
DTLSTM_DEFINE_ERROR(DegenerateFrameError);
DTLSTM_DEFINE_ERROR(NumericError);
DTLSTM_DEFINE_ERROR(ShapeError);
DTLSTM_DEFINE_ERROR(ConsistencyError);
DTLSTM_DEFINE_ERROR(FormatError);
DTLSTM_DEFINE_ERROR(AlignmentError);
DTLSTM_DEFINE_ERROR(InputNotFound);

#undef DTLSTM_DEFINE_ERROR

}  // namespace dtlstm
