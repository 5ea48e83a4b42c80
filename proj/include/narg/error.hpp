#pragma once

#include <stdexcept>
#include <string>

namespace narg {

enum class ErrorCode {
    NonHermitian,
    NonFinite,
    InvalidCount,
    InvalidGrid,
    DimensionMismatch,
    NonHermitianResult,
    UnknownOperator,
    MissingRenormalizedOperator,
    IndexOutOfRange,
    TooLarge,
    MalformedHeader,
    MalformedLine,
    InvalidSize,
    DegenerateDenominator,
    IncompleteLog,
    InvalidArgument,
    Io,
};

const char *to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what),
          code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

} // namespace narg
