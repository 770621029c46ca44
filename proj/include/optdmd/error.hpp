#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace optdmd {

enum class ErrorCode {
    InvalidArgument,
    NonFinite,
    IndexOutOfRange,
    ZeroEigenvalue,
    ShapeMismatch,
    SingularSystem,
    RankTooLarge,
    SingularBackward,
    SearchCapExceeded,
    RankConstraintViolated,
    SingularBlock,
    NonDiagonalizable,
    EmptySpectrum,
    DegenerateGrid,
    ZeroData,
    LengthMismatch,
    ParseError,
    NonMonotoneTime,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

// Every failure raised by the library carries one of the codes above so the
// CLI can report it in machine-readable form.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
    if (!cond) throw Error(code, what);
}

}  // namespace optdmd
