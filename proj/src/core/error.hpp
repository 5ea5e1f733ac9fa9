#pragma once

#include <stdexcept>
#include <string>

namespace sparsec {

// Mirrors sparsec_status in the C API; keep the numeric values in sync.
enum class ErrorCode : int {
    InvalidArgument = 1,
    Parse = 2,
    InvalidMachine = 3,
    TimeBoundExceeded = 4,
    InvalidSymbol = 5,
    MissingPolynomial = 6,
    ArityMismatch = 7,
    CyclicGraph = 8,
    TooManyInputs = 9,
    WeightOverflow = 10,
    BadDelta = 11,
    BudgetInfeasible = 12,
    DimensionMismatch = 13,
    DepthOutOfRange = 14,
    NotUnivariate = 15,
    OutOfRange = 16,
    WidthMismatch = 17,
    WidthOverflow = 18,
    BadPoint = 19,
    OutOfDomain = 20,
    UncoveredPattern = 21,
    CheckFailed = 22,
    Io = 23,
    Internal = 24,
};

const char* error_code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace sparsec
