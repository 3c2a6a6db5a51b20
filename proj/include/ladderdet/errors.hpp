#pragma once

#include <stdexcept>
#include <string>

namespace ladderdet {

/// Bad or inconsistent input data (missing files, malformed annotations,
/// out-of-range preconditions). CLI exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure at runtime (divergence, non-finite values, degenerate
/// geometry produced mid-run). CLI exit code 3.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ladderdet
