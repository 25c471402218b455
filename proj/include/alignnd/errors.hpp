#pragma once

#include <stdexcept>
#include <string>

namespace alignnd {

// Malformed or physically invalid input: parse failures, structure
// invariant violations, bad graph topology. CLI maps this to exit code 2.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: NaN loss, non-convergent fit, degenerate linear
// algebra. CLI maps this to exit code 3.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace alignnd
