#pragma once

#include <stdexcept>
#include <string>

namespace elscreen {

// ===== Error taxonomy =====
//
// ConfigError / ParseError / DegenerateDataError signal bad user input and
// map to exit code 1 in the CLI. NumericError signals an internal solver
// failure (a bug, not a data condition) and maps to exit code 2.

// Invalid configuration: bad flag values, missing columns, non-positive
// bandwidths, empty candidate sets.
struct ConfigError : std::invalid_argument {
    explicit ConfigError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Malformed file content. Row/column are 1-based file coordinates when known.
struct ParseError : std::runtime_error {
    ParseError(const std::string& msg, std::size_t row, std::size_t col)
        : std::runtime_error(msg + " (row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ")"),
          row(row),
          col(col) {}
    explicit ParseError(const std::string& msg) : std::runtime_error(msg), row(0), col(0) {}

    std::size_t row;
    std::size_t col;
};

// Data without the spread the requested operation needs (constant column
// where a bandwidth must be derived, constant index variable, ...).
struct DegenerateDataError : std::runtime_error {
    explicit DegenerateDataError(const std::string& msg) : std::runtime_error(msg) {}
};

// A numerical routine failed where the math says it cannot; treated as a bug
// signal. Carries whatever state helps diagnose it.
struct NumericError : std::runtime_error {
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace elscreen
