#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace subscan {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// OS-level I/O failures: missing files, unreadable paths, failed writes.
class IoError : public Error {
public:
    using Error::Error;
};

// Content problems: bad arguments, malformed files, shape mismatches.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Validation failure pinned to a cell of a tabular input.
// Rows index data rows (the CSV header is not a row); both indices are 0-based.
class ParseError : public ValidationError {
public:
    ParseError(const std::string& message, std::size_t row, std::size_t col)
        : ValidationError(message), row_(row), col_(col) {}

    std::size_t row() const { return row_; }
    std::size_t col() const { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

} // namespace subscan
