#pragma once

#include <stdexcept>
#include <string>

namespace ranspinn {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed files, invalid configuration, violated preconditions.
/// The CLI maps these to exit code 1.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Point-cloud or config schema violation, with the offending row when known.
class SchemaError : public ValidationError {
public:
    SchemaError(const std::string& what, long row = -1)
        : ValidationError(row >= 0 ? what + " (row " + std::to_string(row) + ")" : what), row_(row) {}

    long row() const noexcept { return row_; }

private:
    long row_;
};

/// An elementary function was evaluated outside its domain (ln of a nonpositive value, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A loss or gradient became NaN/Inf.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Reverse sweep misuse, e.g. replaying a tape twice.
class TapeError : public Error {
public:
    using Error::Error;
};

/// Checkpoint file is truncated, damaged, or from an incompatible version.
class CorruptionError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

}  // namespace ranspinn
