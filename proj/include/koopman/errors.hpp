#pragma once

#include <stdexcept>
#include <string>

namespace koopman {

/// Broad failure class, used by the CLI to pick an exit code.
enum class ErrorCategory { usage, data, numerical };

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ErrorCategory category() const noexcept = 0;
};

// Invalid command-line usage, including incompatible flags.
class UsageError : public Error {
public:
    using Error::Error;
    ErrorCategory category() const noexcept override { return ErrorCategory::usage; }
};

class DataError : public Error {
public:
    using Error::Error;
    ErrorCategory category() const noexcept override { return ErrorCategory::data; }
};

class NumericalError : public Error {
public:
    using Error::Error;
    ErrorCategory category() const noexcept override { return ErrorCategory::numerical; }
};

// Wrong dimensions, non-square input, out-of-range index.
class ShapeError : public DataError {
public:
    using DataError::DataError;
};

// Malformed CSV or model file. Carries the 1-based line number when known.
class ParseError : public DataError {
public:
    ParseError(const std::string& what, long line = 0)
        : DataError(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    long line() const noexcept { return line_; }

private:
    long line_;
};

// Options that cannot be combined with the data or with each other.
class ConfigError : public DataError {
public:
    using DataError::DataError;
};

// Invalid numeric parameter such as a zero kernel width.
class ParameterError : public DataError {
public:
    using DataError::DataError;
};

class ModelFileError : public DataError {
public:
    using DataError::DataError;
};

// Every singular value fell below the truncation threshold.
class EmptyRankError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConditioningError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace koopman
