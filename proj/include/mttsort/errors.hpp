#pragma once

#include <stdexcept>
#include <string>

namespace mttsort {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration value, unknown key, or unknown preset.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed input row. Carries the 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Data does not agree with its declared schema (e.g. embedding dimension).
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Singular or non-positive-definite matrix encountered by the filter.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Frames presented out of order to the tracker.
class SequenceError : public Error {
public:
    using Error::Error;
};

/// A metric is undefined for the given input (e.g. no ground truth).
class MetricError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace mttsort
