#pragma once

#include <stdexcept>
#include <string>

namespace formfind {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed model document. Carries the 1-based line/column of the failure
/// when the JSON reader could determine it (0 otherwise).
class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t line, std::size_t column)
        : Error(message), line_(line), column_(column) {}

    std::size_t line() const noexcept { return line_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t line_;
    std::size_t column_;
};

/// A well-formed document (or in-memory model) that violates a model invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Zero-measure element. `element_id` is -1 when the geometry was evaluated
/// outside of a model (raw kernel calls).
class DegenerateElementError : public Error {
public:
    DegenerateElementError(const std::string& message, int element_id)
        : Error(message), element_id_(element_id) {}

    int element_id() const noexcept { return element_id_; }

private:
    int element_id_;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Non-finite solver state.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& message, int step)
        : Error(message), step_(step) {}

    int step() const noexcept { return step_; }

private:
    int step_;
};

}  // namespace formfind
