#pragma once

#include <stdexcept>
#include <string>

namespace ecl {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor or network dimensions do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A value violates a documented precondition or invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Operation called in the wrong lifecycle state (e.g. backward before forward).
class StateError : public Error {
public:
    using Error::Error;
};

/// Index outside its valid range (class label, device label...).
class IndexError : public Error {
public:
    using Error::Error;
};

/// Malformed input file. Carries the 1-based line number where parsing failed.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace ecl
