#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fehmm {

/// Root of all library exceptions.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input: bad expression text, invalid configuration, wrong preconditions.
class InputError : public Error {
public:
    using Error::Error;
};

class ParseError : public InputError {
public:
    ParseError(std::size_t offset, const std::string& message)
        : InputError("offset " + std::to_string(offset) + ": " + message), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Failures of the numerics: singular systems, non-finite values, non-convergence.
class NumericalError : public Error {
public:
    using Error::Error;
};

class SingularMatrixError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class ConvergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace fehmm
