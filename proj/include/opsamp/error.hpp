#pragma once

#include <stdexcept>
#include <string>

namespace opsamp {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A documented precondition of an operation does not hold for its inputs.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// A linear system is singular or too ill-conditioned to solve.
class SingularSystemError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// Malformed text input (model, train, output or config files).
class ParseError : public PreconditionError {
public:
    using PreconditionError::PreconditionError;
};

/// Numerical routine failed for reasons unrelated to the caller's input.
class NumericalError : public Error {
public:
    using Error::Error;
};

inline void require(bool condition, const std::string& message)
{
    if (!condition) throw PreconditionError(message);
}

} // namespace opsamp
