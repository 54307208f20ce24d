// Error types shared by all stackel modules.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace stackel {

/// Base class of every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed expression text; `position` is a 0-based offset into the input.
class SyntaxError : public Error {
public:
    SyntaxError(const std::string& msg, std::size_t position)
        : Error(msg + " (at offset " + std::to_string(position) + ")"),
          position(position) {}
    std::size_t position;
};

/// A variable name not declared in the owning context.
class UnknownVariable : public Error {
public:
    using Error::Error;
};

/// Evaluation outside the domain (division by zero, sqrt of a negative).
class DomainError : public Error {
public:
    using Error::Error;
};

/// A linear solve or determinant hit a numerically singular matrix.
class SingularMatrix : public Error {
public:
    using Error::Error;
};

/// Chart position Jacobian not invertible at the requested point.
class SingularJacobian : public SingularMatrix {
public:
    using SingularMatrix::SingularMatrix;
};

/// Momentum radicand became nonpositive along a quadrature path.
class TurningPoint : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureFailure : public Error {
public:
    using Error::Error;
};

/// System spec file could not be parsed; carries 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line)
        : Error("line " + std::to_string(line) + ": " + msg), line(line) {}
    int line;
};

/// Spec file parsed but describes an inconsistent system.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Ill-formed block partition handed to a corpus generator.
class BadPartition : public ValidationError {
public:
    using ValidationError::ValidationError;
};

} // namespace stackel
