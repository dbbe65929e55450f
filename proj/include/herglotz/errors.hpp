#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace herglotz {

/// Base class of every error raised by the toolkit.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& message, std::size_t offset)
        : Error(message + " at byte " + std::to_string(offset)), offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Unbound variable or domain error (log of non-positive, division by zero, ...).
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// A problem, trajectory or family violates its structural invariants.
class ValidationError : public Error {
public:
    using Error::Error;
};

class IntegrationError : public Error {
public:
    using Error::Error;
};

/// The velocity Hessian is singular (or numerically so) at some point.
class IrregularLagrangianError : public Error {
public:
    using Error::Error;
};

class ShootingError : public Error {
public:
    using Error::Error;
};

class InvarianceError : public Error {
public:
    using Error::Error;
};

} // namespace herglotz
