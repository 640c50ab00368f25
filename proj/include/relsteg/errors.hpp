#pragma once

#include <stdexcept>
#include <string>

namespace relsteg {

/// Argument outside the mathematical domain of an operation (probability not
/// in [0,1], logit evaluated at an endpoint, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A closed-form expression hit a vanishing denominator. Usually means the
/// budget lies outside the regime in which the expression applies.
class SingularInstance : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Root finder was handed an interval whose endpoints do not bracket a root.
class BracketError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Iterative solve finished without reaching its residual target.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Closed form requested for an instance shape it does not cover.
class UnsupportedShape : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Codec errors.
class ProviderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PrecisionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DecodeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace relsteg
