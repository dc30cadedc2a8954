#pragma once

#include <stdexcept>
#include <string>

namespace bsvie {

/// Raised when an argument lies outside the domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Raised when an iterative procedure fails to reach its tolerance.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for malformed user input (configs, files, presets).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace bsvie
