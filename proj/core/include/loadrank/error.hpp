#pragma once

#include <stdexcept>
#include <string>

namespace loadrank {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input that violates a documented invariant (malformed building, bad weights, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numeric function called outside its domain.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Regression design matrix without full column rank.
class IdentifiabilityError : public Error {
public:
    using Error::Error;
};

/// Missing or inconsistent runtime configuration (models, files, lifecycle).
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace loadrank
