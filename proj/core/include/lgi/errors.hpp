#pragma once

#include <stdexcept>
#include <string>

namespace lgi {

/// Raised when an argument lies outside the mathematical domain of an operation
/// (alpha outside [0,1], a Bloch vector outside the ball, t_j <= t_i, ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Raised for inconsistent configuration (sweep specs, search grids, CLI input)
/// before any computation starts.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// File I/O failure; the message carries the path and the cause.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lgi
