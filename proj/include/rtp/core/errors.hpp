#pragma once

#include <stdexcept>
#include <string>

namespace rtp {

/// Argument outside the mathematical domain of an operation (e.g. m outside [-1, 1]).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Incompatible grids, bad sizes, malformed specs.
class ConfigurationError : public std::invalid_argument {
public:
    explicit ConfigurationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Operation requires data that was not recorded (e.g. an event log).
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

/// Numerical scheme left its stability region.
class StabilityError : public std::runtime_error {
public:
    explicit StabilityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace rtp
