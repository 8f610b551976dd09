#pragma once

#include <stdexcept>
#include <string>

namespace qgrav {

// Configuration file problem tied to a named key.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

// Input outside the validity domain of a formula (point inside the magnet,
// wire thicker than the loop, Knudsen regime violation, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Numerical procedure failed (non-convergence, truncation leakage, ...).
class NumericsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace qgrav
