#pragma once

#include <stdexcept>
#include <string>

namespace fgl {

/// Invalid parameters detected when a norm, grid or config is built.
class ConstructionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a map (e.g. the fundamental tensor at y = 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Two fields (or a field and a cache) live on different grids.
class GridMismatch : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An iterative method (Newton, CG) did not reach its tolerance.
class IterativeFailure : public std::runtime_error {
public:
    IterativeFailure(const std::string& what, double residual)
        : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
          residual_(residual) {}

    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Configuration file rejected; message carries line and field.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fgl
