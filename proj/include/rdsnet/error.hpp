#pragma once

#include <stdexcept>
#include <string>

namespace rdsnet {

/// Malformed or inconsistent input data (CLI exit code 2).
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A model could not be fitted (CLI exit code 3).
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotPositiveDefinite : public std::runtime_error {
public:
    NotPositiveDefinite(std::size_t pivot, double value)
        : std::runtime_error("matrix is not positive definite (pivot " + std::to_string(pivot) +
                             " = " + std::to_string(value) + ")"),
          pivot_(pivot), value_(value) {}

    std::size_t pivot() const noexcept { return pivot_; }
    double value() const noexcept { return value_; }

private:
    std::size_t pivot_;
    double value_;
};

}  // namespace rdsnet
