#pragma once

#include <stdexcept>
#include <string>

namespace rfs {

// Requested family exists in the registry but cannot be evaluated
// (its coefficient series is only conditionally convergent).
struct unsupported_family_error : std::runtime_error {
    explicit unsupported_family_error(const std::string& msg)
        : std::runtime_error(msg) {}
};

// A truncated series or Euler product failed its stabilization check.
struct convergence_error : std::runtime_error {
    explicit convergence_error(const std::string& msg)
        : std::runtime_error(msg) {}
};

// A local grid value was requested beyond the configured exponent cap.
struct exponent_cap_error : std::runtime_error {
    explicit exponent_cap_error(const std::string& msg)
        : std::runtime_error(msg) {}
};

// The Euler-product coefficient formula is inapplicable because the
// mean value vanishes; callers fall back to the double sum.
struct mean_zero_error : std::runtime_error {
    explicit mean_zero_error(const std::string& msg)
        : std::runtime_error(msg) {}
};

}  // namespace rfs
