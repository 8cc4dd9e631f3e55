#pragma once

#include <stdexcept>
#include <string>

namespace redkit {

/// Malformed input: bad model parameters, shape mismatches, out-of-range
/// indices. The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// A computation that cannot produce a meaningful number: degenerate fits,
/// empty success mass, unsupported asymptotic regimes. Exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace redkit
