#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace geosched {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// An id (VM, PM, location, trace key) that does not resolve in the scenario.
class IdentifierError : public Error {
public:
    explicit IdentifierError(const std::string& what) : Error(what) {}
};

/// Malformed, inconsistent or missing configuration input.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what) {}
};

/// Bad trace data: malformed rows, non-monotone timestamps, coverage gaps.
class TraceError : public Error {
public:
    explicit TraceError(const std::string& what) : Error(what) {}
};

/// Window/index mismatch between two time-indexed structures.
class WindowError : public Error {
public:
    explicit WindowError(const std::string& what) : Error(what) {}
};

/// Exhaustive search refused: the instance exceeds the combination budget.
/// Carries log10 of the search-space size so callers can report it.
class SearchSpaceError : public Error {
public:
    SearchSpaceError(const std::string& what, double log10_combinations)
        : Error(what), log10_combinations_(log10_combinations) {}

    double log10_combinations() const { return log10_combinations_; }

    /// Mantissa of the combination count, i.e. count == mantissa * 10^exponent.
    double mantissa() const {
        return std::pow(10.0, log10_combinations_ - std::floor(log10_combinations_));
    }
    long long exponent() const { return static_cast<long long>(std::floor(log10_combinations_)); }

private:
    double log10_combinations_;
};

} // namespace geosched
