#pragma once

#include <stdexcept>
#include <string>

namespace thermoguard {

/// Root of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent telemetry input (CSV files, profile layout).
class LoadError : public Error {
public:
    using Error::Error;
};

/// Model container does not start with the expected magic string.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Model container written by an incompatible format version.
class VersionError : public Error {
public:
    using Error::Error;
};

/// Model container ended before the declared payload was read.
class TruncatedError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration or violated precondition on parameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Array or tensor shapes that do not line up.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A metric whose value is mathematically undefined for the input.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

/// Normal equations without a unique solution.
class SingularMatrixError : public Error {
public:
    using Error::Error;
};

/// Optimization blew up; carries the epoch at which it was detected.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, int epoch) : Error(what), epoch_(epoch) {}
    [[nodiscard]] int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

/// Backward pass called with a cache that does not belong to the model state.
class StaleCacheError : public Error {
public:
    using Error::Error;
};

}  // namespace thermoguard
