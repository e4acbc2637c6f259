#pragma once

#include <stdexcept>
#include <string>

namespace fracdelay {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (poles, invalid
/// parameters, Laplace abscissa left of the convergence region, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Result would exceed the floating-point range.
class OverflowError : public Error {
public:
    using Error::Error;
};

/// The requested accuracy cannot be delivered in this parameter regime.
class AccuracyError : public Error {
public:
    using Error::Error;
};

/// Grid, vector-size or layout mismatch.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A delayed argument left the admissible window [-d, s].
class DelayError : public Error {
public:
    using Error::Error;
};

/// Fixed-point or inner iteration failed to reach tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double last_ratio, bool inconsistent = false)
        : Error(what), last_ratio_(last_ratio), inconsistent_(inconsistent) {}

    double last_ratio() const noexcept { return last_ratio_; }
    /// True when a certified contraction constant below one was supplied and
    /// the iteration still failed.
    bool inconsistent() const noexcept { return inconsistent_; }

private:
    double last_ratio_;
    bool inconsistent_;
};

/// Malformed problem file or command-line value.
class ParseError : public Error {
public:
    using Error::Error;
};

}  // namespace fracdelay
