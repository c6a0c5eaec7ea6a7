#pragma once

#include <stdexcept>
#include <string>

namespace zappa {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A velocity profile that is not strictly positive at some node.
class InvalidProfile : public Error {
public:
    InvalidProfile(const std::string& what, int node, double y)
        : Error(what), node_(node), y_(y) {}
    int node() const noexcept { return node_; }
    double y() const noexcept { return y_; }

private:
    int node_;
    double y_;
};

/// A kernel moment that the derivation needs but the kernel does not have.
class MomentDivergence : public Error {
public:
    MomentDivergence(const std::string& what, int order) : Error(what), order_(order) {}
    int order() const noexcept { return order_; }

private:
    int order_;
};

class UnsupportedKernel : public Error {
public:
    using Error::Error;
};

class NumericalDegeneracy : public Error {
public:
    using Error::Error;
};

/// Negative diffusivity in the macroscale equation.
class IllPosed : public Error {
public:
    using Error::Error;
};

class StabilityViolation : public Error {
public:
    StabilityViolation(const std::string& what, double suggested_dt)
        : Error(what), suggested_dt_(suggested_dt) {}
    double suggested_dt() const noexcept { return suggested_dt_; }

private:
    double suggested_dt_;
};

/// NaN/Inf or other breakdown detected during a run.
class NumericalFailure : public Error {
public:
    using Error::Error;
};

/// Malformed or unknown configuration input.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace zappa
