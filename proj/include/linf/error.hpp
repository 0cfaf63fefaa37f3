#pragma once

#include <stdexcept>
#include <string>

namespace linf {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The nonlinearity violates the structural assumptions (monotonicity, bounds).
class ModelError : public Error {
public:
    using Error::Error;
};

/// Malformed configuration, expression, or input file.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An iterative solver (Newton, root finder, quadrature) did not converge.
class SolverError : public Error {
public:
    using Error::Error;
};

/// Input is degenerate for the requested operation (e.g. a field that is identically zero).
class DegenerateError : public Error {
public:
    using Error::Error;
};

}  // namespace linf
