#pragma once

#include <stdexcept>
#include <string>

namespace imagtime {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Two states (or a state and an operator) live on different grids.
class GridMismatchError : public Error {
public:
    using Error::Error;
};

/// A state vector or intermediate result contains NaN or infinity.
class NonFiniteError : public Error {
public:
    using Error::Error;
};

/// Thomas elimination hit a pivot below the singularity guard.
class SingularSystemError : public Error {
public:
    SingularSystemError(const std::string& what, long row_index)
        : Error(what), row(row_index) {}
    long row;
};

/// A time step could not be completed (typically a singular implicit system).
class StepFailureError : public Error {
public:
    using Error::Error;
};

/// An iteration (Newton or the gradient flow) failed to reach its tolerance.
class NonconvergenceError : public Error {
public:
    NonconvergenceError(const std::string& what, double last_residual_value)
        : Error(what), last_residual(last_residual_value) {}
    double last_residual;
};

/// The state collapsed to (numerically) zero and cannot be normalized.
class DegenerateStateError : public Error {
public:
    using Error::Error;
};

/// The tangent-space parametrization broke down (||u|| >= 1).
class OutOfChartError : public Error {
public:
    using Error::Error;
};

/// Not enough usable data points for a fit.
class InsufficientDataError : public Error {
public:
    using Error::Error;
};

/// An explicit time integration produced non-finite values.
class BlowUpError : public Error {
public:
    BlowUpError(const std::string& what, double at_time)
        : Error(what), time(at_time) {}
    double time;
};

} // namespace imagtime
