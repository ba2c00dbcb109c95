#ifndef ADSIM_ERRORS_HPP_
#define ADSIM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace adsim {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input data violates a structural invariant (bad measure, bad parameter set, ...).
struct ValidationError : Error {
    using Error::Error;
};

// A hypothesis on the model data failed at load/validation time.
// `hypothesis` carries the short tag ("H1".."H6") used in messages.
struct HypothesisError : ValidationError {
    HypothesisError(std::string tag, const std::string& what)
        : ValidationError(tag + ": " + what), hypothesis(std::move(tag)) {}
    std::string hypothesis;
};

// Argument outside the mathematical domain of an operation.
struct DomainError : Error {
    using Error::Error;
};

// Problem size exceeds a deliberate oracle/test limit.
struct CapacityError : Error {
    using Error::Error;
};

// A time step could not be completed at the requested dt.
struct StepSizeError : Error {
    using Error::Error;
};

// Explicit reaction sub-step violated its stability bound.
struct CflError : StepSizeError {
    using StepSizeError::StepSizeError;
};

// Characteristic field lost strict monotonicity.
struct DegenerateFieldError : Error {
    using Error::Error;
};

// Two objects that must share a discretization do not.
struct ShapeError : Error {
    using Error::Error;
};

// Fixed-point iteration failed to reach tolerance.
struct NonConvergenceError : Error {
    using Error::Error;
};

// Runtime bound (linear-growth estimate) violated during a run.
struct BoundViolationError : Error {
    BoundViolationError(const std::string& what, int species_, double x_, double t_)
        : Error(what), species(species_), x(x_), t(t_) {}
    int species;
    double x;
    double t;
};

// "Cannot happen" states; indicates a bug, not bad input.
struct InternalError : Error {
    using Error::Error;
};

}  // namespace adsim

#endif  // ADSIM_ERRORS_HPP_
