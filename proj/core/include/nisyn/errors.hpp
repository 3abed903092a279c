#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace nisyn {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Incompatible or invalid matrix dimensions.
class DimensionError : public Error {
   public:
    using Error::Error;
};

/// A documented precondition of an operation was violated by the caller.
class PreconditionError : public Error {
   public:
    using Error::Error;
};

/// A numerical backend failed or produced a result outside its residual bound.
class NumericalError : public Error {
   public:
    using Error::Error;
};

/// An option value violates its invariant (e.g. a gain that must be negative definite).
class OptionError : public Error {
   public:
    using Error::Error;
};

/// A coordinate-transformation construction failed (should not occur when the
/// structural preconditions hold; reported defensively).
class ConstructionError : public Error {
   public:
    using Error::Error;
};

/// Gain construction failed, e.g. the randomized observability search was exhausted.
class SynthesisError : public Error {
   public:
    using Error::Error;
};

/// Transfer-function evaluation was requested at (or too close to) a pole.
class PoleEvaluationError : public Error {
   public:
    PoleEvaluationError(const std::string& what, std::complex<double> nearest)
        : Error(what), nearest_pole(nearest)
    {
    }
    std::complex<double> nearest_pole;
};

/// The system is neither relative degree one nor two; outside the supported class.
class UnsupportedRelativeDegreeError : public Error {
   public:
    using Error::Error;
};

/// Malformed input file.
class ParseError : public Error {
   public:
    using Error::Error;
};

/// The feedback interconnection has no well-posed solution.
class WellPosednessError : public Error {
   public:
    using Error::Error;
};

}  // namespace nisyn
