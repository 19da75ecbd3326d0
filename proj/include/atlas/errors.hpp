#ifndef ATLAS_ERRORS_HPP
#define ATLAS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace atlas {

// Base class for all library errors. Commands map these to exit code 2,
// config/validation problems to exit code 1.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : Error {
    using Error::Error;
};

// Shape mismatch between operands; message carries both shapes.
struct ShapeError : Error {
    using Error::Error;
};

// A forward op produced NaN/Inf, or an integrator state went non-finite.
struct NonFiniteError : Error {
    using Error::Error;
};

struct NonFiniteState : NonFiniteError {
    using NonFiniteError::NonFiniteError;
};

struct StepSizeUnderflow : Error {
    using Error::Error;
};

struct DomainError : Error {
    using Error::Error;
};

struct GenerationFailed : Error {
    using Error::Error;
};

struct DegenerateChannel : Error {
    using Error::Error;
};

struct ParseError : Error {
    using Error::Error;
};

struct NotScalar : Error {
    using Error::Error;
};

struct Diverged : Error {
    using Error::Error;
};

struct SingularSystem : Error {
    using Error::Error;
};

struct IndexError : Error {
    using Error::Error;
};

struct DegenerateFeature : Error {
    using Error::Error;
};

struct ZeroVector : Error {
    using Error::Error;
};

struct InsufficientSamples : Error {
    using Error::Error;
};

struct DimMismatch : Error {
    using Error::Error;
};

struct AnchorMismatch : Error {
    using Error::Error;
};

struct ZeroVariance : Error {
    using Error::Error;
};

}  // namespace atlas

#endif  // ATLAS_ERRORS_HPP
