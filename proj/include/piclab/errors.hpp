#pragma once

#include <stdexcept>
#include <string>

namespace piclab {

/// Base class for every error this library throws on purpose.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct IndexOutOfRange : Error {
    using Error::Error;
};

/// Two input entries force contradictory values on the same canonical slot.
struct SymmetryConflict : Error {
    using Error::Error;
};

/// First Bianchi residual of the input exceeds the construction gate.
struct BianchiViolation : Error {
    using Error::Error;
};

struct DimMismatch : Error {
    using Error::Error;
};

struct NonOrthonormalFrame : Error {
    using Error::Error;
};

/// boundary_point needs a strictly positive starting margin.
struct NotInterior : Error {
    using Error::Error;
};

struct NotOnBoundary : Error {
    using Error::Error;
};

struct ZeroScal : Error {
    using Error::Error;
};

struct BlowUp : Error {
    using Error::Error;
};

struct StepUnderflow : Error {
    using Error::Error;
};

/// Sampler gave up after its attempt budget without a certified tensor.
struct SamplerStall : Error {
    using Error::Error;
};

/// Malformed input file (JSON syntax, missing fields, bad field types).
struct ParseError : Error {
    using Error::Error;
};

}  // namespace piclab
