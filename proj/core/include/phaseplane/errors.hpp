#pragma once

#include <stdexcept>
#include <string>

namespace phaseplane {

// Base class for all errors raised by the library. CLI maps subclasses to
// exit codes: ConfigError -> 2, FloorViolation -> 3, everything else -> 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Two geometry objects from different dyadic grids were combined.
class GridMismatchError : public Error {
public:
    explicit GridMismatchError(const std::string& what) : Error(what) {}
};

// Sampled functions with incompatible window/resolution were combined.
class ResolutionMismatchError : public Error {
public:
    explicit ResolutionMismatchError(const std::string& what) : Error(what) {}
};

// An argument pair was passed in the wrong scale order; the message names
// the expected order.
class ScaleOrderError : public Error {
public:
    explicit ScaleOrderError(const std::string& what) : Error(what) {}
};

// A requested construction does not fit the configured window or scale range.
class CapacityError : public Error {
public:
    explicit CapacityError(const std::string& what) : Error(what) {}
};

// Invalid experiment configuration; `field` names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string field_name, const std::string& what)
        : Error(what), field(std::move(field_name)) {}
    std::string field;
};

// A numerical invariant with a hard floor (wavelet periodization, packet
// norms, spectral support) was violated.
class FloorViolation : public Error {
public:
    explicit FloorViolation(const std::string& what) : Error(what) {}
};

// The density/energy iteration exceeded its termination guard.
class DecompositionStallError : public Error {
public:
    explicit DecompositionStallError(const std::string& what) : Error(what) {}
};

// A tree split postcondition failed; the message names the postcondition.
class TreeSplitError : public Error {
public:
    explicit TreeSplitError(const std::string& what) : Error(what) {}
};

}  // namespace phaseplane
