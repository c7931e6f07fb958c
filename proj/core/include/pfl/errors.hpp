#pragma once

#include <stdexcept>
#include <string>

namespace pfl {

// Base class for all library failures that are not plain precondition
// violations (those throw std::invalid_argument).
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Operand shapes disagree with a model or with each other.
struct DimensionMismatch : Error {
    using Error::Error;
};

// Elementwise metric over differently shaped operands.
struct ShapeMismatch : Error {
    using Error::Error;
};

// Inverse transform of a spectrum that is not conjugate-symmetric enough
// to come from a real field.
struct ImaginaryResidueTooLarge : Error {
    ImaginaryResidueTooLarge(const std::string& msg, double residue)
        : Error(msg), residue(residue) {}
    double residue;
};

// Solver state left the physically meaningful range.
struct NumericalBlowup : Error {
    explicit NumericalBlowup(const std::string& msg, int step_index = -1)
        : Error(msg), step_index(step_index) {}
    int step_index;  // -1 when unknown
};

// Training loss became NaN/Inf.
struct NonFiniteLoss : Error {
    explicit NonFiniteLoss(const std::string& msg, int epoch = -1)
        : Error(msg), epoch(epoch) {}
    int epoch;
};

// Malformed on-disk artifact (container, manifest, model, image).
struct FormatError : Error {
    using Error::Error;
};

// Bad run configuration: unknown key, unparsable value, invalid combination.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace pfl
