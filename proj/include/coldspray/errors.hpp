#pragma once

#include <stdexcept>
#include <string>

namespace coldspray {

/// Error categories used across the toolkit. Each failure mode named by a
/// module contract maps to one kind so callers and tests can dispatch on it.
enum class ErrorKind {
    // dataset
    MalformedHeader,
    MalformedRow,
    NonNumericCell,
    EmptyFile,
    ConstantFeature,
    TooFewRows,
    BadFraction,
    InvalidValue,
    // graph
    TooFewNodes,
    ZeroSigma,
    IsolatedNode,
    // diff engine
    ShapeMismatch,
    NotScalarOutput,
    // models
    EmptyNeighborhood,
    UnboundArtifact,
    RowMismatch,
    // training
    EmptyMask,
    ZeroVariance,
    NonFiniteLoss,
    MissingTarget,
    // cli
    MaskMismatch,
    UnknownParameter,
    Io,
    InvalidArgument,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

} // namespace coldspray
