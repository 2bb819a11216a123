#include "coldspray/errors.hpp"

namespace coldspray {

const char* to_string(ErrorKind kind) {
    switch (kind) {
    case ErrorKind::MalformedHeader: return "MalformedHeader";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::EmptyFile: return "EmptyFile";
    case ErrorKind::ConstantFeature: return "ConstantFeature";
    case ErrorKind::TooFewRows: return "TooFewRows";
    case ErrorKind::BadFraction: return "BadFraction";
    case ErrorKind::InvalidValue: return "InvalidValue";
    case ErrorKind::TooFewNodes: return "TooFewNodes";
    case ErrorKind::ZeroSigma: return "ZeroSigma";
    case ErrorKind::IsolatedNode: return "IsolatedNode";
    case ErrorKind::ShapeMismatch: return "ShapeMismatch";
    case ErrorKind::NotScalarOutput: return "NotScalarOutput";
    case ErrorKind::EmptyNeighborhood: return "EmptyNeighborhood";
    case ErrorKind::UnboundArtifact: return "UnboundArtifact";
    case ErrorKind::RowMismatch: return "RowMismatch";
    case ErrorKind::EmptyMask: return "EmptyMask";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::MissingTarget: return "MissingTarget";
    case ErrorKind::MaskMismatch: return "MaskMismatch";
    case ErrorKind::UnknownParameter: return "UnknownParameter";
    case ErrorKind::Io: return "Io";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    }
    return "UnknownError";
}

} // namespace coldspray
