#include "repscope/error.hpp"

namespace repscope {

const char* errc_name(Errc code) noexcept {
    switch (code) {
    case Errc::FormatError: return "FormatError";
    case Errc::CorruptFile: return "CorruptFile";
    case Errc::UnsupportedDtype: return "UnsupportedDtype";
    case Errc::IoError: return "IoError";
    case Errc::DuplicateId: return "DuplicateId";
    case Errc::NonContiguousClasses: return "NonContiguousClasses";
    case Errc::InconsistentClassName: return "InconsistentClassName";
    case Errc::MissingTensor: return "MissingTensor";
    case Errc::ShapeMismatch: return "ShapeMismatch";
    case Errc::MissingWeights: return "MissingWeights";
    case Errc::UnknownLayer: return "UnknownLayer";
    case Errc::NonFiniteInput: return "NonFiniteInput";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::LayerMismatch: return "LayerMismatch";
    case Errc::EmptyClass: return "EmptyClass";
    case Errc::UnknownImage: return "UnknownImage";
    case Errc::EmptyScope: return "EmptyScope";
    case Errc::BadNeuron: return "BadNeuron";
    case Errc::ZeroVariance: return "ZeroVariance";
    case Errc::TooFewPatterns: return "TooFewPatterns";
    case Errc::ClassTooSmall: return "ClassTooSmall";
    case Errc::LabelMismatch: return "LabelMismatch";
    case Errc::DegenerateRdm: return "DegenerateRdm";
    case Errc::BadDistanceMatrix: return "BadDistanceMatrix";
    case Errc::DegenerateLabels: return "DegenerateLabels";
    case Errc::Diverged: return "Diverged";
    case Errc::BadClass: return "BadClass";
    case Errc::MissingHead: return "MissingHead";
    case Errc::BadArgument: return "BadArgument";
    }
    return "Unknown";
}

int exit_code(Errc code) noexcept {
    return 10 + static_cast<int>(code);
}

Error::Error(Errc code, const std::string& what)
    : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

void fail(Errc code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace repscope
