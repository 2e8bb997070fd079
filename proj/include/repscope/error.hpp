#pragma once

#include <stdexcept>
#include <string>

namespace repscope {

// Every failure the toolkit reports. The CLI maps each code to its own
// process exit status (see exit_code), so the order here is part of the
// command-line contract: append, never reorder.
enum class Errc {
    // tensor / manifest I/O
    FormatError,
    CorruptFile,
    UnsupportedDtype,
    IoError,
    DuplicateId,
    NonContiguousClasses,
    InconsistentClassName,
    MissingTensor,
    // network
    ShapeMismatch,
    MissingWeights,
    UnknownLayer,
    NonFiniteInput,
    // patterns
    EmptyInput,
    LayerMismatch,
    EmptyClass,
    UnknownImage,
    // stats
    EmptyScope,
    BadNeuron,
    // rdm
    ZeroVariance,
    TooFewPatterns,
    ClassTooSmall,
    LabelMismatch,
    DegenerateRdm,
    BadDistanceMatrix,
    // cam
    DegenerateLabels,
    Diverged,
    BadClass,
    MissingHead,
    // generic argument validation
    BadArgument,
};

const char* errc_name(Errc code) noexcept;

// Process exit status for a given error. Codes start at 10 so they never
// collide with 1 (unexpected failure) or 2 (command-line usage error).
int exit_code(Errc code) noexcept;

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what);

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] void fail(Errc code, const std::string& what);

}  // namespace repscope
