#pragma once

#include <stdexcept>
#include <string>

namespace trace {

enum class Errc {
    MissingManifest,
    ParseError,
    DuplicateArtifact,
    UnknownArtifact,
    EmptyArtifact,
    ValidationError,
    KindMismatch,
    InvalidPrompt,
    AuthMissing,
    ProviderError,
    RetryExhausted,
    EmptyGeneration,
    AugmentationEmpty,
    NoNegativeCandidate,
    SplitTooSmall,
    EncodingEmpty,
    DimensionMismatch,
    NonFinite,
    LengthMismatch,
    SeedMismatch,
    NotEnoughData,
    ConfigError,
    PrerequisiteMissing,
    IoError,
};

const char* errc_name(Errc code);

/// Single exception type carried through the toolkit; `code()` identifies
/// the failure class, the message carries location detail (file, line, id).
class TraceError : public std::runtime_error {
public:
    TraceError(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message),
          code_(code),
          message_(message) {}

    Errc code() const noexcept { return code_; }
    const char* code_name() const noexcept { return errc_name(code_); }
    const std::string& message() const noexcept { return message_; }

private:
    Errc code_;
    std::string message_;
};

}  // namespace trace
