#include "trace/error.hpp"

namespace trace {

const char* errc_name(Errc code) {
    switch (code) {
        case Errc::MissingManifest: return "missing-manifest";
        case Errc::ParseError: return "parse-error";
        case Errc::DuplicateArtifact: return "duplicate-artifact";
        case Errc::UnknownArtifact: return "unknown-artifact";
        case Errc::EmptyArtifact: return "empty-artifact";
        case Errc::ValidationError: return "validation-error";
        case Errc::KindMismatch: return "kind-mismatch";
        case Errc::InvalidPrompt: return "invalid-prompt";
        case Errc::AuthMissing: return "auth-missing";
        case Errc::ProviderError: return "provider-error";
        case Errc::RetryExhausted: return "retry-exhausted";
        case Errc::EmptyGeneration: return "empty-generation";
        case Errc::AugmentationEmpty: return "augmentation-empty";
        case Errc::NoNegativeCandidate: return "no-negative-candidate";
        case Errc::SplitTooSmall: return "split-too-small";
        case Errc::EncodingEmpty: return "encoding-empty";
        case Errc::DimensionMismatch: return "dimension-mismatch";
        case Errc::NonFinite: return "non-finite";
        case Errc::LengthMismatch: return "length-mismatch";
        case Errc::SeedMismatch: return "seed-mismatch";
        case Errc::NotEnoughData: return "not-enough-data";
        case Errc::ConfigError: return "config-error";
        case Errc::PrerequisiteMissing: return "prerequisite-missing";
        case Errc::IoError: return "io-error";
    }
    return "unknown";
}

}  // namespace trace
