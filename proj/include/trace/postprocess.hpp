#pragma once

#include <string>
#include <vector>

namespace trace {

enum class CleanKind { Code, Requirement };

struct CleanedOutput {
    std::string text;
    CleanKind kind = CleanKind::Code;
    std::vector<std::string> applied_rules;
};

/// Keyword lists driving requirement cleaning; overridable from the run config.
struct CleaningConfig {
    std::vector<std::string> preamble_keywords{"sure", "here", "certainly", "below", "okay"};
    std::vector<std::string> summary_keywords{"in summary", "overall", "hope this", "this code", "note:"};
};

/// Pulls fenced bodies (``` or """) out of a raw generation, in order,
/// joined by one blank line, language tag lines stripped. No fence: the
/// trimmed raw text passes through. Empty result throws EmptyGeneration.
CleanedOutput extract_code(const std::string& raw);

/// Drops keyword-matched preamble/summary lines at the edges, strips
/// markdown tokens, preserves interior text. Empty result throws
/// EmptyGeneration. Applied to a fixpoint so cleaning is idempotent.
CleanedOutput extract_requirement(const std::string& raw, const CleaningConfig& cfg = {});

}  // namespace trace
