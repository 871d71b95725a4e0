#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "trace/corpus.hpp"
#include "trace/template_kind.hpp"

namespace trace {

/// A fully substituted prompt, traceable to its template and basis artifact.
struct PromptInstance {
    TemplateKind kind = TemplateKind::ZeroShotCode;
    std::string text;
    std::string basis_artifact_id;
    std::optional<std::pair<std::string, std::string>> example_pair_id;  // (NL id, PL id)
};

namespace prompts {

/// Canonical template body with placeholders intact.
std::string_view golden_template(TemplateKind kind);

inline constexpr std::string_view kSectionHeaders[] = {
    "# CONTEXT #", "# OBJECTIVE #", "# STYLE #", "# TONE #", "# AUDIENCE #", "# RESPONSE #",
};

PromptInstance build_zero_shot(TemplateKind kind, const std::string& lang, const Artifact& basis);

PromptInstance build_few_shot(TemplateKind kind, const std::string& lang, const Artifact& basis,
                              const Artifact& example_nl, const Artifact& example_pl);

/// The fixed few-shot example for a dataset: the Positive Original link with
/// the lexicographically smallest (source_id, target_id) pair.
std::pair<std::string, std::string> fixed_example_pair(const TraceDataset& ds);

/// All prompts one augmentation run over `ds` would issue, in basis-id order.
/// Few-shot kinds exclude the example basis artifact.
std::vector<PromptInstance> plan_prompts(const TraceDataset& ds, TemplateKind kind);

}  // namespace prompts
}  // namespace trace
