#include "trace/promptgen.hpp"

#include <algorithm>

#include "trace/error.hpp"

namespace trace::prompts {

namespace {

// Canonical transcriptions of the four template bodies. The typeset source
// does not pin inline whitespace, so this file fixes one transcription:
// every section/separator on its own line, one blank line between blocks,
// no trailing newline. The zero-shot requirements template keeps {code} on
// the line directly after its context sentence; all other placeholders
// stand alone. Tests byte-compare against these strings.

constexpr std::string_view kZeroShotCode =
    "# CONTEXT #\n"
    "\n"
    "I want to generate the corresponding {lang} code based on the following requirements.\n"
    "\n"
    "{requirements}\n"
    "\n"
    "# OBJECTIVE #\n"
    "\n"
    "Generate {lang} code for me and fully implement the functions described in the requirements. "
    "Must maintain high readability, completeness, accuracy, and compliance with {lang} best practices.\n"
    "\n"
    "# STYLE #\n"
    "\n"
    "Follow the writing style of a senior software development engineer who implement requirements.\n"
    "\n"
    "# TONE #\n"
    "\n"
    "Accurate, clear, concise, readable, consistent and reusable.\n"
    "\n"
    "# AUDIENCE #\n"
    "\n"
    "The target audience for the {lang} code are other programmers, testers, code reviewers, and "
    "document writers. Tailor your {lang} code to target what this audience typically looks out for "
    "in software development products.\n"
    "\n"
    "# RESPONSE #\n"
    "\n"
    "Only {lang} code, maintain clarity, conciseness, readability, modularity, maintainability, "
    "robustness, testability, efficiency, security, consistency, and scalability.";

constexpr std::string_view kZeroShotRequirements =
    "# CONTEXT #\n"
    "\n"
    "I want to summarize the corresponding requirements from the following code.\n"
    "{code}\n"
    "\n"
    "# OBJECTIVE #\n"
    "\n"
    "Extract user requirements that focus on the goals that users expect to achieve through this "
    "feature. Avoid involving code details and focus on user actions and expected results. Ensure "
    "that the description is clear and accurately expresses the user's intention and expected "
    "experience.\n"
    "\n"
    "# STYLE #\n"
    "\n"
    "Follow the writing style of senior software engineers who define requirements, such as "
    "Frederick P. Brooks.\n"
    "\n"
    "# TONE #\n"
    "\n"
    "Clear, accurate, concise, and formal\n"
    "\n"
    "# AUDIENCE #\n"
    "\n"
    "The target audience for the requirements are quality assurance teams, testing engineers, "
    "business analysts, and development teams. Tailor your requirements to target what this "
    "audience typically looks out for in software development products.\n"
    "\n"
    "# RESPONSE #\n"
    "\n"
    "The requirement text, maintain clarity, achieve consistency, and be completely unambiguous.";

constexpr std::string_view kFewShotCode =
    "Generate the corresponding {lang} code based on the following <<< REQUIREMENTS >>>."
    "Generate {lang} code for me and fully implement the functions described in the requirements. "
    "Must maintain high readability, completeness, accuracy, and compliance with {lang} best "
    "practices. Give the {lang} code without any other preamble text and require.\n"
    "\n"
    "###\n"
    "\n"
    "EXAMPLE REQUIREMENTS\n"
    "\n"
    "{example requirements}\n"
    "\n"
    "EXAMPLE OUTPUTS\n"
    "\n"
    "{example code}\n"
    "\n"
    "###\n"
    "\n"
    "<<<\n"
    "\n"
    "{requirements}\n"
    "\n"
    ">>>";

constexpr std::string_view kFewShotRequirements =
    "Summarize the corresponding requirements from the following <<< CODE >>>."
    "Extract user requirements that focus on the goals that users expect to achieve through this "
    "feature. Avoid involving code details and focus on user actions and expected results. Ensure "
    "that the description is clear and accurately expresses the user's intention and expected "
    "experience. Give the user requirements without any other preamble text and code.\n"
    "\n"
    "###\n"
    "\n"
    "EXAMPLE CODE\n"
    "\n"
    "{example code}\n"
    "\n"
    "EXAMPLE OUTPUTS\n"
    "\n"
    "{example requirements}\n"
    "\n"
    "###\n"
    "\n"
    "<<<\n"
    "\n"
    "{code}\n"
    "\n"
    ">>>";

std::string trim_copy(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n\f\v");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(begin, end - begin + 1);
}

/// Single-pass expansion: substituted values are emitted verbatim and never
/// rescanned, so artifact text cannot introduce placeholder tokens.
std::string expand(std::string_view tmpl,
                   const std::vector<std::pair<std::string_view, const std::string*>>& subs) {
    std::string out;
    out.reserve(tmpl.size() + 256);
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const std::size_t brace = tmpl.find('{', pos);
        if (brace == std::string_view::npos) {
            out.append(tmpl.substr(pos));
            break;
        }
        out.append(tmpl.substr(pos, brace - pos));
        bool matched = false;
        for (const auto& [token, value] : subs) {
            if (tmpl.substr(brace).starts_with(token)) {
                out.append(*value);
                pos = brace + token.size();
                matched = true;
                break;
            }
        }
        if (!matched) {
            throw TraceError(Errc::InvalidPrompt,
                             "template contains unsupported placeholder near offset " + std::to_string(brace));
        }
    }
    return out;
}

void require_basis_kind(TemplateKind kind, const Artifact& basis) {
    const ArtifactKind expected = generates_code(kind) ? ArtifactKind::NL : ArtifactKind::PL;
    if (basis.kind != expected) {
        throw TraceError(Errc::KindMismatch,
                         "template " + std::string(template_kind_name(kind)) + " requires a " +
                             std::string(artifact_kind_name(expected)) + " basis, got '" + basis.id + "'");
    }
    if (trim_copy(basis.text).empty()) {
        throw TraceError(Errc::EmptyArtifact, "basis artifact '" + basis.id + "' has empty text");
    }
}

}  // namespace

std::string_view golden_template(TemplateKind kind) {
    switch (kind) {
        case TemplateKind::ZeroShotCode: return kZeroShotCode;
        case TemplateKind::ZeroShotRequirements: return kZeroShotRequirements;
        case TemplateKind::FewShotCode: return kFewShotCode;
        case TemplateKind::FewShotRequirements: return kFewShotRequirements;
    }
    throw TraceError(Errc::ConfigError, "invalid template kind");
}

PromptInstance build_zero_shot(TemplateKind kind, const std::string& lang, const Artifact& basis) {
    if (is_few_shot(kind)) {
        throw TraceError(Errc::KindMismatch,
                         std::string(template_kind_name(kind)) + " is not a zero-shot template");
    }
    require_basis_kind(kind, basis);

    PromptInstance prompt;
    prompt.kind = kind;
    prompt.basis_artifact_id = basis.id;
    if (kind == TemplateKind::ZeroShotCode) {
        prompt.text = expand(kZeroShotCode, {{"{lang}", &lang}, {"{requirements}", &basis.text}});
    } else {
        prompt.text = expand(kZeroShotRequirements, {{"{code}", &basis.text}});
    }
    return prompt;
}

PromptInstance build_few_shot(TemplateKind kind, const std::string& lang, const Artifact& basis,
                              const Artifact& example_nl, const Artifact& example_pl) {
    if (!is_few_shot(kind)) {
        throw TraceError(Errc::KindMismatch,
                         std::string(template_kind_name(kind)) + " is not a few-shot template");
    }
    require_basis_kind(kind, basis);
    if (example_nl.kind != ArtifactKind::NL || example_pl.kind != ArtifactKind::PL) {
        throw TraceError(Errc::KindMismatch, "example pair must be (NL, PL)");
    }
    if (basis.id == example_nl.id || basis.id == example_pl.id) {
        throw TraceError(Errc::InvalidPrompt,
                         "basis '" + basis.id + "' must differ from the task example artifacts");
    }

    PromptInstance prompt;
    prompt.kind = kind;
    prompt.basis_artifact_id = basis.id;
    prompt.example_pair_id = {example_nl.id, example_pl.id};
    if (kind == TemplateKind::FewShotCode) {
        prompt.text = expand(kFewShotCode, {{"{lang}", &lang},
                                            {"{example requirements}", &example_nl.text},
                                            {"{example code}", &example_pl.text},
                                            {"{requirements}", &basis.text}});
    } else {
        prompt.text = expand(kFewShotRequirements, {{"{example code}", &example_pl.text},
                                                    {"{example requirements}", &example_nl.text},
                                                    {"{code}", &basis.text}});
    }
    return prompt;
}

std::pair<std::string, std::string> fixed_example_pair(const TraceDataset& ds) {
    const TraceLink* best = nullptr;
    for (const TraceLink& link : ds.links) {
        if (link.label != LinkLabel::Positive || link.provenance.source != Provenance::Source::Original) {
            continue;
        }
        if (best == nullptr || std::tie(link.source_id, link.target_id) <
                                   std::tie(best->source_id, best->target_id)) {
            best = &link;
        }
    }
    if (best == nullptr) {
        throw TraceError(Errc::NotEnoughData, "dataset '" + ds.name + "' has no positive original link");
    }
    return {best->source_id, best->target_id};
}

std::vector<PromptInstance> plan_prompts(const TraceDataset& ds, TemplateKind kind) {
    std::string lang;
    if (generates_code(kind)) {
        if (ds.languages.size() != 1) {
            throw TraceError(Errc::ConfigError, "code generation needs exactly one dataset language, got " +
                                                    std::to_string(ds.languages.size()));
        }
        lang = *ds.languages.begin();
    }

    std::optional<std::pair<std::string, std::string>> example;
    if (is_few_shot(kind)) example = fixed_example_pair(ds);

    const ArtifactKind basis_kind = generates_code(kind) ? ArtifactKind::NL : ArtifactKind::PL;
    const std::string excluded =
        example ? (basis_kind == ArtifactKind::NL ? example->first : example->second) : std::string();

    std::vector<PromptInstance> out;
    for (const Artifact* basis : ds.artifacts_of(basis_kind)) {
        if (example && basis->id == excluded) continue;
        if (example) {
            out.push_back(build_few_shot(kind, lang, *basis, ds.at(example->first), ds.at(example->second)));
        } else {
            out.push_back(build_zero_shot(kind, lang, *basis));
        }
    }
    return out;
}

}  // namespace trace::prompts
