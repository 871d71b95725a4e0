#pragma once

#include <string>
#include <string_view>

namespace trace {

/// The four prompt templates: zero-shot / few-shot, each in the
/// code-generating and requirement-generating direction.
enum class TemplateKind {
    ZeroShotCode,
    ZeroShotRequirements,
    FewShotCode,
    FewShotRequirements,
};

inline constexpr TemplateKind kAllTemplateKinds[] = {
    TemplateKind::ZeroShotCode,
    TemplateKind::ZeroShotRequirements,
    TemplateKind::FewShotCode,
    TemplateKind::FewShotRequirements,
};

std::string_view template_kind_name(TemplateKind kind);
TemplateKind template_kind_from_name(std::string_view name);  // throws ConfigError

inline bool is_few_shot(TemplateKind kind) {
    return kind == TemplateKind::FewShotCode || kind == TemplateKind::FewShotRequirements;
}

/// True for templates that generate code from a requirement basis.
inline bool generates_code(TemplateKind kind) {
    return kind == TemplateKind::ZeroShotCode || kind == TemplateKind::FewShotCode;
}

}  // namespace trace
