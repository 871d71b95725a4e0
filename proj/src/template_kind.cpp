#include "trace/template_kind.hpp"

#include "trace/error.hpp"

namespace trace {

std::string_view template_kind_name(TemplateKind kind) {
    switch (kind) {
        case TemplateKind::ZeroShotCode: return "zero_shot_code";
        case TemplateKind::ZeroShotRequirements: return "zero_shot_requirements";
        case TemplateKind::FewShotCode: return "few_shot_code";
        case TemplateKind::FewShotRequirements: return "few_shot_requirements";
    }
    return "unknown";
}

TemplateKind template_kind_from_name(std::string_view name) {
    for (TemplateKind kind : kAllTemplateKinds) {
        if (template_kind_name(kind) == name) return kind;
    }
    throw TraceError(Errc::ConfigError, "unknown template kind '" + std::string(name) + "'");
}

}  // namespace trace
