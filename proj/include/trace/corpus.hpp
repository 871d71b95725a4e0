#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "trace/template_kind.hpp"

namespace trace {

enum class ArtifactKind { NL, PL };

std::string_view artifact_kind_name(ArtifactKind kind);
ArtifactKind artifact_kind_from_name(std::string_view name);

/// One natural-language requirement (NL) or code unit (PL).
struct Artifact {
    std::string id;
    ArtifactKind kind = ArtifactKind::NL;
    std::string text;
    std::string lang;  // PL: programming language name; NL: "en"

    bool operator==(const Artifact&) const = default;
};

enum class LinkLabel { Positive, Negative };

/// Where a link came from: the shipped answer set, an LLM generation,
/// or seeded negative sampling.
struct Provenance {
    enum class Source { Original, Generated, SampledNegative };

    Source source = Source::Original;
    std::string model;                                   // Generated only
    TemplateKind template_kind = TemplateKind::ZeroShotCode;  // Generated only
    std::int64_t seed = 0;                               // SampledNegative only

    static Provenance original() { return {}; }
    static Provenance generated(std::string model, TemplateKind kind) {
        Provenance p;
        p.source = Source::Generated;
        p.model = std::move(model);
        p.template_kind = kind;
        return p;
    }
    static Provenance sampled_negative(std::int64_t seed) {
        Provenance p;
        p.source = Source::SampledNegative;
        p.seed = seed;
        return p;
    }

    bool operator==(const Provenance&) const = default;
};

struct TraceLink {
    std::string source_id;  // NL artifact
    std::string target_id;  // PL artifact
    LinkLabel label = LinkLabel::Positive;
    Provenance provenance;

    bool operator==(const TraceLink&) const = default;
};

/// Immutable after construction; validate() enforces the dataset invariants.
struct TraceDataset {
    std::string name;
    std::map<std::string, Artifact> artifacts;  // id -> artifact, ordered
    std::vector<TraceLink> links;
    std::set<std::string> languages;  // declared PL language names

    const Artifact* find(const std::string& id) const;
    const Artifact& at(const std::string& id) const;  // throws UnknownArtifact
    std::vector<const Artifact*> artifacts_of(ArtifactKind kind) const;  // id order
    std::size_t count_of(ArtifactKind kind) const;

    void add_artifact(Artifact a);  // throws DuplicateArtifact
    void validate() const;          // throws on any invariant violation

    bool operator==(const TraceDataset&) const = default;
};

std::string_view link_label_name(LinkLabel label);
LinkLabel link_label_from_name(std::string_view name);
nlohmann::ordered_json provenance_to_json(const Provenance& p);
Provenance provenance_from_json(const nlohmann::ordered_json& j);

/// Reads the canonical on-disk layout: `dataset.json` manifest, one UTF-8
/// text file per artifact, `answers.tsv` with `source<TAB>target` rows.
TraceDataset ingest(const std::filesystem::path& dir);

void save(const TraceDataset& ds, const std::filesystem::path& file);
TraceDataset load(const std::filesystem::path& file);

std::string read_text_file(const std::filesystem::path& file);  // throws IoError
void write_text_file(const std::filesystem::path& file, const std::string& content);

}  // namespace trace
