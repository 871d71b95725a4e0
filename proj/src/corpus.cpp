#include "trace/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "trace/error.hpp"

namespace trace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

std::string_view artifact_kind_name(ArtifactKind kind) {
    return kind == ArtifactKind::NL ? "NL" : "PL";
}

ArtifactKind artifact_kind_from_name(std::string_view name) {
    if (name == "NL") return ArtifactKind::NL;
    if (name == "PL") return ArtifactKind::PL;
    throw TraceError(Errc::ParseError, "unknown artifact kind '" + std::string(name) + "'");
}

namespace {

std::string trimmed(const std::string& s) {
    std::size_t begin = s.find_first_not_of(" \t\r\n\f\v");
    if (begin == std::string::npos) return "";
    std::size_t end = s.find_last_not_of(" \t\r\n\f\v");
    return s.substr(begin, end - begin + 1);
}

}  // namespace

std::string_view link_label_name(LinkLabel label) {
    return label == LinkLabel::Positive ? "positive" : "negative";
}

LinkLabel link_label_from_name(std::string_view name) {
    if (name == "positive") return LinkLabel::Positive;
    if (name == "negative") return LinkLabel::Negative;
    throw TraceError(Errc::ParseError, "unknown link label '" + std::string(name) + "'");
}

ordered_json provenance_to_json(const Provenance& p) {
    ordered_json j;
    switch (p.source) {
        case Provenance::Source::Original:
            j["source"] = "original";
            break;
        case Provenance::Source::Generated:
            j["source"] = "generated";
            j["model"] = p.model;
            j["template"] = template_kind_name(p.template_kind);
            break;
        case Provenance::Source::SampledNegative:
            j["source"] = "sampled_negative";
            j["seed"] = p.seed;
            break;
    }
    return j;
}

Provenance provenance_from_json(const ordered_json& j) {
    const std::string source = j.at("source").get<std::string>();
    if (source == "original") return Provenance::original();
    if (source == "generated") {
        return Provenance::generated(j.at("model").get<std::string>(),
                                     template_kind_from_name(j.at("template").get<std::string>()));
    }
    if (source == "sampled_negative") return Provenance::sampled_negative(j.at("seed").get<std::int64_t>());
    throw TraceError(Errc::ParseError, "unknown provenance source '" + source + "'");
}

const Artifact* TraceDataset::find(const std::string& id) const {
    auto it = artifacts.find(id);
    return it == artifacts.end() ? nullptr : &it->second;
}

const Artifact& TraceDataset::at(const std::string& id) const {
    const Artifact* a = find(id);
    if (a == nullptr) throw TraceError(Errc::UnknownArtifact, "no artifact with id '" + id + "'");
    return *a;
}

std::vector<const Artifact*> TraceDataset::artifacts_of(ArtifactKind kind) const {
    std::vector<const Artifact*> out;
    for (const auto& [id, artifact] : artifacts) {
        if (artifact.kind == kind) out.push_back(&artifact);
    }
    return out;
}

std::size_t TraceDataset::count_of(ArtifactKind kind) const {
    return artifacts_of(kind).size();
}

void TraceDataset::add_artifact(Artifact a) {
    auto [it, inserted] = artifacts.emplace(a.id, std::move(a));
    if (!inserted) {
        throw TraceError(Errc::DuplicateArtifact, "duplicate artifact id '" + it->first + "'");
    }
}

void TraceDataset::validate() const {
    for (const auto& [id, artifact] : artifacts) {
        if (id != artifact.id) {
            throw TraceError(Errc::ValidationError, "artifact map key '" + id + "' != id '" + artifact.id + "'");
        }
        if (trimmed(artifact.text).empty()) {
            throw TraceError(Errc::EmptyArtifact, "artifact '" + id + "' has empty text");
        }
        if (artifact.kind == ArtifactKind::PL && languages.count(artifact.lang) == 0) {
            throw TraceError(Errc::ValidationError,
                             "PL artifact '" + id + "' has undeclared language '" + artifact.lang + "'");
        }
    }
    std::set<std::tuple<std::string, std::string, LinkLabel>> seen;
    for (const TraceLink& link : links) {
        const Artifact& source = at(link.source_id);
        const Artifact& target = at(link.target_id);
        if (source.kind != ArtifactKind::NL) {
            throw TraceError(Errc::ValidationError, "link source '" + link.source_id + "' is not an NL artifact");
        }
        if (target.kind != ArtifactKind::PL) {
            throw TraceError(Errc::ValidationError, "link target '" + link.target_id + "' is not a PL artifact");
        }
        if (link.provenance.source == Provenance::Source::Original && link.label != LinkLabel::Positive) {
            throw TraceError(Errc::ValidationError,
                             "original link " + link.source_id + "->" + link.target_id + " is not positive");
        }
        if (link.provenance.source == Provenance::Source::SampledNegative && link.label != LinkLabel::Negative) {
            throw TraceError(Errc::ValidationError,
                             "sampled-negative link " + link.source_id + "->" + link.target_id + " is not negative");
        }
        if (!seen.emplace(link.source_id, link.target_id, link.label).second) {
            throw TraceError(Errc::ValidationError, "duplicate link (" + link.source_id + ", " + link.target_id +
                                                        ", " + std::string(link_label_name(link.label)) + ")");
        }
    }
}

std::string read_text_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw TraceError(Errc::IoError, "cannot open '" + file.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void write_text_file(const fs::path& file, const std::string& content) {
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw TraceError(Errc::IoError, "cannot write '" + file.string() + "'");
    out << content;
    if (!out) throw TraceError(Errc::IoError, "short write to '" + file.string() + "'");
}

TraceDataset ingest(const fs::path& dir) {
    const fs::path manifest_path = dir / "dataset.json";
    if (!fs::exists(manifest_path)) {
        throw TraceError(Errc::MissingManifest, "no dataset.json in '" + dir.string() + "'");
    }

    ordered_json manifest;
    try {
        manifest = ordered_json::parse(read_text_file(manifest_path));
    } catch (const nlohmann::json::exception& e) {
        throw TraceError(Errc::ParseError, manifest_path.string() + ": " + e.what());
    }

    TraceDataset ds;
    try {
        ds.name = manifest.at("name").get<std::string>();
        for (const auto& lang : manifest.at("languages")) {
            ds.languages.insert(lang.get<std::string>());
        }
        for (const auto& entry : manifest.at("artifacts")) {
            Artifact a;
            a.id = entry.at("id").get<std::string>();
            a.kind = artifact_kind_from_name(entry.at("kind").get<std::string>());
            a.lang = entry.at("lang").get<std::string>();
            const fs::path file = dir / entry.at("file").get<std::string>();
            a.text = read_text_file(file);
            if (trimmed(a.text).empty()) {
                throw TraceError(Errc::EmptyArtifact, "artifact file '" + file.string() + "' is empty");
            }
            ds.add_artifact(std::move(a));
        }
    } catch (const nlohmann::json::exception& e) {
        throw TraceError(Errc::ParseError, manifest_path.string() + ": " + e.what());
    }

    const fs::path answers_path = dir / "answers.tsv";
    if (fs::exists(answers_path)) {
        std::istringstream in(read_text_file(answers_path));
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            const std::string stripped = trimmed(line);
            if (stripped.empty() || stripped[0] == '#') continue;
            const std::size_t tab = line.find('\t');
            if (tab == std::string::npos) {
                throw TraceError(Errc::ParseError, answers_path.string() + ":" + std::to_string(line_no) +
                                                       ": expected source<TAB>target");
            }
            TraceLink link;
            link.source_id = trimmed(line.substr(0, tab));
            link.target_id = trimmed(line.substr(tab + 1));
            link.label = LinkLabel::Positive;
            link.provenance = Provenance::original();
            for (const std::string& id : {link.source_id, link.target_id}) {
                if (ds.find(id) == nullptr) {
                    throw TraceError(Errc::UnknownArtifact, answers_path.string() + ":" + std::to_string(line_no) +
                                                                ": unknown artifact '" + id + "'");
                }
            }
            ds.links.push_back(std::move(link));
        }
    }

    ds.validate();
    return ds;
}

void save(const TraceDataset& ds, const fs::path& file) {
    ordered_json j;
    j["format"] = "trace-dataset/1";
    j["name"] = ds.name;
    j["languages"] = ordered_json::array();
    for (const std::string& lang : ds.languages) j["languages"].push_back(lang);
    j["artifacts"] = ordered_json::array();
    for (const auto& [id, artifact] : ds.artifacts) {
        ordered_json entry;
        entry["id"] = artifact.id;
        entry["kind"] = artifact_kind_name(artifact.kind);
        entry["lang"] = artifact.lang;
        entry["text"] = artifact.text;
        j["artifacts"].push_back(std::move(entry));
    }
    j["links"] = ordered_json::array();
    for (const TraceLink& link : ds.links) {
        ordered_json entry;
        entry["source_id"] = link.source_id;
        entry["target_id"] = link.target_id;
        entry["label"] = link_label_name(link.label);
        entry["provenance"] = provenance_to_json(link.provenance);
        j["links"].push_back(std::move(entry));
    }
    write_text_file(file, j.dump(2) + "\n");
}

TraceDataset load(const fs::path& file) {
    ordered_json j;
    try {
        j = ordered_json::parse(read_text_file(file));
    } catch (const nlohmann::json::exception& e) {
        throw TraceError(Errc::ParseError, file.string() + ": " + e.what());
    }
    TraceDataset ds;
    try {
        if (j.at("format").get<std::string>() != "trace-dataset/1") {
            throw TraceError(Errc::ParseError, file.string() + ": unsupported dataset format");
        }
        ds.name = j.at("name").get<std::string>();
        for (const auto& lang : j.at("languages")) ds.languages.insert(lang.get<std::string>());
        for (const auto& entry : j.at("artifacts")) {
            Artifact a;
            a.id = entry.at("id").get<std::string>();
            a.kind = artifact_kind_from_name(entry.at("kind").get<std::string>());
            a.lang = entry.at("lang").get<std::string>();
            a.text = entry.at("text").get<std::string>();
            ds.add_artifact(std::move(a));
        }
        for (const auto& entry : j.at("links")) {
            TraceLink link;
            link.source_id = entry.at("source_id").get<std::string>();
            link.target_id = entry.at("target_id").get<std::string>();
            link.label = link_label_from_name(entry.at("label").get<std::string>());
            link.provenance = provenance_from_json(entry.at("provenance"));
            ds.links.push_back(std::move(link));
        }
    } catch (const nlohmann::json::exception& e) {
        throw TraceError(Errc::ParseError, file.string() + ": " + e.what());
    }
    ds.validate();
    return ds;
}

}  // namespace trace
