#include "trace/dataset_ops.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include "trace/error.hpp"
#include "trace/postprocess.hpp"
#include "trace/rng.hpp"

namespace trace {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string generated_id(TemplateKind kind, const std::string& provider, const std::string& basis_id) {
    return "gen:" + std::string(template_kind_name(kind)) + ":" + provider + ":" + basis_id;
}

}  // namespace

TraceDataset augment(const TraceDataset& ds, TemplateKind kind, const ProviderConfig& provider,
                     GenerationLog* log, AugmentStats* stats_out) {
    const std::vector<PromptInstance> plan = prompts::plan_prompts(ds, kind);
    AugmentStats stats;
    stats.planned = plan.size();
    if (plan.empty()) {
        throw TraceError(Errc::AugmentationEmpty,
                         "no basis artifacts to augment in dataset '" + ds.name + "'");
    }

    const BatchResult batch = generate_batch(provider, plan, log);
    stats.provider_failures = batch.failures.size();

    TraceDataset out = ds;
    const bool to_code = generates_code(kind);
    const std::string lang = to_code ? *ds.languages.begin() : std::string("en");

    for (const GenerationRecord& record : batch.records) {
        std::string cleaned;
        try {
            cleaned = to_code ? extract_code(record.raw_output).text
                              : extract_requirement(record.raw_output).text;
        } catch (const TraceError&) {
            ++stats.cleaning_skips;
            continue;
        }

        Artifact artifact;
        artifact.id = generated_id(kind, provider.name, record.prompt.basis_artifact_id);
        artifact.kind = to_code ? ArtifactKind::PL : ArtifactKind::NL;
        artifact.text = cleaned;
        artifact.lang = lang;
        out.add_artifact(std::move(artifact));

        TraceLink link;
        if (to_code) {
            link.source_id = record.prompt.basis_artifact_id;
            link.target_id = generated_id(kind, provider.name, record.prompt.basis_artifact_id);
        } else {
            link.source_id = generated_id(kind, provider.name, record.prompt.basis_artifact_id);
            link.target_id = record.prompt.basis_artifact_id;
        }
        link.label = LinkLabel::Positive;
        link.provenance = Provenance::generated(provider.name, kind);
        out.links.push_back(std::move(link));
        ++stats.generated;
    }

    if (stats.generated == 0) {
        throw TraceError(Errc::AugmentationEmpty,
                         "all " + std::to_string(stats.planned) + " generations failed for dataset '" +
                             ds.name + "'");
    }
    out.validate();
    if (stats_out != nullptr) *stats_out = stats;
    return out;
}

std::vector<LabeledPair> sample_negatives(const TraceDataset& ds, std::int64_t seed) {
    const std::vector<const Artifact*> pls = ds.artifacts_of(ArtifactKind::PL);

    // positive PL ids per NL, plus a global positive-pair set for the final check
    std::map<std::string, std::set<std::string>> linked;
    std::set<std::pair<std::string, std::string>> positive_pairs;
    for (const TraceLink& link : ds.links) {
        if (link.label != LinkLabel::Positive) continue;
        linked[link.source_id].insert(link.target_id);
        positive_pairs.emplace(link.source_id, link.target_id);
    }

    Rng rng(static_cast<std::uint64_t>(seed));
    std::vector<LabeledPair> out;
    for (const TraceLink& link : ds.links) {
        if (link.label != LinkLabel::Positive) continue;
        const Artifact& nl = ds.at(link.source_id);
        const Artifact& pl = ds.at(link.target_id);

        LabeledPair positive;
        positive.nl_id = nl.id;
        positive.pl_id = pl.id;
        positive.nl_text = nl.text;
        positive.pl_text = pl.text;
        positive.label = 1;
        positive.origin = link.provenance;
        out.push_back(std::move(positive));

        std::vector<const Artifact*> candidates;
        const std::set<std::string>& taken = linked[nl.id];
        for (const Artifact* candidate : pls) {
            if (!taken.contains(candidate->id)) candidates.push_back(candidate);
        }
        if (candidates.empty()) {
            throw TraceError(Errc::NoNegativeCandidate,
                             "NL '" + nl.id + "' is positively linked to every PL artifact");
        }
        const Artifact& chosen = *candidates[rng.below(candidates.size())];

        LabeledPair negative;
        negative.nl_id = nl.id;
        negative.pl_id = chosen.id;
        negative.nl_text = nl.text;
        negative.pl_text = chosen.text;
        negative.label = 0;
        negative.origin = Provenance::sampled_negative(seed);
        out.push_back(std::move(negative));
    }

    for (const LabeledPair& pair : out) {
        if (pair.label == 0 && positive_pairs.contains({pair.nl_id, pair.pl_id})) {
            throw TraceError(Errc::ValidationError,
                             "sampled negative (" + pair.nl_id + ", " + pair.pl_id +
                                 ") collides with a positive pair");
        }
    }
    return out;
}

DatasetSplit split(const std::vector<LabeledPair>& pairs, std::int64_t seed) {
    const std::size_t n = pairs.size();
    if (n < 10) {
        throw TraceError(Errc::SplitTooSmall,
                         "need at least 10 pairs to split, got " + std::to_string(n));
    }

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(static_cast<std::uint64_t>(seed));
    rng.shuffle(order);

    DatasetSplit result;
    result.seed = seed;
    const std::size_t base = n / 10;
    const std::size_t rem = n % 10;
    std::size_t cursor = 0;
    for (std::size_t part = 0; part < 10; ++part) {
        const std::size_t size = base + (part < rem ? 1 : 0);
        std::vector<LabeledPair>& dest =
            part < 8 ? result.train : (part == 8 ? result.val : result.test);
        for (std::size_t k = 0; k < size; ++k) dest.push_back(pairs[order[cursor++]]);
    }
    return result;
}

ordered_json pair_to_json(const LabeledPair& pair) {
    ordered_json j;
    j["nl_id"] = pair.nl_id;
    j["pl_id"] = pair.pl_id;
    j["label"] = pair.label;
    j["origin"] = provenance_to_json(pair.origin);
    j["nl_text"] = pair.nl_text;
    j["pl_text"] = pair.pl_text;
    return j;
}

LabeledPair pair_from_json(const ordered_json& j) {
    LabeledPair pair;
    pair.nl_id = j.at("nl_id").get<std::string>();
    pair.pl_id = j.at("pl_id").get<std::string>();
    pair.label = j.at("label").get<int>();
    if (pair.label != 0 && pair.label != 1) {
        throw TraceError(Errc::ParseError, "pair label must be 0 or 1");
    }
    pair.origin = provenance_from_json(j.at("origin"));
    pair.nl_text = j.at("nl_text").get<std::string>();
    pair.pl_text = j.at("pl_text").get<std::string>();
    return pair;
}

void save_pairs_jsonl(const std::vector<LabeledPair>& pairs, const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw TraceError(Errc::IoError, "cannot open '" + file.string() + "' for writing");
    for (const LabeledPair& pair : pairs) out << pair_to_json(pair).dump() << '\n';
    if (!out) throw TraceError(Errc::IoError, "write to '" + file.string() + "' failed");
}

std::vector<LabeledPair> load_pairs_jsonl(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw TraceError(Errc::IoError, "cannot open '" + file.string() + "'");
    std::vector<LabeledPair> pairs;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            pairs.push_back(pair_from_json(ordered_json::parse(line)));
        } catch (const ordered_json::parse_error& e) {
            throw TraceError(Errc::ParseError,
                             file.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return pairs;
}

void save_split(const DatasetSplit& split, const std::filesystem::path& file) {
    ordered_json j;
    j["format"] = "trace-split/1";
    j["seed"] = split.seed;
    const std::array<std::pair<const char*, const std::vector<LabeledPair>*>, 3> parts = {
        {{"train", &split.train}, {"val", &split.val}, {"test", &split.test}}};
    for (const auto& [name, part] : parts) {
        ordered_json arr = ordered_json::array();
        for (const LabeledPair& pair : *part) arr.push_back(pair_to_json(pair));
        j[name] = std::move(arr);
    }
    std::ofstream out(file, std::ios::binary);
    if (!out) throw TraceError(Errc::IoError, "cannot open '" + file.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw TraceError(Errc::IoError, "write to '" + file.string() + "' failed");
}

DatasetSplit load_split(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw TraceError(Errc::IoError, "cannot open '" + file.string() + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
        throw TraceError(Errc::ParseError, file.string() + ": " + e.what());
    }
    if (!j.contains("format") || j["format"] != "trace-split/1") {
        throw TraceError(Errc::ParseError, file.string() + ": not a trace-split/1 file");
    }
    DatasetSplit split;
    split.seed = j.at("seed").get<std::int64_t>();
    const std::array<std::pair<const char*, std::vector<LabeledPair>*>, 3> parts = {
        {{"train", &split.train}, {"val", &split.val}, {"test", &split.test}}};
    for (const auto& [name, part] : parts) {
        for (const ordered_json& entry : j.at(name)) part->push_back(pair_from_json(entry));
    }
    return split;
}

}  // namespace trace
