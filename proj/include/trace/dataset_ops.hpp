#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trace/corpus.hpp"
#include "trace/llm_gateway.hpp"
#include "trace/template_kind.hpp"

namespace trace {

/// One training-ready (NL, PL) pair. Ids are audit fields pointing back at
/// the dataset artifacts; texts are copied so pairs stand alone on disk.
struct LabeledPair {
    std::string nl_id;
    std::string pl_id;
    std::string nl_text;
    std::string pl_text;
    int label = 0;  // 1 = linked, 0 = unlinked
    Provenance origin;

    bool operator==(const LabeledPair&) const = default;
};

struct DatasetSplit {
    std::vector<LabeledPair> train;
    std::vector<LabeledPair> val;
    std::vector<LabeledPair> test;
    std::int64_t seed = 0;
};

struct AugmentStats {
    std::size_t planned = 0;
    std::size_t generated = 0;
    std::size_t provider_failures = 0;
    std::size_t cleaning_skips = 0;
};

/// Generates one counterpart artifact per basis artifact (the few-shot
/// example basis excluded) and appends Positive Generated links. The input
/// dataset is never mutated; the result strictly contains it.
TraceDataset augment(const TraceDataset& ds, TemplateKind kind, const ProviderConfig& provider,
                     GenerationLog* log = nullptr, AugmentStats* stats_out = nullptr);

/// Returns every positive link as a label-1 pair, each immediately followed
/// by one seeded-uniform negative for the same NL (balanced 1:1).
std::vector<LabeledPair> sample_negatives(const TraceDataset& ds, std::int64_t seed);

/// Seeded shuffle, then ten contiguous parts: part i gets floor(N/10) + (1 if
/// i < N mod 10). Parts 0-7 train, 8 val, 9 test.
DatasetSplit split(const std::vector<LabeledPair>& pairs, std::int64_t seed);

nlohmann::ordered_json pair_to_json(const LabeledPair& pair);
LabeledPair pair_from_json(const nlohmann::ordered_json& j);

void save_pairs_jsonl(const std::vector<LabeledPair>& pairs, const std::filesystem::path& file);
std::vector<LabeledPair> load_pairs_jsonl(const std::filesystem::path& file);

void save_split(const DatasetSplit& split, const std::filesystem::path& file);
DatasetSplit load_split(const std::filesystem::path& file);

}  // namespace trace
