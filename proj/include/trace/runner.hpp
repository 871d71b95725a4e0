#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "trace/baselines.hpp"
#include "trace/dataset_ops.hpp"
#include "trace/encoder.hpp"
#include "trace/evalstats.hpp"
#include "trace/llm_gateway.hpp"
#include "trace/single_model.hpp"

namespace trace {

inline constexpr const char* kTraceVersion = "0.1.0";

/// One declarative run description; every field is overridable from the CLI.
struct RunConfig {
    std::filesystem::path dataset_dir;  // ingest input
    std::filesystem::path out_dir;
    std::string template_name = "none";  // "none" or a template kind name
    ProviderConfig provider = ProviderConfig::mock();
    EncoderConfig encoder;
    TrainConfig train;  // seed field is replaced by each run seed
    std::vector<std::int64_t> seeds = {2014, 2015, 2016, 2017, 2018};
    BaselineConfig baselines;
    bool shuffle_labels = false;

    void validate() const;
    std::string condition_name() const;  // "none" or "<template>+<provider>"

    static RunConfig from_json(const nlohmann::ordered_json& j);
    nlohmann::ordered_json to_json() const;
};

RunConfig load_run_config(const std::filesystem::path& file);

// Stage entry points. Each validates its own prerequisites and reports a
// missing intermediate as PrerequisiteMissing naming the command to run.
void cmd_ingest(const RunConfig& cfg);
void cmd_augment(const RunConfig& cfg);
void cmd_sample(const RunConfig& cfg);
void cmd_split(const RunConfig& cfg);
void cmd_train(const RunConfig& cfg);
void cmd_eval(const RunConfig& cfg);
void cmd_baseline(const RunConfig& cfg);
void cmd_compare(const RunConfig& cfg);
void cmd_report(const RunConfig& cfg);

/// Groups per-seed reports by condition; the key ignores the seed.
struct ConditionGroup {
    std::string label;  // e.g. "none", "zero_shot_code+mock", "none/knn"
    std::vector<EvalReport> reports;  // one per seed
};

std::vector<ConditionGroup> collect_condition_groups(const std::filesystem::path& out_dir);

std::string condition_label(const ConditionDesc& desc);

}  // namespace trace
