#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "trace/error.hpp"
#include "trace/runner.hpp"

namespace {

struct CliOverrides {
    std::optional<std::string> config_file;
    std::optional<std::string> dataset_dir;
    std::optional<std::string> out_dir;
    std::optional<std::string> template_name;
    std::optional<std::string> provider_name;
    std::optional<std::string> provider_endpoint;
    std::optional<std::string> provider_model;
    std::optional<std::string> encoder_backend;
    std::optional<std::string> remote_endpoint;
    std::optional<int> remote_dimension;
    std::optional<int> max_seq_len;
    std::optional<int> embed_dim;
    std::optional<int> epochs;
    std::optional<double> learning_rate;
    std::optional<int> batch_size;
    std::optional<std::vector<std::int64_t>> seeds;
    bool shuffle_labels = false;
};

void add_common_options(CLI::App* cmd, CliOverrides& ov) {
    cmd->add_option("--config", ov.config_file, "JSON run configuration file");
    cmd->add_option("--dataset-dir", ov.dataset_dir, "Corpus directory to ingest");
    cmd->add_option("--out-dir", ov.out_dir, "Experiment output directory");
    cmd->add_option("--template", ov.template_name,
                    "Augmentation template (\"none\" for the unaugmented condition)");
    cmd->add_option("--provider-name", ov.provider_name, "LLM provider name (\"mock\" is built in)");
    cmd->add_option("--provider-endpoint", ov.provider_endpoint, "OpenAI-compatible base URL");
    cmd->add_option("--provider-model", ov.provider_model, "Model identifier sent to the provider");
    cmd->add_option("--encoder", ov.encoder_backend, "Encoder backend: desk_trainable or remote");
    cmd->add_option("--remote-endpoint", ov.remote_endpoint, "Remote encoder base URL");
    cmd->add_option("--remote-dimension", ov.remote_dimension, "Remote embedding dimension");
    cmd->add_option("--max-seq-len", ov.max_seq_len, "Token sequence cap for the encoder");
    cmd->add_option("--embed-dim", ov.embed_dim, "Trainable embedding dimension");
    cmd->add_option("--epochs", ov.epochs, "Training epochs");
    cmd->add_option("--learning-rate", ov.learning_rate, "Adam learning rate");
    cmd->add_option("--batch-size", ov.batch_size, "Training batch size");
    cmd->add_option("--seeds", ov.seeds, "Run seeds (space or comma separated)")
        ->delimiter(',');
    cmd->add_flag("--shuffle-labels", ov.shuffle_labels,
                  "Shuffle pair labels after sampling (control experiment)");
}

trace::RunConfig build_config(const CliOverrides& ov) {
    trace::RunConfig cfg;
    if (ov.config_file) cfg = trace::load_run_config(*ov.config_file);
    if (ov.dataset_dir) cfg.dataset_dir = *ov.dataset_dir;
    if (ov.out_dir) cfg.out_dir = *ov.out_dir;
    if (ov.template_name) cfg.template_name = *ov.template_name;
    if (ov.provider_name) {
        cfg.provider.name = *ov.provider_name;
        if (cfg.provider.is_mock()) cfg.provider = trace::ProviderConfig::mock();
    }
    if (ov.provider_endpoint) cfg.provider.endpoint = *ov.provider_endpoint;
    if (ov.provider_model) cfg.provider.model = *ov.provider_model;
    if (ov.encoder_backend) {
        cfg.encoder.backend = trace::encoder_backend_from_name(*ov.encoder_backend);
    }
    if (ov.remote_endpoint) cfg.encoder.remote_endpoint = *ov.remote_endpoint;
    if (ov.remote_dimension) cfg.encoder.remote_dimension = *ov.remote_dimension;
    if (ov.max_seq_len) cfg.encoder.max_seq_len = *ov.max_seq_len;
    if (ov.embed_dim) cfg.encoder.embed_dim = *ov.embed_dim;
    if (ov.epochs) cfg.train.epochs = *ov.epochs;
    if (ov.learning_rate) cfg.train.learning_rate = *ov.learning_rate;
    if (ov.batch_size) cfg.train.batch_size = *ov.batch_size;
    if (ov.seeds) cfg.seeds = *ov.seeds;
    if (ov.shuffle_labels) cfg.shuffle_labels = true;
    return cfg;
}

int fail(const std::string& code, const std::string& message) {
    nlohmann::ordered_json err;
    err["error"] = code;
    err["message"] = message;
    std::cerr << err.dump() << std::endl;
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Requirements-to-code traceability experiment runner"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string("trace ") + trace::kTraceVersion);

    const std::vector<std::pair<std::string, std::pair<std::string, void (*)(const trace::RunConfig&)>>>
        commands = {
            {"ingest", {"Read a corpus directory and persist the dataset", trace::cmd_ingest}},
            {"augment", {"Generate artifacts with an LLM template and extend the dataset",
                         trace::cmd_augment}},
            {"sample", {"Draw balanced positive/negative pairs per seed", trace::cmd_sample}},
            {"split", {"Split pairs into train/val/test per seed", trace::cmd_split}},
            {"train", {"Train the Single classifier per seed", trace::cmd_train}},
            {"eval", {"Evaluate trained models on the test split", trace::cmd_eval}},
            {"baseline", {"Run IR and ML baselines per seed", trace::cmd_baseline}},
            {"compare", {"Pairwise Wilcoxon tests across all conditions", trace::cmd_compare}},
            {"report", {"Write the aggregate markdown report and manifest", trace::cmd_report}},
        };

    std::map<const CLI::App*, void (*)(const trace::RunConfig&)> dispatch;
    CliOverrides ov;
    for (const auto& [name, entry] : commands) {
        CLI::App* cmd = app.add_subcommand(name, entry.first);
        add_common_options(cmd, ov);
        dispatch[cmd] = entry.second;
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const trace::RunConfig cfg = build_config(ov);
        for (const auto& [cmd, fn] : dispatch) {
            if (cmd->parsed()) {
                fn(cfg);
                return 0;
            }
        }
        return fail("config-error", "no command selected");
    } catch (const trace::TraceError& e) {
        return fail(std::string(trace::errc_name(e.code())), e.message());
    } catch (const std::exception& e) {
        return fail("internal-error", e.what());
    }
}
