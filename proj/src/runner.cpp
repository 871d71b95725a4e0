#include "trace/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "trace/error.hpp"
#include "trace/rng.hpp"

namespace trace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

bool is_baseline_method(const std::string& encoder) {
    for (const char* m : kIrMethods) {
        if (encoder == m) return true;
    }
    for (const char* m : kMlMethods) {
        if (encoder == m) return true;
    }
    return false;
}

fs::path condition_dir(const RunConfig& cfg) {
    return cfg.out_dir / "conditions" / cfg.condition_name();
}

fs::path seed_dir(const RunConfig& cfg, std::int64_t seed) {
    return condition_dir(cfg) / ("seed_" + std::to_string(seed));
}

void require_file(const fs::path& file, const std::string& producer) {
    if (!fs::exists(file)) {
        throw TraceError(Errc::PrerequisiteMissing,
                         "missing '" + file.string() + "'; run `trace " + producer + "` first");
    }
}

TraceDataset load_condition_dataset(const RunConfig& cfg) {
    if (cfg.template_name == "none") {
        const fs::path file = cfg.out_dir / "dataset.json";
        require_file(file, "ingest");
        return load(file);
    }
    const fs::path file = condition_dir(cfg) / "dataset.json";
    require_file(file, "augment");
    return load(file);
}

ConditionDesc model_condition(const RunConfig& cfg, const std::string& dataset_name,
                              std::int64_t seed) {
    ConditionDesc c;
    c.dataset = dataset_name;
    c.template_name = cfg.template_name;
    c.provider = cfg.template_name == "none" ? "none" : cfg.provider.name;
    c.encoder = std::string(encoder_backend_name(cfg.encoder.backend));
    c.max_seq_len = cfg.encoder.max_seq_len;
    c.seed = seed;
    return c;
}

std::string group_key(const ConditionDesc& d) {
    return d.dataset + "|" + d.template_name + "|" + d.provider + "|" + d.encoder + "|" +
           std::to_string(d.max_seq_len);
}

void write_json_file(const ordered_json& j, const fs::path& file) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw TraceError(Errc::IoError, "cannot open '" + file.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw TraceError(Errc::IoError, "write to '" + file.string() + "' failed");
}

ordered_json read_json_file(const fs::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw TraceError(Errc::IoError, "cannot open '" + file.string() + "'");
    try {
        return ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
        throw TraceError(Errc::ParseError, file.string() + ": " + e.what());
    }
}

void write_manifest(const RunConfig& cfg) {
    ordered_json manifest;
    manifest["format"] = "trace-manifest/1";
    manifest["version"] = kTraceVersion;
    manifest["config_hash"] = to_hex(fnv1a64(cfg.to_json().dump()), 16);
    manifest["seeds"] = cfg.seeds;
    manifest["condition"] = cfg.condition_name();
    write_json_file(manifest, cfg.out_dir / "manifest.json");
}

std::string format_mean_sd(const MetricSummary& s) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(4);
    os << s.mean << " ± " << s.sd;
    return os.str();
}

std::string format_p(double p) {
    std::ostringstream os;
    os.setf(std::ios::fixed);
    os.precision(6);
    os << p;
    return os.str();
}

}  // namespace

void RunConfig::validate() const {
    if (out_dir.empty()) throw TraceError(Errc::ConfigError, "out_dir must be set");
    if (seeds.empty()) throw TraceError(Errc::ConfigError, "seed list must be non-empty");
    std::set<std::int64_t> distinct(seeds.begin(), seeds.end());
    if (distinct.size() != seeds.size()) {
        throw TraceError(Errc::ConfigError, "seed list contains duplicates");
    }
    if (template_name != "none") template_kind_from_name(template_name);  // throws if unknown
    encoder.validate();
    train.validate();
    if (provider.max_parallel < 1) throw TraceError(Errc::ConfigError, "max_parallel must be >= 1");
    if (provider.retry.max_attempts < 1) {
        throw TraceError(Errc::ConfigError, "max_attempts must be >= 1");
    }
}

std::string RunConfig::condition_name() const {
    if (template_name == "none") return "none";
    return template_name + "+" + provider.name;
}

RunConfig RunConfig::from_json(const ordered_json& j) {
    RunConfig cfg;
    if (j.contains("dataset_dir")) cfg.dataset_dir = j["dataset_dir"].get<std::string>();
    if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
    if (j.contains("template")) cfg.template_name = j["template"].get<std::string>();
    if (j.contains("shuffle_labels")) cfg.shuffle_labels = j["shuffle_labels"].get<bool>();
    if (j.contains("seeds")) cfg.seeds = j["seeds"].get<std::vector<std::int64_t>>();
    if (j.contains("provider")) {
        const ordered_json& p = j["provider"];
        if (p.contains("name")) cfg.provider.name = p["name"].get<std::string>();
        if (p.contains("endpoint")) cfg.provider.endpoint = p["endpoint"].get<std::string>();
        if (p.contains("model")) cfg.provider.model = p["model"].get<std::string>();
        if (p.contains("auth_env")) cfg.provider.auth_env = p["auth_env"].get<std::string>();
        if (p.contains("max_parallel")) cfg.provider.max_parallel = p["max_parallel"].get<int>();
        if (p.contains("retry")) {
            const ordered_json& r = p["retry"];
            if (r.contains("max_attempts")) cfg.provider.retry.max_attempts = r["max_attempts"].get<int>();
            if (r.contains("backoff_base_seconds")) {
                cfg.provider.retry.backoff_base_seconds = r["backoff_base_seconds"].get<double>();
            }
        }
    }
    if (j.contains("encoder")) {
        const ordered_json& e = j["encoder"];
        if (e.contains("backend")) {
            cfg.encoder.backend = encoder_backend_from_name(e["backend"].get<std::string>());
        }
        if (e.contains("max_seq_len")) cfg.encoder.max_seq_len = e["max_seq_len"].get<int>();
        if (e.contains("embed_dim")) cfg.encoder.embed_dim = e["embed_dim"].get<int>();
        if (e.contains("remote_endpoint")) {
            cfg.encoder.remote_endpoint = e["remote_endpoint"].get<std::string>();
        }
        if (e.contains("remote_dimension")) {
            cfg.encoder.remote_dimension = e["remote_dimension"].get<int>();
        }
    }
    if (j.contains("train")) {
        const ordered_json& t = j["train"];
        if (t.contains("learning_rate")) cfg.train.learning_rate = t["learning_rate"].get<double>();
        if (t.contains("batch_size")) cfg.train.batch_size = t["batch_size"].get<int>();
        if (t.contains("epochs")) cfg.train.epochs = t["epochs"].get<int>();
    }
    if (j.contains("baselines")) {
        const ordered_json& b = j["baselines"];
        if (b.contains("knn_k")) cfg.baselines.knn_k = b["knn_k"].get<int>();
        if (b.contains("lr_rate")) cfg.baselines.lr_rate = b["lr_rate"].get<double>();
        if (b.contains("lr_epochs")) cfg.baselines.lr_epochs = b["lr_epochs"].get<int>();
        if (b.contains("lr_lambda")) cfg.baselines.lr_lambda = b["lr_lambda"].get<double>();
        if (b.contains("svm_lambda")) cfg.baselines.svm_lambda = b["svm_lambda"].get<double>();
        if (b.contains("svm_iterations")) cfg.baselines.svm_iterations = b["svm_iterations"].get<int>();
        if (b.contains("lsi_k_cap")) cfg.baselines.lsi_k_cap = b["lsi_k_cap"].get<int>();
        if (b.contains("lda_topics")) cfg.baselines.lda.topics = b["lda_topics"].get<int>();
        if (b.contains("lda_alpha")) cfg.baselines.lda.alpha = b["lda_alpha"].get<double>();
        if (b.contains("lda_beta")) cfg.baselines.lda.beta = b["lda_beta"].get<double>();
        if (b.contains("lda_iterations")) cfg.baselines.lda.iterations = b["lda_iterations"].get<int>();
    }
    return cfg;
}

ordered_json RunConfig::to_json() const {
    ordered_json j;
    j["dataset_dir"] = dataset_dir.string();
    j["out_dir"] = out_dir.string();
    j["template"] = template_name;
    j["shuffle_labels"] = shuffle_labels;
    j["seeds"] = seeds;
    j["provider"] = ordered_json{{"name", provider.name},
                                 {"endpoint", provider.endpoint},
                                 {"model", provider.model},
                                 {"auth_env", provider.auth_env},
                                 {"max_parallel", provider.max_parallel},
                                 {"retry",
                                  ordered_json{{"max_attempts", provider.retry.max_attempts},
                                               {"backoff_base_seconds", provider.retry.backoff_base_seconds}}}};
    j["encoder"] = ordered_json{{"backend", std::string(encoder_backend_name(encoder.backend))},
                                {"max_seq_len", encoder.max_seq_len},
                                {"embed_dim", encoder.embed_dim},
                                {"remote_endpoint", encoder.remote_endpoint},
                                {"remote_dimension", encoder.remote_dimension}};
    j["train"] = ordered_json{{"learning_rate", train.learning_rate},
                              {"batch_size", train.batch_size},
                              {"epochs", train.epochs}};
    j["baselines"] = ordered_json{{"knn_k", baselines.knn_k},
                                  {"lr_rate", baselines.lr_rate},
                                  {"lr_epochs", baselines.lr_epochs},
                                  {"lr_lambda", baselines.lr_lambda},
                                  {"svm_lambda", baselines.svm_lambda},
                                  {"svm_iterations", baselines.svm_iterations},
                                  {"lsi_k_cap", baselines.lsi_k_cap},
                                  {"lda_topics", baselines.lda.topics},
                                  {"lda_alpha", baselines.lda.alpha},
                                  {"lda_beta", baselines.lda.beta},
                                  {"lda_iterations", baselines.lda.iterations}};
    return j;
}

RunConfig load_run_config(const fs::path& file) {
    if (!fs::exists(file)) {
        throw TraceError(Errc::ConfigError, "config file '" + file.string() + "' does not exist");
    }
    return RunConfig::from_json(read_json_file(file));
}

std::string condition_label(const ConditionDesc& desc) {
    std::string label =
        desc.template_name == "none" ? "none" : desc.template_name + "+" + desc.provider;
    if (is_baseline_method(desc.encoder)) label += "/" + desc.encoder;
    return label;
}

void cmd_ingest(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.dataset_dir.empty()) {
        throw TraceError(Errc::ConfigError, "dataset_dir must be set for ingest");
    }
    const TraceDataset ds = ingest(cfg.dataset_dir);
    fs::create_directories(cfg.out_dir);
    save(ds, cfg.out_dir / "dataset.json");
    write_manifest(cfg);
}

void cmd_augment(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.template_name == "none") {
        throw TraceError(Errc::ConfigError, "augment needs a template (got \"none\")");
    }
    const fs::path base_file = cfg.out_dir / "dataset.json";
    require_file(base_file, "ingest");
    const TraceDataset ds = load(base_file);

    const fs::path dir = condition_dir(cfg);
    fs::create_directories(dir);
    const fs::path log_path = dir / "generations.jsonl";
    if (fs::exists(log_path)) fs::remove(log_path);  // records are per-run; rerun replaces
    GenerationLog log(log_path.string());

    AugmentStats stats;
    const TraceDataset augmented =
        augment(ds, template_kind_from_name(cfg.template_name), cfg.provider, &log, &stats);
    save(augmented, dir / "dataset.json");

    ordered_json summary;
    summary["planned"] = stats.planned;
    summary["generated"] = stats.generated;
    summary["provider_failures"] = stats.provider_failures;
    summary["cleaning_skips"] = stats.cleaning_skips;
    write_json_file(summary, dir / "augment_stats.json");
    write_manifest(cfg);
}

void cmd_sample(const RunConfig& cfg) {
    cfg.validate();
    const TraceDataset ds = load_condition_dataset(cfg);
    for (const std::int64_t seed : cfg.seeds) {
        std::vector<LabeledPair> pairs = sample_negatives(ds, seed);
        if (cfg.shuffle_labels) {
            // control experiment: permute the labels, breaking pair/label ties
            std::vector<int> labels;
            labels.reserve(pairs.size());
            for (const LabeledPair& p : pairs) labels.push_back(p.label);
            Rng rng(static_cast<std::uint64_t>(seed) ^ 0x5c0ffee5ULL);
            rng.shuffle(labels);
            for (std::size_t i = 0; i < pairs.size(); ++i) pairs[i].label = labels[i];
        }
        const fs::path dir = seed_dir(cfg, seed);
        fs::create_directories(dir);
        save_pairs_jsonl(pairs, dir / "pairs.jsonl");
    }
    write_manifest(cfg);
}

void cmd_split(const RunConfig& cfg) {
    cfg.validate();
    for (const std::int64_t seed : cfg.seeds) {
        const fs::path dir = seed_dir(cfg, seed);
        require_file(dir / "pairs.jsonl", "sample");
        const std::vector<LabeledPair> pairs = load_pairs_jsonl(dir / "pairs.jsonl");
        save_split(split(pairs, seed), dir / "splits.json");
    }
    write_manifest(cfg);
}

void cmd_train(const RunConfig& cfg) {
    cfg.validate();
    for (const std::int64_t seed : cfg.seeds) {
        const fs::path dir = seed_dir(cfg, seed);
        require_file(dir / "splits.json", "split");
        const DatasetSplit splits = load_split(dir / "splits.json");

        TrainConfig train_cfg = cfg.train;
        train_cfg.seed = seed;
        const TrainResult result = train(splits, train_cfg, cfg.encoder);
        save_model(result.params, dir / "model.json");

        std::ofstream epochs(dir / "epochs.jsonl", std::ios::binary);
        if (!epochs) throw TraceError(Errc::IoError, "cannot open epochs.jsonl for writing");
        for (const EpochLog& log : result.epochs) {
            ordered_json line;
            line["epoch"] = log.epoch;
            line["train_loss"] = log.train_loss;
            line["val_accuracy"] = log.val_accuracy;
            line["val_f1"] = log.val_f1;
            line["best"] = log.epoch == result.best_epoch;
            epochs << line.dump() << '\n';
        }
    }
    write_manifest(cfg);
}

void cmd_eval(const RunConfig& cfg) {
    cfg.validate();
    std::string dataset_name;
    {
        const TraceDataset ds = load_condition_dataset(cfg);
        dataset_name = ds.name;
    }
    for (const std::int64_t seed : cfg.seeds) {
        const fs::path dir = seed_dir(cfg, seed);
        require_file(dir / "splits.json", "split");
        require_file(dir / "model.json", "train");
        const DatasetSplit splits = load_split(dir / "splits.json");
        const ModelParams params = load_model(dir / "model.json");

        std::vector<int> predictions, labels;
        predictions.reserve(splits.test.size());
        labels.reserve(splits.test.size());
        for (const LabeledPair& pair : splits.test) {
            predictions.push_back(predict(pair, params));
            labels.push_back(pair.label);
        }
        EvalReport report = compute_metrics(predictions, labels);
        report.condition = model_condition(cfg, dataset_name, seed);
        write_json_file(report_to_json(report), dir / "report.json");
    }
    write_manifest(cfg);
}

void cmd_baseline(const RunConfig& cfg) {
    cfg.validate();
    std::string dataset_name;
    {
        const TraceDataset ds = load_condition_dataset(cfg);
        dataset_name = ds.name;
    }
    for (const std::int64_t seed : cfg.seeds) {
        const fs::path dir = seed_dir(cfg, seed);
        require_file(dir / "splits.json", "split");
        const DatasetSplit splits = load_split(dir / "splits.json");

        BaselineConfig bl_cfg = cfg.baselines;
        bl_cfg.seed = seed;
        bl_cfg.lda.seed = seed;
        const std::vector<BaselineOutcome> outcomes =
            run_baselines(splits, bl_cfg, model_condition(cfg, dataset_name, seed));

        std::ofstream out(dir / "baselines.jsonl", std::ios::binary);
        if (!out) throw TraceError(Errc::IoError, "cannot open baselines.jsonl for writing");
        for (const BaselineOutcome& outcome : outcomes) {
            ordered_json line;
            line["method"] = outcome.method;
            // JSON has no +-inf; an infinite tuned threshold (degenerate
            // "predict everything"/"predict nothing" cut) becomes null.
            if (std::isfinite(outcome.threshold)) {
                line["threshold"] = outcome.threshold;
            } else {
                line["threshold"] = nullptr;
            }
            line["report"] = report_to_json(outcome.report);
            out << line.dump() << '\n';
        }
    }
    write_manifest(cfg);
}

std::vector<ConditionGroup> collect_condition_groups(const fs::path& out_dir) {
    const fs::path conditions = out_dir / "conditions";
    std::map<std::string, ConditionGroup> groups;  // key -> group, sorted

    if (!fs::exists(conditions)) return {};
    std::vector<fs::path> cond_dirs;
    for (const auto& entry : fs::directory_iterator(conditions)) {
        if (entry.is_directory()) cond_dirs.push_back(entry.path());
    }
    std::sort(cond_dirs.begin(), cond_dirs.end());

    for (const fs::path& cond : cond_dirs) {
        std::vector<fs::path> seed_dirs;
        for (const auto& entry : fs::directory_iterator(cond)) {
            if (entry.is_directory() && entry.path().filename().string().starts_with("seed_")) {
                seed_dirs.push_back(entry.path());
            }
        }
        std::sort(seed_dirs.begin(), seed_dirs.end());
        for (const fs::path& sdir : seed_dirs) {
            const fs::path report_file = sdir / "report.json";
            if (fs::exists(report_file)) {
                EvalReport report = report_from_json(read_json_file(report_file));
                ConditionGroup& group = groups[group_key(report.condition)];
                group.label = condition_label(report.condition);
                group.reports.push_back(std::move(report));
            }
            const fs::path baselines_file = sdir / "baselines.jsonl";
            if (fs::exists(baselines_file)) {
                std::ifstream in(baselines_file, std::ios::binary);
                std::string line;
                while (std::getline(in, line)) {
                    if (line.empty()) continue;
                    EvalReport report = report_from_json(ordered_json::parse(line).at("report"));
                    ConditionGroup& group = groups[group_key(report.condition)];
                    group.label = condition_label(report.condition);
                    group.reports.push_back(std::move(report));
                }
            }
        }
    }

    std::vector<ConditionGroup> out;
    for (auto& [key, group] : groups) out.push_back(std::move(group));
    return out;
}

void cmd_compare(const RunConfig& cfg) {
    cfg.validate();
    const std::vector<ConditionGroup> groups = collect_condition_groups(cfg.out_dir);
    if (groups.size() < 2) {
        throw TraceError(Errc::PrerequisiteMissing,
                         "compare needs at least two evaluated conditions; run `trace eval` first");
    }

    std::ofstream csv(cfg.out_dir / "pvalues.csv", std::ios::binary);
    if (!csv) throw TraceError(Errc::IoError, "cannot open pvalues.csv for writing");
    csv << "metric,condition_a,condition_b,n_effective,method,p_value\n";
    for (const char* metric : kMetricNames) {
        for (std::size_t i = 0; i < groups.size(); ++i) {
            for (std::size_t j = i + 1; j < groups.size(); ++j) {
                const auto [a, b] = paired_metric(groups[i].reports, groups[j].reports, metric);
                const WilcoxonResult w = wilcoxon(a, b);
                csv << metric << ',' << groups[i].label << ',' << groups[j].label << ','
                    << w.n_effective << ','
                    << (w.method == WilcoxonResult::Method::Exact ? "exact" : "normal_approx") << ','
                    << format_p(w.p_value) << '\n';
            }
        }
    }
    if (!csv) throw TraceError(Errc::IoError, "write to pvalues.csv failed");
    write_manifest(cfg);
}

void cmd_report(const RunConfig& cfg) {
    cfg.validate();
    const std::vector<ConditionGroup> groups = collect_condition_groups(cfg.out_dir);
    if (groups.empty()) {
        throw TraceError(Errc::PrerequisiteMissing,
                         "no evaluated conditions found; run `trace eval` first");
    }
    const bool has_none = std::any_of(groups.begin(), groups.end(), [](const ConditionGroup& g) {
        return g.label == "none";
    });
    if (!has_none) {
        throw TraceError(Errc::PrerequisiteMissing,
                         "the \"none\" control condition is required; run the pipeline with "
                         "template \"none\" first");
    }

    std::ostringstream md;
    md << "# Traceability experiment report\n\n";
    md << "Version: " << kTraceVersion << "\n\n";

    std::set<std::string> datasets;
    for (const ConditionGroup& g : groups) {
        for (const EvalReport& r : g.reports) datasets.insert(r.condition.dataset);
    }
    md << "Datasets: ";
    bool first = true;
    for (const std::string& d : datasets) {
        if (!first) md << ", ";
        md << d;
        first = false;
    }
    md << "\n\n## Conditions (mean ± sd over seeds)\n\n";
    md << "| condition | seeds | accuracy | precision | recall | f1 | f2 |\n";
    md << "|---|---|---|---|---|---|---|\n";
    for (const ConditionGroup& g : groups) {
        const auto summary = aggregate(g.reports);
        md << "| " << g.label << " | " << g.reports.size();
        for (const char* metric : kMetricNames) md << " | " << format_mean_sd(summary.at(metric));
        md << " |\n";
    }

    for (const char* metric : kMetricNames) {
        md << "\n## Wilcoxon signed-rank p-values: " << metric << "\n\n";
        md << "| condition |";
        for (const ConditionGroup& g : groups) md << " " << g.label << " |";
        md << "\n|---|";
        for (std::size_t i = 0; i < groups.size(); ++i) md << "---|";
        md << "\n";
        for (std::size_t i = 0; i < groups.size(); ++i) {
            md << "| " << groups[i].label << " |";
            for (std::size_t j = 0; j < groups.size(); ++j) {
                if (i == j) {
                    md << " — |";
                    continue;
                }
                try {
                    const auto [a, b] = paired_metric(groups[i].reports, groups[j].reports, metric);
                    md << " " << format_p(wilcoxon(a, b).p_value) << " |";
                } catch (const TraceError&) {
                    md << " n/a |";  // seed sets differ
                }
            }
            md << "\n";
        }
    }
    md << "\nThresholds for IR baselines are tuned on validation F1; the Single model predicts by "
          "argmax.\n";

    std::ofstream out(cfg.out_dir / "report.md", std::ios::binary);
    if (!out) throw TraceError(Errc::IoError, "cannot open report.md for writing");
    out << md.str();
    if (!out) throw TraceError(Errc::IoError, "write to report.md failed");
    write_manifest(cfg);
}

}  // namespace trace
