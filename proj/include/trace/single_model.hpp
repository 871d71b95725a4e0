#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trace/dataset_ops.hpp"
#include "trace/encoder.hpp"
#include "trace/evalstats.hpp"

namespace trace {

/// Pair classifier: encoder features -> affine head over 2 classes.
struct ModelParams {
    EncoderConfig encoder;
    Vocabulary vocab;     // DeskTrainable only
    Embedding embedding;  // DeskTrainable only
    std::vector<double> W;  // 2 x feature_dim, row-major
    std::vector<double> b;  // 2
};

struct TrainConfig {
    double learning_rate = 1e-2;  // reference setting: 1e-5
    int batch_size = 8;
    int epochs = 20;
    std::int64_t seed = 2014;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;

    void validate() const;  // throws ConfigError
};

inline constexpr std::int64_t kDefaultSeeds[5] = {2014, 2015, 2016, 2017, 2018};

struct Forward {
    std::array<double, 2> logits{};
    std::array<double, 2> probs{};
};

Forward forward(const LabeledPair& pair, const ModelParams& params);

/// Cross-entropy -ln p[label], computed in log space from the logits.
double cross_entropy(const std::array<double, 2>& logits, int label);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
};

/// One elementwise Adam update; t is the 1-based step index.
void adam_step(std::vector<double>& theta, const std::vector<double>& grad, AdamState& state,
               const TrainConfig& cfg, int t, const char* param_name);

/// Mean loss and mean analytic gradients over one batch (desk backend).
struct BatchGradients {
    double loss = 0;
    std::vector<double> w;          // 2 x feature_dim
    std::vector<double> b;          // 2
    std::vector<double> embedding;  // rows x dim, dense
};

BatchGradients batch_gradients(const std::vector<LabeledPair>& batch, const ModelParams& params);

struct EpochLog {
    int epoch = 0;
    double train_loss = 0;  // mean per-example loss over the epoch
    double val_accuracy = 0;
    double val_f1 = 0;
};

struct TrainResult {
    ModelParams params;  // checkpoint with the best validation F1 (tie -> earlier)
    std::vector<EpochLog> epochs;
    int best_epoch = 0;
    double best_val_f1 = 0;
};

TrainResult train(const DatasetSplit& splits, const TrainConfig& cfg, const EncoderConfig& enc_cfg);

int predict(const LabeledPair& pair, const ModelParams& params);  // tie -> 0

void save_model(const ModelParams& params, const std::filesystem::path& file);
ModelParams load_model(const std::filesystem::path& file);

}  // namespace trace
