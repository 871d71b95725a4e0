#include "trace/single_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "trace/error.hpp"
#include "trace/rng.hpp"

namespace trace {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<int> pair_sequence(const LabeledPair& pair, const Vocabulary& vocab,
                               const EncoderConfig& cfg) {
    return join_and_truncate(tokenize(pair.nl_text, ArtifactKind::NL),
                             tokenize(pair.pl_text, ArtifactKind::PL), vocab, cfg);
}

std::vector<double> pair_feature(const LabeledPair& pair, const ModelParams& params) {
    if (params.encoder.backend == EncoderBackend::Remote) {
        return encode_remote(pair.nl_text, pair.pl_text, params.encoder);
    }
    return encode(pair_sequence(pair, params.vocab, params.encoder), params.embedding);
}

Forward head_forward(const std::vector<double>& feature, const ModelParams& params) {
    const std::size_t d = feature.size();
    Forward out;
    for (int c = 0; c < 2; ++c) {
        double z = params.b[static_cast<std::size_t>(c)];
        const double* w = params.W.data() + static_cast<std::size_t>(c) * d;
        for (std::size_t j = 0; j < d; ++j) z += w[j] * feature[j];
        out.logits[static_cast<std::size_t>(c)] = z;
    }
    const double m = std::max(out.logits[0], out.logits[1]);
    const double e0 = std::exp(out.logits[0] - m);
    const double e1 = std::exp(out.logits[1] - m);
    out.probs[0] = e0 / (e0 + e1);
    out.probs[1] = e1 / (e0 + e1);
    return out;
}

ConditionDesc val_condition() {
    ConditionDesc c;
    c.dataset = "val";
    return c;
}

/// Adds one pair's contribution (scaled by 1/batch_n) to the mean-gradient
/// accumulators and returns its loss. `seq` is null for the remote backend,
/// where the embedding table has no gradient.
double pair_backward(const std::vector<double>& feature, const std::vector<int>* seq, int label,
                     const ModelParams& params, double batch_n, std::vector<double>& grad_w,
                     std::vector<double>& grad_b, std::vector<double>& grad_emb) {
    const std::size_t d = feature.size();
    const Forward fwd = head_forward(feature, params);
    const double loss = cross_entropy(fwd.logits, label);

    std::array<double, 2> dlogits = fwd.probs;
    dlogits[static_cast<std::size_t>(label)] -= 1.0;
    for (int c = 0; c < 2; ++c) {
        const double g = dlogits[static_cast<std::size_t>(c)] / batch_n;
        grad_b[static_cast<std::size_t>(c)] += g;
        double* gw = grad_w.data() + static_cast<std::size_t>(c) * d;
        for (std::size_t j = 0; j < d; ++j) gw[j] += g * feature[j];
    }
    if (seq != nullptr) {
        // feature = mean of embedding rows over non-PAD positions, so each
        // occurrence receives dL/dfeature / occupied.
        std::size_t occupied = 0;
        for (int idx : *seq) {
            if (idx != Vocabulary::kPad) ++occupied;
        }
        const double inv_occ = 1.0 / static_cast<double>(occupied);
        for (int idx : *seq) {
            if (idx == Vocabulary::kPad) continue;
            double* ge = grad_emb.data() + static_cast<std::size_t>(idx) * d;
            for (std::size_t j = 0; j < d; ++j) {
                const double df = params.W[j] * dlogits[0] + params.W[d + j] * dlogits[1];
                ge[j] += df * inv_occ / batch_n;
            }
        }
    }
    return loss;
}

}  // namespace

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw TraceError(Errc::ConfigError, "learning_rate must be > 0");
    if (batch_size < 1) throw TraceError(Errc::ConfigError, "batch_size must be >= 1");
    if (epochs < 1) throw TraceError(Errc::ConfigError, "epochs must be >= 1");
}

Forward forward(const LabeledPair& pair, const ModelParams& params) {
    return head_forward(pair_feature(pair, params), params);
}

BatchGradients batch_gradients(const std::vector<LabeledPair>& batch, const ModelParams& params) {
    if (batch.empty()) throw TraceError(Errc::NotEnoughData, "gradient batch is empty");
    if (params.encoder.backend != EncoderBackend::DeskTrainable) {
        throw TraceError(Errc::ConfigError, "batch_gradients requires the desk_trainable backend");
    }
    BatchGradients out;
    out.w.assign(params.W.size(), 0.0);
    out.b.assign(params.b.size(), 0.0);
    out.embedding.assign(params.embedding.values.size(), 0.0);
    const double batch_n = static_cast<double>(batch.size());
    for (const LabeledPair& pair : batch) {
        const std::vector<int> seq = pair_sequence(pair, params.vocab, params.encoder);
        const std::vector<double> feature = encode(seq, params.embedding);
        out.loss += pair_backward(feature, &seq, pair.label, params, batch_n, out.w, out.b,
                                  out.embedding) /
                    batch_n;
    }
    return out;
}

double cross_entropy(const std::array<double, 2>& logits, int label) {
    if (label != 0 && label != 1) throw TraceError(Errc::ValidationError, "label must be 0 or 1");
    const double m = std::max(logits[0], logits[1]);
    const double lse = m + std::log(std::exp(logits[0] - m) + std::exp(logits[1] - m));
    return lse - logits[static_cast<std::size_t>(label)];
}

void adam_step(std::vector<double>& theta, const std::vector<double>& grad, AdamState& state,
               const TrainConfig& cfg, int t, const char* param_name) {
    if (theta.size() != grad.size()) {
        throw TraceError(Errc::LengthMismatch,
                         std::string("gradient shape mismatch for parameter ") + param_name);
    }
    if (t < 1) throw TraceError(Errc::ConfigError, "adam step index must be >= 1");
    if (state.m.empty()) {
        state.m.assign(theta.size(), 0.0);
        state.v.assign(theta.size(), 0.0);
    }
    if (state.m.size() != theta.size()) {
        throw TraceError(Errc::LengthMismatch,
                         std::string("adam state shape mismatch for parameter ") + param_name);
    }
    const double bc1 = 1.0 - std::pow(cfg.beta1, t);
    const double bc2 = 1.0 - std::pow(cfg.beta2, t);
    for (std::size_t i = 0; i < theta.size(); ++i) {
        const double g = grad[i];
        if (!std::isfinite(g)) {
            throw TraceError(Errc::NonFinite,
                             std::string("non-finite gradient for parameter ") + param_name);
        }
        state.m[i] = cfg.beta1 * state.m[i] + (1.0 - cfg.beta1) * g;
        state.v[i] = cfg.beta2 * state.v[i] + (1.0 - cfg.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        theta[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
    }
}

TrainResult train(const DatasetSplit& splits, const TrainConfig& cfg, const EncoderConfig& enc_cfg) {
    cfg.validate();
    enc_cfg.validate();
    if (splits.train.empty() || splits.val.empty()) {
        throw TraceError(Errc::NotEnoughData, "train and val splits must be non-empty");
    }

    const bool remote = enc_cfg.backend == EncoderBackend::Remote;
    Rng rng(static_cast<std::uint64_t>(cfg.seed));

    ModelParams params;
    params.encoder = enc_cfg;
    if (!remote) {
        params.vocab = Vocabulary::build(splits.train);
        params.embedding = Embedding::init(params.vocab.size(), enc_cfg.embed_dim, rng);
    }
    const std::size_t d = static_cast<std::size_t>(enc_cfg.feature_dim());
    params.W.assign(2 * d, 0.0);
    params.b.assign(2, 0.0);

    const std::size_t n_train = splits.train.size();
    const std::size_t n_val = splits.val.size();

    // frozen per-pair inputs: index sequences (desk) or features (remote)
    std::vector<std::vector<int>> train_seq, val_seq;
    std::vector<std::vector<double>> train_feat, val_feat;
    if (remote) {
        train_feat.reserve(n_train);
        val_feat.reserve(n_val);
        for (const LabeledPair& p : splits.train) {
            train_feat.push_back(encode_remote(p.nl_text, p.pl_text, enc_cfg));
        }
        for (const LabeledPair& p : splits.val) {
            val_feat.push_back(encode_remote(p.nl_text, p.pl_text, enc_cfg));
        }
    } else {
        train_seq.reserve(n_train);
        val_seq.reserve(n_val);
        for (const LabeledPair& p : splits.train) {
            train_seq.push_back(pair_sequence(p, params.vocab, enc_cfg));
        }
        for (const LabeledPair& p : splits.val) {
            val_seq.push_back(pair_sequence(p, params.vocab, enc_cfg));
        }
    }

    std::vector<int> val_labels;
    val_labels.reserve(n_val);
    for (const LabeledPair& p : splits.val) val_labels.push_back(p.label);

    AdamState state_w, state_b, state_emb;
    std::vector<double> grad_w(params.W.size());
    std::vector<double> grad_b(params.b.size());
    std::vector<double> grad_emb(params.embedding.values.size());

    TrainResult result;
    result.best_val_f1 = -1.0;
    int t = 0;

    std::vector<std::size_t> order(n_train);
    for (std::size_t i = 0; i < n_train; ++i) order[i] = i;

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;

        for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t stop = std::min(n_train, start + static_cast<std::size_t>(cfg.batch_size));
            const double batch_n = static_cast<double>(stop - start);
            std::fill(grad_w.begin(), grad_w.end(), 0.0);
            std::fill(grad_b.begin(), grad_b.end(), 0.0);
            std::fill(grad_emb.begin(), grad_emb.end(), 0.0);

            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t i = order[k];
                const LabeledPair& pair = splits.train[i];
                const std::vector<double> feature =
                    remote ? train_feat[i] : encode(train_seq[i], params.embedding);
                const double loss = pair_backward(feature, remote ? nullptr : &train_seq[i],
                                                  pair.label, params, batch_n, grad_w, grad_b,
                                                  grad_emb);
                if (!std::isfinite(loss)) {
                    throw TraceError(Errc::NonFinite,
                                     "non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
                                         std::to_string(start / static_cast<std::size_t>(cfg.batch_size)));
                }
                epoch_loss += loss;
            }

            ++t;
            adam_step(params.W, grad_w, state_w, cfg, t, "W");
            adam_step(params.b, grad_b, state_b, cfg, t, "b");
            if (!remote) adam_step(params.embedding.values, grad_emb, state_emb, cfg, t, "embedding");
        }

        // validation pass with the post-epoch parameters
        std::vector<int> val_preds;
        val_preds.reserve(n_val);
        for (std::size_t i = 0; i < n_val; ++i) {
            const std::vector<double> feature =
                remote ? val_feat[i] : encode(val_seq[i], params.embedding);
            const Forward fwd = head_forward(feature, params);
            val_preds.push_back(fwd.probs[1] > fwd.probs[0] ? 1 : 0);
        }
        EvalReport val_report = compute_metrics(val_preds, val_labels);
        val_report.condition = val_condition();

        EpochLog log;
        log.epoch = epoch;
        log.train_loss = epoch_loss / static_cast<double>(n_train);
        log.val_accuracy = val_report.accuracy;
        log.val_f1 = val_report.f1;
        result.epochs.push_back(log);

        if (val_report.f1 > result.best_val_f1) {
            result.best_val_f1 = val_report.f1;
            result.best_epoch = epoch;
            result.params = params;
        }
    }
    return result;
}

int predict(const LabeledPair& pair, const ModelParams& params) {
    const Forward fwd = forward(pair, params);
    return fwd.probs[1] > fwd.probs[0] ? 1 : 0;
}

void save_model(const ModelParams& params, const std::filesystem::path& file) {
    ordered_json j;
    j["format"] = "trace-model/1";
    j["encoder"] = ordered_json{{"backend", std::string(encoder_backend_name(params.encoder.backend))},
                                {"max_seq_len", params.encoder.max_seq_len},
                                {"embed_dim", params.encoder.embed_dim},
                                {"remote_endpoint", params.encoder.remote_endpoint},
                                {"remote_dimension", params.encoder.remote_dimension}};
    j["vocab"] = params.vocab.tokens_in_index_order();
    j["embedding"] = ordered_json{{"rows", params.embedding.rows},
                                  {"dim", params.embedding.dim},
                                  {"values", params.embedding.values}};
    j["W"] = params.W;
    j["b"] = params.b;

    std::ofstream out(file, std::ios::binary);
    if (!out) throw TraceError(Errc::IoError, "cannot open '" + file.string() + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw TraceError(Errc::IoError, "write to '" + file.string() + "' failed");
}

ModelParams load_model(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw TraceError(Errc::IoError, "cannot open '" + file.string() + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const ordered_json::parse_error& e) {
        throw TraceError(Errc::ParseError, file.string() + ": " + e.what());
    }
    if (!j.contains("format") || j["format"] != "trace-model/1") {
        throw TraceError(Errc::ParseError, file.string() + ": not a trace-model/1 file");
    }
    ModelParams params;
    const ordered_json& e = j.at("encoder");
    params.encoder.backend = encoder_backend_from_name(e.at("backend").get<std::string>());
    params.encoder.max_seq_len = e.at("max_seq_len").get<int>();
    params.encoder.embed_dim = e.at("embed_dim").get<int>();
    params.encoder.remote_endpoint = e.at("remote_endpoint").get<std::string>();
    params.encoder.remote_dimension = e.at("remote_dimension").get<int>();
    params.vocab = Vocabulary::from_tokens(j.at("vocab").get<std::vector<std::string>>());
    params.embedding.rows = j.at("embedding").at("rows").get<int>();
    params.embedding.dim = j.at("embedding").at("dim").get<int>();
    params.embedding.values = j.at("embedding").at("values").get<std::vector<double>>();
    if (params.embedding.values.size() !=
        static_cast<std::size_t>(params.embedding.rows) * static_cast<std::size_t>(params.embedding.dim)) {
        throw TraceError(Errc::ValidationError, file.string() + ": embedding shape mismatch");
    }
    params.W = j.at("W").get<std::vector<double>>();
    params.b = j.at("b").get<std::vector<double>>();
    const std::size_t d = static_cast<std::size_t>(params.encoder.feature_dim());
    if (params.W.size() != 2 * d || params.b.size() != 2) {
        throw TraceError(Errc::ValidationError, file.string() + ": head shape mismatch");
    }
    for (double v : params.W) {
        if (!std::isfinite(v)) throw TraceError(Errc::NonFinite, file.string() + ": non-finite W");
    }
    return params;
}

}  // namespace trace
