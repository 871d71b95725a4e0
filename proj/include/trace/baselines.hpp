#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trace/dataset_ops.hpp"
#include "trace/evalstats.hpp"

namespace trace {

/// IR methods tokenize every text the same way (identifier-splitting rules)
/// so that score(a, b) == score(b, a) holds structurally.
std::vector<std::string> baseline_tokens(const std::string& text);

struct DenseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;  // row-major

    DenseMatrix() = default;
    DenseMatrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}
    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * cols + j]; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * cols + j]; }
};

/// Truncated SVD: A (m x n) ~= U diag(S) V^T with U m x k, V n x k.
struct SvdResult {
    DenseMatrix u;
    std::vector<double> singular_values;  // positive, non-increasing
    DenseMatrix v;
};

SvdResult svd_truncated(const DenseMatrix& a, int k);

// ---------- VSM ----------

struct TfidfModel {
    std::map<std::string, int> term_to_index;
    std::vector<double> idf;  // smoothed: ln((N+1)/(df+1)) + 1
    std::vector<std::vector<std::pair<int, double>>> doc_vectors;  // L2-normalized

    std::vector<double> vectorize(const std::vector<std::string>& tokens) const;  // normalized
};

TfidfModel tfidf_fit(const std::vector<std::vector<std::string>>& docs);
double cosine(const std::vector<double>& a, const std::vector<double>& b);
double vsm_score(const std::string& a, const std::string& b, const TfidfModel& model);

// ---------- LSI ----------

struct LsiModel {
    int k = 0;
    DenseMatrix u;                      // terms x k
    std::vector<double> sigma;          // k positive, non-increasing
    DenseMatrix doc_coords;             // docs x k (training docs, folded)
};

/// k = min(k_cap, min(terms, docs) - 1), further clipped to the positive
/// spectrum of the training term-document matrix.
LsiModel lsi_fit(const TfidfModel& tfidf, const std::vector<std::vector<std::string>>& docs,
                 int k_cap = 100);
std::vector<double> lsi_fold_in(const std::vector<std::string>& tokens, const LsiModel& lsi,
                                const TfidfModel& tfidf);  // v = Sigma^-1 U^T q
double lsi_score(const std::string& a, const std::string& b, const LsiModel& lsi,
                 const TfidfModel& tfidf);

// ---------- LDA ----------

struct LdaConfig {
    int topics = 20;
    double alpha = 2.5;  // 50 / topics
    double beta = 0.01;
    int iterations = 1000;
    std::int64_t seed = 2014;
};

struct LdaModel {
    LdaConfig cfg;
    std::map<std::string, int> term_to_index;
    DenseMatrix theta;  // docs x K, rows sum to 1
    DenseMatrix phi;    // K x terms, rows sum to 1
};

LdaModel lda_fit(const std::vector<std::vector<std::string>>& docs, const LdaConfig& cfg);
/// Deterministic fold-in: fixed-point iterations with phi frozen; unknown
/// terms dropped; empty doc -> uniform.
std::vector<double> lda_infer_theta(const LdaModel& model, const std::vector<std::string>& tokens);
double jensen_shannon(const std::vector<double>& p, const std::vector<double>& q);
double lda_score(const std::string& a, const std::string& b, const LdaModel& model);

// ---------- pair features & ML classifiers ----------

inline constexpr int kPairFeatureCount = 5;
using PairFeatures = std::array<double, kPairFeatureCount>;

struct IrModels {
    TfidfModel tfidf;
    LsiModel lsi;
    LdaModel lda;
};

struct BaselineConfig {
    int knn_k = 5;
    double lr_rate = 0.1;
    int lr_epochs = 500;
    double lr_lambda = 1e-4;
    double svm_lambda = 1e-4;
    int svm_iterations = 1000;
    LdaConfig lda;
    int lsi_k_cap = 100;
    std::int64_t seed = 2014;
};

IrModels fit_ir_models(const std::vector<LabeledPair>& train, const BaselineConfig& cfg);
/// [cosine_vsm, cosine_lsi, jaccard, 1 - JSD_lda/ln2, normalized shared terms]
PairFeatures pair_features(const LabeledPair& pair, const IrModels& models);

/// F1-maximizing threshold over candidate cuts (midpoints of consecutive
/// sorted unique scores plus -inf/+inf sentinels); predict positive iff
/// score >= tau; ties prefer the smaller tau.
double ir_threshold(const std::vector<double>& scores, const std::vector<int>& labels);

struct KnnModel {
    int k = 5;
    std::vector<PairFeatures> points;
    std::vector<int> labels;
};
int knn_predict(const PairFeatures& x, const KnnModel& model);

struct LrModel {
    std::vector<double> w;
    double b = 0;
};
double lr_loss(const LrModel& model, const std::vector<PairFeatures>& xs, const std::vector<int>& ys,
               double lambda);
void lr_gradient(const LrModel& model, const std::vector<PairFeatures>& xs, const std::vector<int>& ys,
                 double lambda, std::vector<double>& grad_w, double& grad_b);
LrModel lr_train(const std::vector<PairFeatures>& xs, const std::vector<int>& ys, double rate = 0.1,
                 int epochs = 500, double lambda = 1e-4);
int lr_predict(const LrModel& model, const PairFeatures& x);  // 1 iff p > 0.5

struct SvmModel {
    std::vector<double> w;
    double b = 0;
    std::vector<double> objective_trace;  // averaged-iterate objective, every 100 steps
};
double svm_objective(const std::vector<double>& w, double b, const std::vector<PairFeatures>& xs,
                     const std::vector<int>& ys, double lambda);
SvmModel svm_train(const std::vector<PairFeatures>& xs, const std::vector<int>& ys,
                   double lambda = 1e-4, int iterations = 1000, std::int64_t seed = 2014);
int svm_predict(const SvmModel& model, const PairFeatures& x);  // sign 0 -> label 0

// ---------- driver ----------

inline constexpr const char* kIrMethods[3] = {"vsm", "lsi", "lda"};
inline constexpr const char* kMlMethods[3] = {"knn", "lr", "svm"};

struct BaselineOutcome {
    std::string method;
    double threshold = 0;  // IR methods only
    std::vector<int> test_predictions;
    EvalReport report;  // on the test split
};

/// Fits on train, thresholds IR scores on val, evaluates on test.
std::vector<BaselineOutcome> run_baselines(const DatasetSplit& splits, const BaselineConfig& cfg,
                                           const ConditionDesc& base_condition);

}  // namespace trace
