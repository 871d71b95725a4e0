#include "trace/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

#include <Eigen/Dense>

#include "trace/encoder.hpp"
#include "trace/error.hpp"
#include "trace/rng.hpp"

namespace trace {

namespace {

constexpr int kLdaFoldInIterations = 50;

std::vector<std::vector<std::string>> distinct_train_docs(const std::vector<LabeledPair>& train) {
    std::vector<std::vector<std::string>> docs;
    std::set<std::string> seen;
    for (const LabeledPair& pair : train) {
        for (const std::string* text : {&pair.nl_text, &pair.pl_text}) {
            if (seen.insert(*text).second) docs.push_back(baseline_tokens(*text));
        }
    }
    return docs;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

int majority_or_zero(const std::vector<int>& votes) {
    int ones = 0;
    for (int v : votes) ones += v;
    const int zeros = static_cast<int>(votes.size()) - ones;
    if (ones == zeros) return 0;
    return ones > zeros ? 1 : 0;
}

}  // namespace

std::vector<std::string> baseline_tokens(const std::string& text) {
    return tokenize(text, ArtifactKind::PL);
}

SvdResult svd_truncated(const DenseMatrix& a, int k) {
    if (a.rows < 1 || a.cols < 1) throw TraceError(Errc::NotEnoughData, "svd needs a non-empty matrix");
    if (k < 0) throw TraceError(Errc::ConfigError, "svd rank must be >= 0");
    Eigen::MatrixXd m(a.rows, a.cols);
    for (int i = 0; i < a.rows; ++i) {
        for (int j = 0; j < a.cols; ++j) m(i, j) = a.at(i, j);
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const int full = static_cast<int>(svd.singularValues().size());
    const int rank = std::min(k, full);

    SvdResult out;
    out.u = DenseMatrix(a.rows, rank);
    out.v = DenseMatrix(a.cols, rank);
    out.singular_values.resize(static_cast<std::size_t>(rank));
    for (int j = 0; j < rank; ++j) {
        out.singular_values[static_cast<std::size_t>(j)] = svd.singularValues()(j);
        for (int i = 0; i < a.rows; ++i) out.u.at(i, j) = svd.matrixU()(i, j);
        for (int i = 0; i < a.cols; ++i) out.v.at(i, j) = svd.matrixV()(i, j);
    }
    return out;
}

// ---------- VSM ----------

TfidfModel tfidf_fit(const std::vector<std::vector<std::string>>& docs) {
    if (docs.empty()) throw TraceError(Errc::NotEnoughData, "tfidf needs at least one document");
    TfidfModel model;
    std::map<std::string, int> df;
    for (const std::vector<std::string>& doc : docs) {
        std::set<std::string> distinct(doc.begin(), doc.end());
        for (const std::string& term : distinct) ++df[term];
    }
    int next = 0;
    for (const auto& [term, _] : df) model.term_to_index.emplace(term, next++);
    model.idf.resize(static_cast<std::size_t>(next));
    const double n_docs = static_cast<double>(docs.size());
    for (const auto& [term, count] : df) {
        model.idf[static_cast<std::size_t>(model.term_to_index[term])] =
            std::log((n_docs + 1.0) / (static_cast<double>(count) + 1.0)) + 1.0;
    }
    for (const std::vector<std::string>& doc : docs) {
        const std::vector<double> dense = model.vectorize(doc);
        std::vector<std::pair<int, double>> sparse;
        for (std::size_t i = 0; i < dense.size(); ++i) {
            if (dense[i] != 0.0) sparse.emplace_back(static_cast<int>(i), dense[i]);
        }
        model.doc_vectors.push_back(std::move(sparse));
    }
    return model;
}

std::vector<double> TfidfModel::vectorize(const std::vector<std::string>& tokens) const {
    std::vector<double> vec(idf.size(), 0.0);
    for (const std::string& token : tokens) {
        auto it = term_to_index.find(token);
        if (it == term_to_index.end()) continue;  // unseen term
        vec[static_cast<std::size_t>(it->second)] += 1.0;
    }
    for (std::size_t i = 0; i < vec.size(); ++i) vec[i] *= idf[i];
    const double n = norm(vec);
    if (n > 0.0) {
        for (double& v : vec) v /= n;
    }
    return vec;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw TraceError(Errc::LengthMismatch, "cosine needs equal dimensions");
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) return 0.0;
    return dot(a, b) / (na * nb);
}

double vsm_score(const std::string& a, const std::string& b, const TfidfModel& model) {
    return cosine(model.vectorize(baseline_tokens(a)), model.vectorize(baseline_tokens(b)));
}

// ---------- LSI ----------

LsiModel lsi_fit(const TfidfModel& tfidf, const std::vector<std::vector<std::string>>& docs,
                 int k_cap) {
    const int terms = static_cast<int>(tfidf.idf.size());
    const int n_docs = static_cast<int>(docs.size());
    LsiModel model;
    if (terms == 0 || n_docs == 0) return model;  // degenerate: k stays 0

    const int k_limit = std::min(k_cap, std::min(terms, n_docs) - 1);
    if (k_limit < 1) return model;

    DenseMatrix a(terms, n_docs);
    for (int d = 0; d < n_docs; ++d) {
        const std::vector<double> vec = tfidf.vectorize(docs[static_cast<std::size_t>(d)]);
        for (int t = 0; t < terms; ++t) a.at(t, d) = vec[static_cast<std::size_t>(t)];
    }
    SvdResult svd = svd_truncated(a, k_limit);

    // keep only the strictly positive spectrum
    int k = 0;
    while (k < static_cast<int>(svd.singular_values.size()) &&
           svd.singular_values[static_cast<std::size_t>(k)] > 1e-12) {
        ++k;
    }
    model.k = k;
    model.u = DenseMatrix(terms, k);
    model.sigma.assign(svd.singular_values.begin(), svd.singular_values.begin() + k);
    for (int i = 0; i < terms; ++i) {
        for (int j = 0; j < k; ++j) model.u.at(i, j) = svd.u.at(i, j);
    }
    model.doc_coords = DenseMatrix(n_docs, k);
    for (int d = 0; d < n_docs; ++d) {
        for (int j = 0; j < k; ++j) {
            model.doc_coords.at(d, j) =
                svd.v.at(d, j) * model.sigma[static_cast<std::size_t>(j)];
        }
    }
    return model;
}

std::vector<double> lsi_fold_in(const std::vector<std::string>& tokens, const LsiModel& lsi,
                                const TfidfModel& tfidf) {
    const std::vector<double> q = tfidf.vectorize(tokens);
    std::vector<double> v(static_cast<std::size_t>(lsi.k), 0.0);
    for (int j = 0; j < lsi.k; ++j) {
        double s = 0.0;
        for (int t = 0; t < lsi.u.rows; ++t) s += lsi.u.at(t, j) * q[static_cast<std::size_t>(t)];
        v[static_cast<std::size_t>(j)] = s / lsi.sigma[static_cast<std::size_t>(j)];
    }
    return v;
}

double lsi_score(const std::string& a, const std::string& b, const LsiModel& lsi,
                 const TfidfModel& tfidf) {
    if (lsi.k == 0) return 0.0;
    const std::vector<double> va = lsi_fold_in(baseline_tokens(a), lsi, tfidf);
    const std::vector<double> vb = lsi_fold_in(baseline_tokens(b), lsi, tfidf);
    return cosine(va, vb);
}

// ---------- LDA ----------

LdaModel lda_fit(const std::vector<std::vector<std::string>>& docs, const LdaConfig& cfg) {
    if (docs.empty()) throw TraceError(Errc::NotEnoughData, "lda needs at least one document");
    if (cfg.topics < 1) throw TraceError(Errc::ConfigError, "lda needs at least one topic");
    if (cfg.iterations < 0) throw TraceError(Errc::ConfigError, "lda iterations must be >= 0");

    LdaModel model;
    model.cfg = cfg;
    for (const std::vector<std::string>& doc : docs) {
        for (const std::string& term : doc) model.term_to_index.emplace(term, 0);
    }
    int next = 0;
    for (auto& [term, index] : model.term_to_index) index = next++;
    const int n_terms = next;
    const int n_docs = static_cast<int>(docs.size());
    const int K = cfg.topics;

    // token streams as term ids
    std::vector<std::vector<int>> words(static_cast<std::size_t>(n_docs));
    for (int d = 0; d < n_docs; ++d) {
        for (const std::string& term : docs[static_cast<std::size_t>(d)]) {
            words[static_cast<std::size_t>(d)].push_back(model.term_to_index[term]);
        }
    }

    DenseMatrix n_dk(n_docs, K);
    DenseMatrix n_kw(K, std::max(n_terms, 1));
    std::vector<double> n_k(static_cast<std::size_t>(K), 0.0);
    std::vector<std::vector<int>> assign(static_cast<std::size_t>(n_docs));

    Rng rng(static_cast<std::uint64_t>(cfg.seed));
    for (int d = 0; d < n_docs; ++d) {
        assign[static_cast<std::size_t>(d)].resize(words[static_cast<std::size_t>(d)].size());
        for (std::size_t i = 0; i < words[static_cast<std::size_t>(d)].size(); ++i) {
            const int z = static_cast<int>(rng.below(static_cast<std::uint64_t>(K)));
            assign[static_cast<std::size_t>(d)][i] = z;
            n_dk.at(d, z) += 1.0;
            n_kw.at(z, words[static_cast<std::size_t>(d)][i]) += 1.0;
            n_k[static_cast<std::size_t>(z)] += 1.0;
        }
    }

    std::vector<double> weights(static_cast<std::size_t>(K));
    const double v_beta = static_cast<double>(n_terms) * cfg.beta;
    for (int sweep = 0; sweep < cfg.iterations; ++sweep) {
        for (int d = 0; d < n_docs; ++d) {
            for (std::size_t i = 0; i < words[static_cast<std::size_t>(d)].size(); ++i) {
                const int w = words[static_cast<std::size_t>(d)][i];
                const int old_z = assign[static_cast<std::size_t>(d)][i];
                n_dk.at(d, old_z) -= 1.0;
                n_kw.at(old_z, w) -= 1.0;
                n_k[static_cast<std::size_t>(old_z)] -= 1.0;

                double total = 0.0;
                for (int z = 0; z < K; ++z) {
                    const double wt = (n_dk.at(d, z) + cfg.alpha) * (n_kw.at(z, w) + cfg.beta) /
                                      (n_k[static_cast<std::size_t>(z)] + v_beta);
                    weights[static_cast<std::size_t>(z)] = wt;
                    total += wt;
                }
                double u = rng.unit_real() * total;
                int new_z = K - 1;
                for (int z = 0; z < K; ++z) {
                    u -= weights[static_cast<std::size_t>(z)];
                    if (u <= 0.0) {
                        new_z = z;
                        break;
                    }
                }
                assign[static_cast<std::size_t>(d)][i] = new_z;
                n_dk.at(d, new_z) += 1.0;
                n_kw.at(new_z, w) += 1.0;
                n_k[static_cast<std::size_t>(new_z)] += 1.0;
            }
        }
    }

    model.theta = DenseMatrix(n_docs, K);
    for (int d = 0; d < n_docs; ++d) {
        const double n_d = static_cast<double>(words[static_cast<std::size_t>(d)].size());
        for (int z = 0; z < K; ++z) {
            model.theta.at(d, z) = (n_dk.at(d, z) + cfg.alpha) / (n_d + static_cast<double>(K) * cfg.alpha);
        }
    }
    model.phi = DenseMatrix(K, std::max(n_terms, 1));
    for (int z = 0; z < K; ++z) {
        for (int w = 0; w < std::max(n_terms, 1); ++w) {
            model.phi.at(z, w) =
                (n_kw.at(z, w) + cfg.beta) / (n_k[static_cast<std::size_t>(z)] + v_beta);
        }
    }
    return model;
}

std::vector<double> lda_infer_theta(const LdaModel& model, const std::vector<std::string>& tokens) {
    const int K = model.cfg.topics;
    std::vector<int> ids;
    for (const std::string& token : tokens) {
        auto it = model.term_to_index.find(token);
        if (it != model.term_to_index.end()) ids.push_back(it->second);
    }
    std::vector<double> theta(static_cast<std::size_t>(K), 1.0 / static_cast<double>(K));
    if (ids.empty()) return theta;  // uniform for empty/unknown-only docs

    const double n_d = static_cast<double>(ids.size());
    std::vector<double> n_dk(static_cast<std::size_t>(K), 0.0);
    for (int iter = 0; iter < kLdaFoldInIterations; ++iter) {
        std::fill(n_dk.begin(), n_dk.end(), 0.0);
        for (int w : ids) {
            double total = 0.0;
            std::vector<double> gamma(static_cast<std::size_t>(K));
            for (int z = 0; z < K; ++z) {
                gamma[static_cast<std::size_t>(z)] =
                    theta[static_cast<std::size_t>(z)] * model.phi.at(z, w);
                total += gamma[static_cast<std::size_t>(z)];
            }
            if (total <= 0.0) continue;
            for (int z = 0; z < K; ++z) {
                n_dk[static_cast<std::size_t>(z)] += gamma[static_cast<std::size_t>(z)] / total;
            }
        }
        for (int z = 0; z < K; ++z) {
            theta[static_cast<std::size_t>(z)] =
                (n_dk[static_cast<std::size_t>(z)] + model.cfg.alpha) /
                (n_d + static_cast<double>(K) * model.cfg.alpha);
        }
    }
    return theta;
}

double jensen_shannon(const std::vector<double>& p, const std::vector<double>& q) {
    if (p.size() != q.size()) throw TraceError(Errc::LengthMismatch, "jsd needs equal dimensions");
    double jsd = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double m = 0.5 * (p[i] + q[i]);
        if (p[i] > 0.0) jsd += 0.5 * p[i] * std::log(p[i] / m);
        if (q[i] > 0.0) jsd += 0.5 * q[i] * std::log(q[i] / m);
    }
    return std::max(0.0, jsd);
}

double lda_score(const std::string& a, const std::string& b, const LdaModel& model) {
    const std::vector<double> ta = lda_infer_theta(model, baseline_tokens(a));
    const std::vector<double> tb = lda_infer_theta(model, baseline_tokens(b));
    return 1.0 - jensen_shannon(ta, tb) / std::log(2.0);
}

// ---------- pair features & classifiers ----------

IrModels fit_ir_models(const std::vector<LabeledPair>& train, const BaselineConfig& cfg) {
    if (train.empty()) throw TraceError(Errc::NotEnoughData, "baselines need a non-empty train split");
    const std::vector<std::vector<std::string>> docs = distinct_train_docs(train);
    IrModels models;
    models.tfidf = tfidf_fit(docs);
    models.lsi = lsi_fit(models.tfidf, docs, cfg.lsi_k_cap);
    models.lda = lda_fit(docs, cfg.lda);
    return models;
}

PairFeatures pair_features(const LabeledPair& pair, const IrModels& models) {
    const std::vector<std::string> ta = baseline_tokens(pair.nl_text);
    const std::vector<std::string> tb = baseline_tokens(pair.pl_text);

    PairFeatures f{};
    f[0] = cosine(models.tfidf.vectorize(ta), models.tfidf.vectorize(tb));
    f[1] = models.lsi.k == 0
               ? 0.0
               : cosine(lsi_fold_in(ta, models.lsi, models.tfidf),
                        lsi_fold_in(tb, models.lsi, models.tfidf));

    const std::set<std::string> sa(ta.begin(), ta.end());
    const std::set<std::string> sb(tb.begin(), tb.end());
    std::size_t inter = 0;
    for (const std::string& t : sa) inter += sb.contains(t) ? 1 : 0;
    const std::size_t uni = sa.size() + sb.size() - inter;
    f[2] = uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);

    f[3] = 1.0 - jensen_shannon(lda_infer_theta(models.lda, ta), lda_infer_theta(models.lda, tb)) /
                     std::log(2.0);

    const std::size_t smaller = std::min(sa.size(), sb.size());
    f[4] = smaller == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(smaller);
    return f;
}

double ir_threshold(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size()) {
        throw TraceError(Errc::LengthMismatch, "scores and labels differ in length");
    }
    if (scores.empty()) throw TraceError(Errc::NotEnoughData, "threshold needs at least one pair");

    std::vector<double> unique = scores;
    std::sort(unique.begin(), unique.end());
    unique.erase(std::unique(unique.begin(), unique.end()), unique.end());

    std::vector<double> candidates;
    candidates.push_back(-std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i + 1 < unique.size(); ++i) {
        candidates.push_back((unique[i] + unique[i + 1]) / 2.0);
    }
    candidates.push_back(std::numeric_limits<double>::infinity());

    double best_tau = candidates.front();
    double best_f1 = -1.0;
    for (double tau : candidates) {
        std::size_t tp = 0, fp = 0, fn = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const bool positive = scores[i] >= tau;
            if (positive && labels[i] == 1) ++tp;
            else if (positive && labels[i] == 0) ++fp;
            else if (!positive && labels[i] == 1) ++fn;
        }
        const double precision = (tp + fp) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fp);
        const double recall = (tp + fn) == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
        const double denom = precision + recall;
        const double f1 = denom == 0.0 ? 0.0 : 2.0 * precision * recall / denom;
        if (f1 > best_f1) {  // ties keep the earlier (smaller) tau
            best_f1 = f1;
            best_tau = tau;
        }
    }
    return best_tau;
}

int knn_predict(const PairFeatures& x, const KnnModel& model) {
    if (model.k < 1) throw TraceError(Errc::ConfigError, "knn needs k >= 1");
    if (model.points.size() < static_cast<std::size_t>(model.k)) {
        throw TraceError(Errc::NotEnoughData,
                         "knn needs at least " + std::to_string(model.k) + " training points, got " +
                             std::to_string(model.points.size()));
    }
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(model.points.size());
    for (std::size_t i = 0; i < model.points.size(); ++i) {
        double d2 = 0.0;
        for (int j = 0; j < kPairFeatureCount; ++j) {
            const double d = x[static_cast<std::size_t>(j)] - model.points[i][static_cast<std::size_t>(j)];
            d2 += d * d;
        }
        dist.emplace_back(d2, i);
    }
    std::sort(dist.begin(), dist.end());  // distance, then smaller training index
    std::vector<int> votes;
    votes.reserve(static_cast<std::size_t>(model.k));
    for (int i = 0; i < model.k; ++i) votes.push_back(model.labels[dist[static_cast<std::size_t>(i)].second]);
    return majority_or_zero(votes);
}

double lr_loss(const LrModel& model, const std::vector<PairFeatures>& xs, const std::vector<int>& ys,
               double lambda) {
    double loss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double z = model.b;
        for (int j = 0; j < kPairFeatureCount; ++j) {
            z += model.w[static_cast<std::size_t>(j)] * xs[i][static_cast<std::size_t>(j)];
        }
        // -y ln s(z) - (1-y) ln(1-s(z)), in log-space: softplus(-z) + (1-y) z
        const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
        loss += softplus - static_cast<double>(ys[i]) * z;
    }
    loss /= static_cast<double>(xs.size());
    for (double w : model.w) loss += 0.5 * lambda * w * w;
    return loss;
}

void lr_gradient(const LrModel& model, const std::vector<PairFeatures>& xs, const std::vector<int>& ys,
                 double lambda, std::vector<double>& grad_w, double& grad_b) {
    grad_w.assign(kPairFeatureCount, 0.0);
    grad_b = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double z = model.b;
        for (int j = 0; j < kPairFeatureCount; ++j) {
            z += model.w[static_cast<std::size_t>(j)] * xs[i][static_cast<std::size_t>(j)];
        }
        const double p = 1.0 / (1.0 + std::exp(-z));
        const double delta = p - static_cast<double>(ys[i]);
        for (int j = 0; j < kPairFeatureCount; ++j) {
            grad_w[static_cast<std::size_t>(j)] += delta * xs[i][static_cast<std::size_t>(j)];
        }
        grad_b += delta;
    }
    const double n = static_cast<double>(xs.size());
    for (int j = 0; j < kPairFeatureCount; ++j) {
        grad_w[static_cast<std::size_t>(j)] = grad_w[static_cast<std::size_t>(j)] / n +
                                              lambda * model.w[static_cast<std::size_t>(j)];
    }
    grad_b /= n;
}

LrModel lr_train(const std::vector<PairFeatures>& xs, const std::vector<int>& ys, double rate,
                 int epochs, double lambda) {
    if (xs.empty() || xs.size() != ys.size()) {
        throw TraceError(Errc::NotEnoughData, "lr needs matched non-empty features and labels");
    }
    LrModel model;
    model.w.assign(kPairFeatureCount, 0.0);
    model.b = 0.0;
    std::vector<double> grad_w;
    double grad_b = 0.0;
    for (int epoch = 0; epoch < epochs; ++epoch) {
        lr_gradient(model, xs, ys, lambda, grad_w, grad_b);
        for (int j = 0; j < kPairFeatureCount; ++j) {
            model.w[static_cast<std::size_t>(j)] -= rate * grad_w[static_cast<std::size_t>(j)];
            if (!std::isfinite(model.w[static_cast<std::size_t>(j)])) {
                throw TraceError(Errc::NonFinite, "lr diverged at epoch " + std::to_string(epoch));
            }
        }
        model.b -= rate * grad_b;
    }
    return model;
}

int lr_predict(const LrModel& model, const PairFeatures& x) {
    double z = model.b;
    for (int j = 0; j < kPairFeatureCount; ++j) {
        z += model.w[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
    }
    const double p = 1.0 / (1.0 + std::exp(-z));
    return p > 0.5 ? 1 : 0;
}

double svm_objective(const std::vector<double>& w, double b, const std::vector<PairFeatures>& xs,
                     const std::vector<int>& ys, double lambda) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double z = b;
        for (int j = 0; j < kPairFeatureCount; ++j) {
            z += w[static_cast<std::size_t>(j)] * xs[i][static_cast<std::size_t>(j)];
        }
        const double y = ys[i] == 1 ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - y * z);
    }
    hinge /= static_cast<double>(xs.size());
    double reg = 0.0;
    for (double v : w) reg += v * v;
    return 0.5 * lambda * reg + hinge;
}

SvmModel svm_train(const std::vector<PairFeatures>& xs, const std::vector<int>& ys, double lambda,
                   int iterations, std::int64_t seed) {
    if (xs.empty() || xs.size() != ys.size()) {
        throw TraceError(Errc::NotEnoughData, "svm needs matched non-empty features and labels");
    }
    if (lambda <= 0 || iterations < 1) {
        throw TraceError(Errc::ConfigError, "svm needs lambda > 0 and iterations >= 1");
    }
    Rng rng(static_cast<std::uint64_t>(seed));
    std::vector<double> w(kPairFeatureCount, 0.0);
    double b = 0.0;
    std::vector<double> sum_w(kPairFeatureCount, 0.0);
    double sum_b = 0.0;

    SvmModel model;
    for (int t = 1; t <= iterations; ++t) {
        const std::size_t i = rng.below(xs.size());
        const double y = ys[i] == 1 ? 1.0 : -1.0;
        double z = b;
        for (int j = 0; j < kPairFeatureCount; ++j) {
            z += w[static_cast<std::size_t>(j)] * xs[i][static_cast<std::size_t>(j)];
        }
        const double eta = 1.0 / (lambda * static_cast<double>(t));
        // The intercept is optimized as a constant-1 feature: it shares the
        // shrink and the projection below, which keeps the early iterates
        // (step size 1/(lambda*t)) from permanently poisoning the average.
        const double shrink = 1.0 - eta * lambda;
        for (int j = 0; j < kPairFeatureCount; ++j) w[static_cast<std::size_t>(j)] *= shrink;
        b *= shrink;
        if (y * z < 1.0) {
            for (int j = 0; j < kPairFeatureCount; ++j) {
                w[static_cast<std::size_t>(j)] += eta * y * xs[i][static_cast<std::size_t>(j)];
            }
            b += eta * y;
        }
        double norm_sq = b * b;
        for (int j = 0; j < kPairFeatureCount; ++j) {
            norm_sq += w[static_cast<std::size_t>(j)] * w[static_cast<std::size_t>(j)];
        }
        const double radius = 1.0 / std::sqrt(lambda);
        if (norm_sq > radius * radius) {
            const double scale = radius / std::sqrt(norm_sq);
            for (int j = 0; j < kPairFeatureCount; ++j) w[static_cast<std::size_t>(j)] *= scale;
            b *= scale;
        }
        for (int j = 0; j < kPairFeatureCount; ++j) sum_w[static_cast<std::size_t>(j)] += w[static_cast<std::size_t>(j)];
        sum_b += b;
        if (t % 100 == 0 || t == iterations) {
            std::vector<double> avg_w(kPairFeatureCount);
            for (int j = 0; j < kPairFeatureCount; ++j) {
                avg_w[static_cast<std::size_t>(j)] =
                    sum_w[static_cast<std::size_t>(j)] / static_cast<double>(t);
            }
            model.objective_trace.push_back(
                svm_objective(avg_w, sum_b / static_cast<double>(t), xs, ys, lambda));
        }
    }
    model.w.resize(kPairFeatureCount);
    for (int j = 0; j < kPairFeatureCount; ++j) {
        model.w[static_cast<std::size_t>(j)] =
            sum_w[static_cast<std::size_t>(j)] / static_cast<double>(iterations);
    }
    model.b = sum_b / static_cast<double>(iterations);
    return model;
}

int svm_predict(const SvmModel& model, const PairFeatures& x) {
    double z = model.b;
    for (int j = 0; j < kPairFeatureCount; ++j) {
        z += model.w[static_cast<std::size_t>(j)] * x[static_cast<std::size_t>(j)];
    }
    return z > 0.0 ? 1 : 0;
}

// ---------- driver ----------

std::vector<BaselineOutcome> run_baselines(const DatasetSplit& splits, const BaselineConfig& cfg,
                                           const ConditionDesc& base_condition) {
    if (splits.train.empty() || splits.val.empty() || splits.test.empty()) {
        throw TraceError(Errc::NotEnoughData, "baselines need non-empty train/val/test splits");
    }
    IrModels models = fit_ir_models(splits.train, cfg);

    std::vector<int> val_labels, test_labels;
    for (const LabeledPair& p : splits.val) val_labels.push_back(p.label);
    for (const LabeledPair& p : splits.test) test_labels.push_back(p.label);

    std::vector<BaselineOutcome> outcomes;

    for (const char* method : kIrMethods) {
        auto score = [&](const LabeledPair& p) {
            if (std::string_view(method) == "vsm") return vsm_score(p.nl_text, p.pl_text, models.tfidf);
            if (std::string_view(method) == "lsi") {
                return lsi_score(p.nl_text, p.pl_text, models.lsi, models.tfidf);
            }
            return lda_score(p.nl_text, p.pl_text, models.lda);
        };
        std::vector<double> val_scores;
        for (const LabeledPair& p : splits.val) val_scores.push_back(score(p));
        const double tau = ir_threshold(val_scores, val_labels);

        BaselineOutcome outcome;
        outcome.method = method;
        outcome.threshold = tau;
        for (const LabeledPair& p : splits.test) {
            outcome.test_predictions.push_back(score(p) >= tau ? 1 : 0);
        }
        outcome.report = compute_metrics(outcome.test_predictions, test_labels);
        outcome.report.condition = base_condition;
        outcome.report.condition.encoder = method;
        outcomes.push_back(std::move(outcome));
    }

    std::vector<PairFeatures> train_x, test_x;
    std::vector<int> train_y;
    for (const LabeledPair& p : splits.train) {
        train_x.push_back(pair_features(p, models));
        train_y.push_back(p.label);
    }
    for (const LabeledPair& p : splits.test) test_x.push_back(pair_features(p, models));

    for (const char* method : kMlMethods) {
        BaselineOutcome outcome;
        outcome.method = method;
        if (std::string_view(method) == "knn") {
            KnnModel knn;
            knn.k = cfg.knn_k;
            knn.points = train_x;
            knn.labels = train_y;
            for (const PairFeatures& x : test_x) outcome.test_predictions.push_back(knn_predict(x, knn));
        } else if (std::string_view(method) == "lr") {
            const LrModel lr = lr_train(train_x, train_y, cfg.lr_rate, cfg.lr_epochs, cfg.lr_lambda);
            for (const PairFeatures& x : test_x) outcome.test_predictions.push_back(lr_predict(lr, x));
        } else {
            const SvmModel svm =
                svm_train(train_x, train_y, cfg.svm_lambda, cfg.svm_iterations, cfg.seed);
            for (const PairFeatures& x : test_x) outcome.test_predictions.push_back(svm_predict(svm, x));
        }
        outcome.report = compute_metrics(outcome.test_predictions, test_labels);
        outcome.report.condition = base_condition;
        outcome.report.condition.encoder = method;
        outcomes.push_back(std::move(outcome));
    }
    return outcomes;
}

}  // namespace trace
