#include "trace/evalstats.hpp"

#include <algorithm>
#include <cmath>

#include "trace/error.hpp"

namespace trace {

namespace {

using ordered_json = nlohmann::ordered_json;

double f_beta(double precision, double recall, double beta) {
    const double b2 = beta * beta;
    const double denom = b2 * precision + recall;
    if (denom == 0.0) return 0.0;
    return (1.0 + b2) * precision * recall / denom;
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

EvalReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) {
        throw TraceError(Errc::LengthMismatch,
                         "predictions (" + std::to_string(predictions.size()) + ") and labels (" +
                             std::to_string(labels.size()) + ") differ in length");
    }
    if (predictions.empty()) {
        throw TraceError(Errc::NotEnoughData, "cannot compute metrics on zero pairs");
    }
    EvalReport r;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        const int p = predictions[i];
        const int y = labels[i];
        if ((p != 0 && p != 1) || (y != 0 && y != 1)) {
            throw TraceError(Errc::ValidationError, "predictions and labels must be 0 or 1");
        }
        if (p == 1 && y == 1) ++r.tp;
        else if (p == 1 && y == 0) ++r.fp;
        else if (p == 0 && y == 1) ++r.fn;
        else ++r.tn;
    }
    const double n = static_cast<double>(predictions.size());
    r.accuracy = (static_cast<double>(r.tp) + static_cast<double>(r.tn)) / n;
    r.precision = (r.tp + r.fp) == 0 ? 0.0 : static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fp);
    r.recall = (r.tp + r.fn) == 0 ? 0.0 : static_cast<double>(r.tp) / static_cast<double>(r.tp + r.fn);
    r.f1 = f_beta(r.precision, r.recall, 1.0);
    r.f2 = f_beta(r.precision, r.recall, 2.0);
    return r;
}

WilcoxonResult wilcoxon(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw TraceError(Errc::LengthMismatch, "wilcoxon needs equal-length paired samples");
    }
    if (a.empty()) {
        throw TraceError(Errc::NotEnoughData, "wilcoxon needs at least one pair");
    }

    std::vector<double> diffs;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        if (!std::isfinite(d)) throw TraceError(Errc::NonFinite, "non-finite difference in wilcoxon");
        if (d != 0.0) diffs.push_back(d);
    }

    WilcoxonResult result;
    result.n_effective = diffs.size();
    if (diffs.empty()) {
        result.p_value = 1.0;
        result.method = WilcoxonResult::Method::Exact;
        return result;
    }

    const std::size_t n = diffs.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return std::abs(diffs[x]) < std::abs(diffs[y]);
    });

    // average ranks over ties; track tie-group sizes for the approx variance
    std::vector<double> ranks(n, 0.0);
    std::vector<std::size_t> tie_sizes;
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && std::abs(diffs[order[j + 1]]) == std::abs(diffs[order[i]])) ++j;
        const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg_rank;
        tie_sizes.push_back(j - i + 1);
        i = j + 1;
    }

    double w_plus = 0.0, w_minus = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        if (diffs[k] > 0) w_plus += ranks[k];
        else w_minus += ranks[k];
    }
    result.w_plus = w_plus;
    result.w_minus = w_minus;
    result.t_statistic = std::min(w_plus, w_minus);

    if (n <= 25) {
        result.method = WilcoxonResult::Method::Exact;
        // doubled ranks are integers even with .5 average ranks
        std::vector<long long> r2(n);
        long long total2 = 0;
        for (std::size_t k = 0; k < n; ++k) {
            r2[k] = std::llround(ranks[k] * 2.0);
            total2 += r2[k];
        }
        // counts[s] = number of sign assignments with doubled W+ = s; exact
        // in double for n <= 25 (counts <= 2^25 < 2^53)
        std::vector<double> counts(static_cast<std::size_t>(total2) + 1, 0.0);
        counts[0] = 1.0;
        long long reach = 0;
        for (std::size_t k = 0; k < n; ++k) {
            reach += r2[k];
            for (long long s = reach; s >= r2[k]; --s) {
                counts[static_cast<std::size_t>(s)] +=
                    counts[static_cast<std::size_t>(s - r2[k])];
            }
        }
        const long long t2 = std::llround(result.t_statistic * 2.0);
        double tail = 0.0;
        for (long long s = 0; s <= t2 && s <= total2; ++s) {
            tail += counts[static_cast<std::size_t>(s)];
        }
        const double denom = std::ldexp(1.0, static_cast<int>(n));  // 2^n
        result.p_value = std::min(1.0, 2.0 * tail / denom);
    } else {
        result.method = WilcoxonResult::Method::NormalApprox;
        const double nn = static_cast<double>(n);
        const double mu = nn * (nn + 1.0) / 4.0;
        double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0;
        for (std::size_t t : tie_sizes) {
            const double td = static_cast<double>(t);
            var -= (td * td * td - td) / 48.0;
        }
        if (var <= 0.0) {
            result.p_value = 1.0;  // all |d| tied into one group
        } else {
            const double z = (result.t_statistic - mu + 0.5) / std::sqrt(var);
            result.p_value = std::min(1.0, 2.0 * normal_cdf(z));
        }
    }
    return result;
}

double metric_value(const EvalReport& report, const std::string& metric) {
    if (metric == "accuracy") return report.accuracy;
    if (metric == "precision") return report.precision;
    if (metric == "recall") return report.recall;
    if (metric == "f1") return report.f1;
    if (metric == "f2") return report.f2;
    throw TraceError(Errc::ConfigError, "unknown metric '" + metric + "'");
}

std::map<std::string, MetricSummary> aggregate(const std::vector<EvalReport>& reports) {
    if (reports.empty()) {
        throw TraceError(Errc::NotEnoughData, "aggregate needs at least one report");
    }
    std::map<std::string, MetricSummary> out;
    for (const char* metric : kMetricNames) {
        std::vector<double> values;
        values.reserve(reports.size());
        for (const EvalReport& r : reports) values.push_back(metric_value(r, metric));
        MetricSummary s;
        double sum = 0.0;
        for (double v : values) sum += v;
        s.mean = sum / static_cast<double>(values.size());
        if (values.size() > 1) {
            double ss = 0.0;
            for (double v : values) ss += (v - s.mean) * (v - s.mean);
            s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
        }
        out[metric] = s;
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>> paired_metric(
    const std::vector<EvalReport>& condition_a, const std::vector<EvalReport>& condition_b,
    const std::string& metric) {
    std::map<std::int64_t, double> by_seed_a, by_seed_b;
    for (const EvalReport& r : condition_a) {
        if (!by_seed_a.emplace(r.condition.seed, metric_value(r, metric)).second) {
            throw TraceError(Errc::ValidationError,
                             "duplicate seed " + std::to_string(r.condition.seed) + " in condition a");
        }
    }
    for (const EvalReport& r : condition_b) {
        if (!by_seed_b.emplace(r.condition.seed, metric_value(r, metric)).second) {
            throw TraceError(Errc::ValidationError,
                             "duplicate seed " + std::to_string(r.condition.seed) + " in condition b");
        }
    }
    if (by_seed_a.size() != by_seed_b.size()) {
        throw TraceError(Errc::SeedMismatch, "conditions have different seed counts");
    }
    std::pair<std::vector<double>, std::vector<double>> out;
    for (const auto& [seed, value] : by_seed_a) {
        auto it = by_seed_b.find(seed);
        if (it == by_seed_b.end()) {
            throw TraceError(Errc::SeedMismatch,
                             "seed " + std::to_string(seed) + " present in only one condition");
        }
        out.first.push_back(value);
        out.second.push_back(it->second);
    }
    return out;
}

nlohmann::ordered_json report_to_json(const EvalReport& report) {
    ordered_json j;
    j["condition"] = ordered_json{{"dataset", report.condition.dataset},
                                  {"template", report.condition.template_name},
                                  {"provider", report.condition.provider},
                                  {"encoder", report.condition.encoder},
                                  {"max_seq_len", report.condition.max_seq_len},
                                  {"seed", report.condition.seed}};
    j["counts"] = ordered_json{{"tp", report.tp}, {"fp", report.fp}, {"tn", report.tn}, {"fn", report.fn}};
    j["metrics"] = ordered_json{{"accuracy", report.accuracy},
                                {"precision", report.precision},
                                {"recall", report.recall},
                                {"f1", report.f1},
                                {"f2", report.f2}};
    return j;
}

EvalReport report_from_json(const nlohmann::ordered_json& j) {
    EvalReport r;
    const ordered_json& c = j.at("condition");
    r.condition.dataset = c.at("dataset").get<std::string>();
    r.condition.template_name = c.at("template").get<std::string>();
    r.condition.provider = c.at("provider").get<std::string>();
    r.condition.encoder = c.at("encoder").get<std::string>();
    r.condition.max_seq_len = c.at("max_seq_len").get<int>();
    r.condition.seed = c.at("seed").get<std::int64_t>();
    const ordered_json& counts = j.at("counts");
    r.tp = counts.at("tp").get<std::size_t>();
    r.fp = counts.at("fp").get<std::size_t>();
    r.tn = counts.at("tn").get<std::size_t>();
    r.fn = counts.at("fn").get<std::size_t>();
    const ordered_json& m = j.at("metrics");
    r.accuracy = m.at("accuracy").get<double>();
    r.precision = m.at("precision").get<double>();
    r.recall = m.at("recall").get<double>();
    r.f1 = m.at("f1").get<double>();
    r.f2 = m.at("f2").get<double>();
    return r;
}

}  // namespace trace
