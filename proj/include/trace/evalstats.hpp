#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

namespace trace {

struct ConditionDesc {
    std::string dataset;
    std::string template_name;  // "none" for the unaugmented control
    std::string provider;       // "none" for the control
    std::string encoder;        // backend name or baseline method name
    int max_seq_len = 0;
    std::int64_t seed = 0;

    bool operator==(const ConditionDesc&) const = default;
};

struct EvalReport {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0, precision = 0, recall = 0, f1 = 0, f2 = 0;
    ConditionDesc condition;
};

/// Confusion counts and derived metrics; 0/0 denominators yield 0.
EvalReport compute_metrics(const std::vector<int>& predictions, const std::vector<int>& labels);

struct WilcoxonResult {
    enum class Method { Exact, NormalApprox };
    std::size_t n_effective = 0;  // after zero-difference removal
    double w_plus = 0;
    double w_minus = 0;
    double t_statistic = 0;  // min(W+, W-)
    double p_value = 1.0;    // two-sided
    Method method = Method::Exact;
};

/// Two-sided Wilcoxon signed-rank test on paired samples. Exact enumeration
/// for n_effective <= 25, tie-corrected continuity-corrected normal
/// approximation above.
WilcoxonResult wilcoxon(const std::vector<double>& a, const std::vector<double>& b);

inline constexpr const char* kMetricNames[5] = {"accuracy", "precision", "recall", "f1", "f2"};

struct MetricSummary {
    double mean = 0;
    double sd = 0;  // sample standard deviation; 0 when n == 1
};

/// Per-metric mean and sample sd across the seeds of one condition.
std::map<std::string, MetricSummary> aggregate(const std::vector<EvalReport>& reports);

/// Seed-aligned metric vectors for two conditions; throws if the seed sets
/// differ (alignment error).
std::pair<std::vector<double>, std::vector<double>> paired_metric(
    const std::vector<EvalReport>& condition_a, const std::vector<EvalReport>& condition_b,
    const std::string& metric);

double metric_value(const EvalReport& report, const std::string& metric);

nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::ordered_json& j);

}  // namespace trace
