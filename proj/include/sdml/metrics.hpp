#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sdml {

// Positive class is AI (label 1).
struct ConfusionMatrix {
    std::size_t tp = 0;
    std::size_t fp = 0;
    std::size_t fn = 0;
    std::size_t tn = 0;
    std::size_t total() const { return tp + fp + fn + tn; }
};

struct ThresholdMetrics {
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
};

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
};

struct EvalReport {
    ConfusionMatrix matrix;
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    double auc = 0.0;
    double log_loss = 0.0;
    std::vector<RocPoint> roc_points;
    double threshold = 0.5;
};

// Predicted positive iff probability > threshold: a probability exactly at
// the threshold counts as class 0. Both classifiers share this rule.
ConfusionMatrix confusion(const std::vector<int>& labels,
                          const std::vector<double>& probabilities, double threshold);

ThresholdMetrics threshold_metrics(const ConfusionMatrix& m);

// AUC by the rank statistic with average ranks for ties; curve points from
// sweeping the unique scores descending, from (0,0) to (1,1).
std::pair<double, std::vector<RocPoint>> roc_auc(const std::vector<int>& labels,
                                                 const std::vector<double>& probabilities);

// Single-sample cross entropy; the probability assigned to the true label
// is clipped to [1e-15, 1 - 1e-15].
double bce_loss(double p, int y);

// Mean bce_loss over the dataset.
double log_loss(const std::vector<int>& labels, const std::vector<double>& probabilities);

EvalReport evaluate(const std::vector<int>& labels, const std::vector<double>& probabilities,
                    double threshold);

// Matrix with true-label rows and predicted-label columns, then one metric
// per line at four decimals.
std::string render_report_text(const EvalReport& r);

// Machine-readable JSON at full precision.
std::string render_report_json(const EvalReport& r);

} // namespace sdml
