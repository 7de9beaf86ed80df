#include "sdml/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "sdml/errors.hpp"

namespace sdml {

namespace {

constexpr double kProbClip = 1e-15;

void check_lengths(const std::vector<int>& labels, const std::vector<double>& probabilities) {
    if (labels.size() != probabilities.size()) {
        throw input_error("metric inputs differ in length: " + std::to_string(labels.size()) +
                          " labels vs " + std::to_string(probabilities.size()) +
                          " probabilities");
    }
    if (labels.empty()) throw input_error("metric inputs are empty");
}

} // namespace

ConfusionMatrix confusion(const std::vector<int>& labels,
                          const std::vector<double>& probabilities, double threshold) {
    check_lengths(labels, probabilities);
    ConfusionMatrix m;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        bool predicted = probabilities[i] > threshold;
        if (labels[i] == 1) {
            predicted ? ++m.tp : ++m.fn;
        } else {
            predicted ? ++m.fp : ++m.tn;
        }
    }
    return m;
}

ThresholdMetrics threshold_metrics(const ConfusionMatrix& m) {
    ThresholdMetrics out;
    const double tp = static_cast<double>(m.tp);
    out.accuracy = (tp + static_cast<double>(m.tn)) / static_cast<double>(m.total());
    if (m.tp + m.fp > 0) out.precision = tp / static_cast<double>(m.tp + m.fp);
    if (m.tp + m.fn > 0) out.recall = tp / static_cast<double>(m.tp + m.fn);
    if (out.precision && out.recall && *out.precision + *out.recall > 0.0) {
        out.f1 = 2.0 * *out.precision * *out.recall / (*out.precision + *out.recall);
    }
    return out;
}

std::pair<double, std::vector<RocPoint>> roc_auc(const std::vector<int>& labels,
                                                 const std::vector<double>& probabilities) {
    check_lengths(labels, probabilities);
    std::size_t n_pos = 0;
    for (int y : labels) n_pos += static_cast<std::size_t>(y == 1);
    std::size_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        throw input_error("ROC needs both classes; got " + std::to_string(n_pos) +
                          " positives of " + std::to_string(labels.size()));
    }

    // Average ranks over ascending scores.
    std::vector<std::size_t> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return probabilities[a] < probabilities[b];
    });
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && probabilities[order[j]] == probabilities[order[i]]) ++j;
        double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // mean of ranks i+1..j
        for (std::size_t k = i; k < j; ++k) {
            if (labels[order[k]] == 1) rank_sum_pos += avg_rank;
        }
        i = j;
    }
    double auc = (rank_sum_pos -
                  static_cast<double>(n_pos) * static_cast<double>(n_pos + 1) / 2.0) /
                 (static_cast<double>(n_pos) * static_cast<double>(n_neg));

    // Curve: descending unique scores; at threshold t everything with
    // probability >= t is called positive.
    std::vector<RocPoint> points;
    points.push_back({0.0, 0.0});
    std::size_t tp = 0, fp = 0;
    for (std::size_t k = order.size(); k-- > 0;) {
        if (labels[order[k]] == 1) {
            ++tp;
        } else {
            ++fp;
        }
        bool last_of_tie = k == 0 || probabilities[order[k - 1]] != probabilities[order[k]];
        if (last_of_tie) {
            points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                              static_cast<double>(tp) / static_cast<double>(n_pos)});
        }
    }
    return {auc, points};
}

double bce_loss(double p, int y) {
    // Clipping the probability of the true label (not p itself) keeps the
    // loss complement-symmetric at the clip boundary.
    double q = y == 1 ? p : 1.0 - p;
    double clipped = std::min(std::max(q, kProbClip), 1.0 - kProbClip);
    return -std::log(clipped);
}

double log_loss(const std::vector<int>& labels, const std::vector<double>& probabilities) {
    check_lengths(labels, probabilities);
    double sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        sum += bce_loss(probabilities[i], labels[i]);
    }
    return sum / static_cast<double>(labels.size());
}

EvalReport evaluate(const std::vector<int>& labels, const std::vector<double>& probabilities,
                    double threshold) {
    EvalReport r;
    r.threshold = threshold;
    r.matrix = confusion(labels, probabilities, threshold);
    ThresholdMetrics tm = threshold_metrics(r.matrix);
    r.accuracy = tm.accuracy;
    r.precision = tm.precision;
    r.recall = tm.recall;
    r.f1 = tm.f1;
    auto [auc, points] = roc_auc(labels, probabilities);
    r.auc = auc;
    r.roc_points = std::move(points);
    r.log_loss = log_loss(labels, probabilities);
    return r;
}

namespace {

void metric_line(std::ostringstream& out, const char* name,
                 const std::optional<double>& value) {
    out << name << ": ";
    if (value) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4f", *value);
        out << buf;
    } else {
        out << "n/a";
    }
    out << '\n';
}

} // namespace

std::string render_report_text(const EvalReport& r) {
    std::ostringstream out;
    out << "confusion matrix (rows: true label, cols: predicted label)\n";
    char buf[96];
    std::snprintf(buf, sizeof buf, "%8s %8s %8s\n", "", "pred 0", "pred 1");
    out << buf;
    std::snprintf(buf, sizeof buf, "%8s %8zu %8zu\n", "true 0", r.matrix.tn, r.matrix.fp);
    out << buf;
    std::snprintf(buf, sizeof buf, "%8s %8zu %8zu\n", "true 1", r.matrix.fn, r.matrix.tp);
    out << buf;
    metric_line(out, "accuracy", r.accuracy);
    metric_line(out, "precision", r.precision);
    metric_line(out, "recall", r.recall);
    metric_line(out, "f1", r.f1);
    metric_line(out, "roc_auc", r.auc);
    metric_line(out, "log_loss", r.log_loss);
    metric_line(out, "threshold", r.threshold);
    return out.str();
}

std::string render_report_json(const EvalReport& r) {
    nlohmann::json doc;
    doc["accuracy"] = r.accuracy;
    doc["precision"] = r.precision ? nlohmann::json(*r.precision) : nlohmann::json(nullptr);
    doc["recall"] = r.recall ? nlohmann::json(*r.recall) : nlohmann::json(nullptr);
    doc["f1"] = r.f1 ? nlohmann::json(*r.f1) : nlohmann::json(nullptr);
    doc["roc_auc"] = r.auc;
    doc["log_loss"] = r.log_loss;
    doc["tp"] = r.matrix.tp;
    doc["fp"] = r.matrix.fp;
    doc["fn"] = r.matrix.fn;
    doc["tn"] = r.matrix.tn;
    doc["threshold"] = r.threshold;
    auto points = nlohmann::json::array();
    for (const auto& p : r.roc_points) {
        points.push_back(nlohmann::json::array({p.fpr, p.tpr}));
    }
    doc["roc_points"] = points;
    return doc.dump(2);
}

} // namespace sdml
