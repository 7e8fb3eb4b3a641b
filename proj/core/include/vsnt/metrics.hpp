#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace vsnt {

struct Prediction {
    std::string id;
    std::size_t label = 0;  // 1 = anomaly
    double probability = 0.0;
    std::size_t predicted = 0;
};

// Binary confusion counts with the anomaly class as positive. Precision,
// recall and f1 are empty where their denominators vanish.
struct MetricsReport {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    double accuracy = 0.0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::vector<Prediction> predictions;

    std::size_t total() const { return tp + fp + tn + fn; }
};

// 2PR/(P+R), 0 when P+R = 0.
double f1_score(double precision, double recall);

MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn);
// Thresholds each probability (anomaly iff p >= threshold) and tallies counts.
MetricsReport metrics_from_predictions(std::vector<Prediction> predictions, double threshold);

// Fixed-point text or "n/a".
std::string format_metric(const std::optional<double>& v, int digits = 4);

}  // namespace vsnt
