#include "vsnt/metrics.hpp"

#include <cstdio>

#include "vsnt/errors.hpp"

namespace vsnt {

double f1_score(double precision, double recall) {
    const double s = precision + recall;
    return s == 0.0 ? 0.0 : 2.0 * precision * recall / s;
}

MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn, std::size_t fn) {
    MetricsReport r;
    r.tp = tp;
    r.fp = fp;
    r.tn = tn;
    r.fn = fn;
    if (r.total() == 0) throw ValidationError("metrics: no predictions");
    r.accuracy = static_cast<double>(tp + tn) / static_cast<double>(r.total());
    if (tp + fp > 0) r.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
    if (tp + fn > 0) r.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (r.precision && r.recall) r.f1 = f1_score(*r.precision, *r.recall);
    return r;
}

MetricsReport metrics_from_predictions(std::vector<Prediction> predictions, double threshold) {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (auto& p : predictions) {
        p.predicted = p.probability >= threshold ? 1 : 0;
        if (p.predicted == 1)
            (p.label == 1 ? tp : fp)++;
        else
            (p.label == 1 ? fn : tn)++;
    }
    MetricsReport r = metrics_from_counts(tp, fp, tn, fn);
    r.predictions = std::move(predictions);
    return r;
}

std::string format_metric(const std::optional<double>& v, int digits) {
    if (!v) return "n/a";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, *v);
    return buf;
}

}  // namespace vsnt
