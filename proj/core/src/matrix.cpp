#include "vsnt/matrix.hpp"

#include <algorithm>
#include <cstdio>

namespace vsnt {

std::string matrix_key(const ModelConfig& cfg) {
    return to_string(cfg.backbone) + "-" + to_string(cfg.cell) + (cfg.with_pred_head ? "-pred" : "-nopred");
}

MatrixResult run_matrix(const ModelConfig& base, const DatasetManifest& manifest, const MatrixAxes& axes,
                        const TrainOptions& opts, SampleMode eval_mode) {
    MatrixResult out;
    for (auto b : axes.backbones)
        for (auto c : axes.cells)
            for (bool pred : axes.pred_heads) {
                MatrixRow row;
                row.config = base;
                row.config.backbone = b;
                row.config.cell = c;
                row.config.with_pred_head = pred;
                row.config.freeze_boundary.reset();
                row.key = matrix_key(row.config);
                try {
                    auto trained = train(row.config, manifest, opts);
                    row.report = evaluate(*trained.model, manifest, Partition::test, opts.threshold, eval_mode);
                } catch (const std::exception& e) {
                    row.error = e.what();
                }
                out.rows.push_back(std::move(row));
            }
    return out;
}

std::string MatrixResult::table() const {
    std::size_t kw = 6;
    for (const auto& r : rows) kw = std::max(kw, r.key.size());
    std::string s;
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-*s  %8s  %9s  %6s  %6s  %4s %4s %4s %4s\n", int(kw), "config", "accuracy",
                  "precision", "recall", "f1", "tp", "fp", "tn", "fn");
    s += buf;
    for (const auto& r : rows) {
        if (!r.report) {
            std::snprintf(buf, sizeof buf, "%-*s  failed: ", int(kw), r.key.c_str());
            s += buf + r.error + "\n";
            continue;
        }
        const auto& m = *r.report;
        std::snprintf(buf, sizeof buf, "%-*s  %8.3f  %9s  %6s  %6s  %4zu %4zu %4zu %4zu\n", int(kw), r.key.c_str(),
                      m.accuracy, format_metric(m.precision).c_str(), format_metric(m.recall).c_str(),
                      format_metric(m.f1).c_str(), m.tp, m.fp, m.tn, m.fn);
        s += buf;
    }
    return s;
}

std::string MatrixResult::csv() const {
    std::string s = "config,accuracy,precision,recall,f1,tp,fp,tn,fn\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_metric(v, 6) : std::string(); };
    for (const auto& r : rows) {
        if (!r.report) {
            s += r.key + ",,,,,,,,\n";
            continue;
        }
        const auto& m = *r.report;
        s += r.key + "," + format_metric(m.accuracy, 6) + "," + opt(m.precision) + "," + opt(m.recall) + "," +
             opt(m.f1) + "," + std::to_string(m.tp) + "," + std::to_string(m.fp) + "," + std::to_string(m.tn) + "," +
             std::to_string(m.fn) + "\n";
    }
    return s;
}

}  // namespace vsnt
