#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "vsnt/dataset.hpp"
#include "vsnt/metrics.hpp"
#include "vsnt/model.hpp"

namespace vsnt {

struct CurveRow {
    std::size_t epoch = 0;  // 1-based
    double train_loss = 0, train_acc = 0, val_loss = 0, val_acc = 0;
    bool operator==(const CurveRow&) const = default;
};

struct LearningCurve {
    std::vector<CurveRow> rows;

    // Header epoch,train_loss,train_acc,val_loss,val_acc.
    std::string to_csv() const;
    // Standalone SVG line plot of the four series.
    std::string to_svg() const;
};

struct TrainOptions {
    std::size_t epochs = 10;
    std::uint64_t seed = 0;
    double threshold = 0.5;
    std::size_t buffer = 2;  // batches in flight in the generator
    // Called after each epoch; returning false stops training early.
    std::function<bool(const CurveRow&)> on_epoch;
};

struct TrainResult {
    std::unique_ptr<Model> model;
    LearningCurve curve;
    std::size_t skipped_videos = 0;
};

// SGD on the train split, evaluated on the test split after every epoch.
// Epoch e shuffles with a seed derived from (seed, e). lr = 0 leaves the
// parameters untouched. Non-finite losses raise DivergenceError naming the
// epoch and batch.
TrainResult train(const ModelConfig& cfg, const DatasetManifest& manifest, const TrainOptions& opts);

// Anomaly probability for one video: the whole-video sequence in
// single_sequence mode, the maximum over sliding windows otherwise.
struct VideoScore {
    double probability = 0.0;
    std::vector<double> window_probabilities;
    std::vector<std::size_t> window_starts;
    bool padded = false;
};
VideoScore score_video(const Model& model, const VideoMeta& video, SampleMode mode);

// Per-video scoring of one partition, thresholded into a MetricsReport.
MetricsReport evaluate(const Model& model, const DatasetManifest& manifest, Partition split, double threshold,
                       SampleMode mode = SampleMode::single_sequence);

}  // namespace vsnt
