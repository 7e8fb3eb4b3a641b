#pragma once

#include <optional>
#include <string>
#include <vector>

#include "vsnt/config.hpp"
#include "vsnt/dataset.hpp"
#include "vsnt/metrics.hpp"
#include "vsnt/train.hpp"

namespace vsnt {

struct MatrixAxes {
    std::vector<BackboneKind> backbones{BackboneKind::conv3, BackboneKind::conv5, BackboneKind::conv8,
                                        BackboneKind::vgg19};
    std::vector<CellKind> cells{CellKind::gru, CellKind::lstm};
    std::vector<bool> pred_heads{true, false};
};

struct MatrixRow {
    std::string key;  // e.g. "conv3-gru-pred"
    ModelConfig config;
    std::optional<MetricsReport> report;
    std::string error;  // set when the run failed
};

struct MatrixResult {
    std::vector<MatrixRow> rows;

    // Aligned text table, one line per configuration.
    std::string table() const;
    // Header config,accuracy,precision,recall,f1,tp,fp,tn,fn. Failed runs
    // leave every metric column empty.
    std::string csv() const;
};

std::string matrix_key(const ModelConfig& cfg);

// Trains and evaluates every combination of the axes on top of `base`.
// A failing configuration is recorded and the rest still run. Rows come out
// in axis order: backbone, then cell, then head variant.
MatrixResult run_matrix(const ModelConfig& base, const DatasetManifest& manifest, const MatrixAxes& axes,
                        const TrainOptions& opts, SampleMode eval_mode = SampleMode::single_sequence);

}  // namespace vsnt
