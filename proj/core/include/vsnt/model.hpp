#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "vsnt/backbone.hpp"
#include "vsnt/config.hpp"
#include "vsnt/recurrent.hpp"

namespace vsnt {

// Dense classification head on the final hidden state.
// with_pred_head: the configured dense+relu(+dropout) stack, then one output
// layer; otherwise the output layer alone. Output layer is dense(1)+sigmoid
// for BCE and dense(2)+softmax for CCE.
template <typename T>
class ClassifierHead {
public:
    ClassifierHead(const ModelConfig& cfg, std::size_t input, Rng& init_rng);

    // h_final [B x H] -> [B] (bce) or [B x 2] (cce) probabilities.
    Tensor<T> forward(const Tensor<T>& h_final, Mode mode, Rng& rng) const;
    ParameterList<T> parameters();
    std::size_t layer_count() const { return layers_.size(); }
    Layer<T>& layer(std::size_t i) { return *layers_.at(i); }

private:
    LossKind loss_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
};

// Backbone -> time-distributed features -> recurrent cell -> head.
template <typename T>
class AnomalyNet {
public:
    AnomalyNet(const ModelConfig& cfg, std::uint64_t init_seed);

    AnomalyNet(const AnomalyNet&) = delete;
    AnomalyNet& operator=(const AnomalyNet&) = delete;

    const ModelConfig& config() const { return cfg_; }
    std::uint64_t init_seed() const { return init_seed_; }

    // batch [B x L x C x S x S] -> class probabilities (see ClassifierHead).
    Tensor<T> forward(const Tensor<T>& batch, Mode mode, Rng& rng) const;

    // Eval-mode anomaly probability per sequence; no graph is recorded, so a
    // trained model can serve concurrent callers.
    std::vector<T> predict(const Tensor<T>& batch) const;

    // Mean loss of forward() output against class indices (1 = anomaly).
    Tensor<T> loss(const Tensor<T>& output, std::span<const std::size_t> labels) const;

    // Anomaly probabilities extracted from forward() output.
    std::vector<T> positive_probabilities(const Tensor<T>& output) const;

    ParameterList<T> parameters();
    Parameter<T>* find_parameter(const std::string& name);

    Backbone<T>& backbone() { return *backbone_; }
    RecurrentCell<T>& cell() { return *cell_; }
    ClassifierHead<T>& head() { return *head_; }

    void freeze_prefix(std::size_t boundary) { backbone_->freeze_prefix(boundary); }

private:
    ModelConfig cfg_;
    std::uint64_t init_seed_;
    std::unique_ptr<Backbone<T>> backbone_;
    std::unique_ptr<RecurrentCell<T>> cell_;
    std::unique_ptr<ClassifierHead<T>> head_;
};

using Model = AnomalyNet<float>;

}  // namespace vsnt
