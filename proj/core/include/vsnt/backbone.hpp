#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "vsnt/config.hpp"
#include "vsnt/layers.hpp"

namespace vsnt {

// Layout of one convolutional block: `convs` 3x3 same-padded convolutions of
// `width` filters, optionally followed by a 2x2 max pool.
struct BlockSpec {
    std::size_t convs;
    std::size_t width;
    bool pool;
};

// conv3/conv5/conv8: widths double from 16 (capped at 256), the first two
// blocks hold one convolution and later blocks two. conv8 pools only on
// even-numbered blocks so 112px frames survive. vgg19: 2,2,4,4,4 convolutions
// of 64,128,256,512,512 filters, each block pooled.
std::vector<BlockSpec> backbone_blocks(BackboneKind kind);

// Number of layers (convolutions plus pools) in the stack.
std::size_t backbone_layer_count(BackboneKind kind);

// Index of the first trainable layer when the config leaves it unset:
// the start of block 4 for vgg19, 0 (fully trainable) otherwise.
std::size_t default_freeze_boundary(BackboneKind kind);

// Per-frame convolutional feature extractor: [N x C x S x S] -> [N x D].
template <typename T>
class Backbone {
public:
    Backbone(BackboneKind kind, std::size_t channels, std::size_t frame_size, Rng& init_rng);

    Tensor<T> forward(const Tensor<T>& frames, Mode mode, Rng& rng) const;

    BackboneKind kind() const { return kind_; }
    std::size_t layer_count() const { return layers_.size(); }
    Layer<T>& layer(std::size_t i) { return *layers_.at(i); }
    // 1-based block number of layer i.
    std::size_t block_of(std::size_t i) const { return block_of_.at(i); }
    std::size_t feature_size() const { return feature_size_; }
    // Spatial side of the final feature map.
    std::size_t output_side() const { return output_side_; }
    std::size_t output_channels() const { return output_channels_; }

    ParameterList<T> parameters();

    // Layers [0, boundary) become frozen, the rest trainable.
    void freeze_prefix(std::size_t boundary);

private:
    BackboneKind kind_;
    std::size_t channels_;
    std::size_t frame_size_;
    std::vector<std::unique_ptr<Layer<T>>> layers_;
    std::vector<std::size_t> block_of_;
    std::size_t feature_size_ = 0;
    std::size_t output_side_ = 0;
    std::size_t output_channels_ = 0;
};

template <typename T>
std::unique_ptr<Backbone<T>> build_backbone(const ModelConfig& cfg, Rng& init_rng) {
    return std::make_unique<Backbone<T>>(cfg.backbone, cfg.channels, cfg.frame_size, init_rng);
}

// Applies the same backbone to each frame of [L x C x S x S] or
// [B x L x C x S x S] input, producing [L x D] or [B x L x D].
template <typename T>
class TimeDistributed {
public:
    TimeDistributed(const Backbone<T>& backbone, std::size_t seq_len) : backbone_(&backbone), seq_len_(seq_len) {}

    Tensor<T> forward(const Tensor<T>& seq, Mode mode, Rng& rng) const;

private:
    const Backbone<T>* backbone_;
    std::size_t seq_len_;
};

}  // namespace vsnt
