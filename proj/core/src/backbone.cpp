#include "vsnt/backbone.hpp"

#include <algorithm>
#include <string>

namespace vsnt {

std::vector<BlockSpec> backbone_blocks(BackboneKind kind) {
    if (kind == BackboneKind::vgg19)
        return {{2, 64, true}, {2, 128, true}, {4, 256, true}, {4, 512, true}, {4, 512, true}};
    const std::size_t count = kind == BackboneKind::conv3 ? 3 : kind == BackboneKind::conv5 ? 5 : 8;
    std::vector<BlockSpec> blocks;
    for (std::size_t i = 0; i < count; ++i) {
        const std::size_t width = std::min<std::size_t>(std::size_t{16} << i, 256);
        const bool pool = kind != BackboneKind::conv8 || (i + 1) % 2 == 0;
        blocks.push_back({i < 2 ? std::size_t{1} : std::size_t{2}, width, pool});
    }
    return blocks;
}

std::size_t backbone_layer_count(BackboneKind kind) {
    std::size_t n = 0;
    for (const auto& b : backbone_blocks(kind)) n += b.convs + (b.pool ? 1 : 0);
    return n;
}

std::size_t default_freeze_boundary(BackboneKind kind) {
    if (kind != BackboneKind::vgg19) return 0;
    auto blocks = backbone_blocks(kind);
    std::size_t n = 0;
    for (std::size_t i = 0; i < 3; ++i) n += blocks[i].convs + (blocks[i].pool ? 1 : 0);
    return n;
}

template <typename T>
Backbone<T>::Backbone(BackboneKind kind, std::size_t channels, std::size_t frame_size, Rng& init_rng)
    : kind_(kind), channels_(channels), frame_size_(frame_size) {
    Shape shape{channels, frame_size, frame_size};
    std::size_t in_ch = channels;
    std::size_t block_no = 0;
    for (const auto& block : backbone_blocks(kind)) {
        ++block_no;
        for (std::size_t c = 0; c < block.convs; ++c) {
            const std::string name = "backbone.b" + std::to_string(block_no) + ".conv" + std::to_string(c + 1);
            layers_.push_back(
                std::make_unique<Conv2dLayer<T>>(name, in_ch, block.width, 3, Padding::same, true, init_rng));
            block_of_.push_back(block_no);
            in_ch = block.width;
        }
        if (block.pool) {
            layers_.push_back(std::make_unique<MaxPool2dLayer<T>>(2, 2));
            block_of_.push_back(block_no);
        }
    }
    try {
        for (auto& l : layers_) shape = l->output_shape(shape);
    } catch (const ShapeError&) {
        throw ShapeError("frame_size " + std::to_string(frame_size) + " is too small for backbone " +
                         to_string(kind) + ": spatial extent reaches zero");
    }
    output_channels_ = shape[0];
    output_side_ = shape[1];
    feature_size_ = shape_numel(shape);
}

template <typename T>
Tensor<T> Backbone<T>::forward(const Tensor<T>& frames, Mode mode, Rng& rng) const {
    if (frames.rank() != 4 || frames.dim(1) != channels_ || frames.dim(2) != frame_size_ ||
        frames.dim(3) != frame_size_)
        throw ShapeError("backbone expects Nx" + std::to_string(channels_) + "x" + std::to_string(frame_size_) +
                         "x" + std::to_string(frame_size_) + ", got " + shape_str(frames.shape()));
    Tensor<T> x = frames;
    for (auto& l : layers_) x = l->forward(x, mode, rng);
    return x.reshape({frames.dim(0), feature_size_});
}

template <typename T>
ParameterList<T> Backbone<T>::parameters() {
    ParameterList<T> out;
    for (auto& l : layers_)
        for (auto* p : l->parameters()) out.push_back(p);
    return out;
}

template <typename T>
void Backbone<T>::freeze_prefix(std::size_t boundary) {
    if (boundary > layers_.size())
        throw ConfigError("freeze boundary " + std::to_string(boundary) + " outside backbone of " +
                          std::to_string(layers_.size()) + " layers");
    for (std::size_t i = 0; i < layers_.size(); ++i)
        for (auto* p : layers_[i]->parameters()) p->set_trainable(i >= boundary);
}

template <typename T>
Tensor<T> TimeDistributed<T>::forward(const Tensor<T>& seq, Mode mode, Rng& rng) const {
    const bool batched = seq.rank() == 5;
    if (!(batched || seq.rank() == 4))
        throw ShapeError("time_distributed expects LxCxHxW or BxLxCxHxW, got " + shape_str(seq.shape()));
    const std::size_t b = batched ? seq.dim(0) : 1;
    const std::size_t l = seq.dim(batched ? 1 : 0);
    if (l != seq_len_)
        throw ShapeError("time_distributed expects " + std::to_string(seq_len_) + " frames, got " +
                         std::to_string(l));
    const Shape& s = seq.shape();
    const std::size_t off = batched ? 2 : 1;
    auto frames = seq.reshape({b * l, s[off], s[off + 1], s[off + 2]});
    auto feats = backbone_->forward(frames, mode, rng);
    const std::size_t d = feats.dim(1);
    return batched ? feats.reshape({b, l, d}) : feats.reshape({l, d});
}

template class Backbone<float>;
template class Backbone<double>;
template class TimeDistributed<float>;
template class TimeDistributed<double>;

}  // namespace vsnt
