#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include "vsnt/ops.hpp"
#include "vsnt/parameter.hpp"

namespace vsnt {

enum class Mode { train, eval };

template <typename T>
class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng& rng) const = 0;
    virtual ParameterList<T> parameters() { return {}; }
    virtual std::string kind() const = 0;
    // Per-sample output shape for a per-sample input shape (batch axis excluded).
    virtual Shape output_shape(const Shape& in) const = 0;
};

// 2-D convolution with optional fused ReLU. Input [N x C x H x W].
template <typename T>
class Conv2dLayer final : public Layer<T> {
public:
    Conv2dLayer(std::string name, std::size_t in_channels, std::size_t filters, std::size_t kernel, Padding padding,
                bool relu_activation, Rng& init_rng);

    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng& rng) const override;
    ParameterList<T> parameters() override { return {&kernels_, &bias_}; }
    std::string kind() const override { return "conv"; }
    Shape output_shape(const Shape& in) const override;

    Parameter<T>& kernels() { return kernels_; }
    Parameter<T>& bias() { return bias_; }

private:
    Parameter<T> kernels_;
    Parameter<T> bias_;
    std::size_t kernel_;
    Padding padding_;
    bool relu_;
};

template <typename T>
class MaxPool2dLayer final : public Layer<T> {
public:
    explicit MaxPool2dLayer(std::size_t window = 2, std::size_t stride = 2) : window_(window), stride_(stride) {}

    Tensor<T> forward(const Tensor<T>& x, Mode, Rng&) const override { return maxpool2d(x, window_, stride_); }
    std::string kind() const override { return "pool"; }
    Shape output_shape(const Shape& in) const override;

private:
    std::size_t window_;
    std::size_t stride_;
};

enum class Activation { none, relu, sigmoid };

// Fully connected layer on [N x in] inputs; weight is [in x out].
template <typename T>
class DenseLayer final : public Layer<T> {
public:
    DenseLayer(std::string name, std::size_t in, std::size_t out, Activation activation, Rng& init_rng);

    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng& rng) const override;
    ParameterList<T> parameters() override { return {&weight_, &bias_}; }
    std::string kind() const override { return "dense"; }
    Shape output_shape(const Shape&) const override { return {out_}; }

    Parameter<T>& weight() { return weight_; }
    Parameter<T>& bias() { return bias_; }

private:
    Parameter<T> weight_;
    Parameter<T> bias_;
    std::size_t out_;
    Activation activation_;
};

template <typename T>
class DropoutLayer final : public Layer<T> {
public:
    explicit DropoutLayer(double rate);

    Tensor<T> forward(const Tensor<T>& x, Mode mode, Rng& rng) const override {
        return dropout(x, rate_, mode == Mode::train, rng);
    }
    std::string kind() const override { return "dropout"; }
    Shape output_shape(const Shape& in) const override { return in; }
    double rate() const { return rate_; }

private:
    double rate_;
};

// Uniform initializers; limits are sqrt(6/fan_in) and sqrt(6/(fan_in+fan_out)).
template <typename T>
void he_uniform(Tensor<T>& t, std::size_t fan_in, Rng& rng);
template <typename T>
void glorot_uniform(Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, Rng& rng);

}  // namespace vsnt
