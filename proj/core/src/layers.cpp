#include "vsnt/layers.hpp"

#include <cmath>
#include <random>

namespace vsnt {
namespace {

template <typename T>
void fill_uniform(Tensor<T>& t, double limit, Rng& rng) {
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (auto& v : t.data_mut()) v = static_cast<T>(dist(rng));
}

}  // namespace

template <typename T>
void he_uniform(Tensor<T>& t, std::size_t fan_in, Rng& rng) {
    fill_uniform(t, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);
}

template <typename T>
void glorot_uniform(Tensor<T>& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
    fill_uniform(t, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

template <typename T>
Conv2dLayer<T>::Conv2dLayer(std::string name, std::size_t in_channels, std::size_t filters, std::size_t kernel,
                            Padding padding, bool relu_activation, Rng& init_rng)
    : kernel_(kernel), padding_(padding), relu_(relu_activation) {
    Tensor<T> k({filters, in_channels, kernel, kernel});
    he_uniform(k, in_channels * kernel * kernel, init_rng);
    kernels_ = Parameter<T>(name + ".kernel", std::move(k));
    bias_ = Parameter<T>(name + ".bias", Tensor<T>::zeros({filters}));
}

template <typename T>
Tensor<T> Conv2dLayer<T>::forward(const Tensor<T>& x, Mode, Rng&) const {
    auto y = conv2d(x, kernels_.value(), bias_.value(), 1, padding_);
    return relu_ ? relu(y) : y;
}

template <typename T>
Shape Conv2dLayer<T>::output_shape(const Shape& in) const {
    if (in.size() != 3) throw ShapeError("conv layer expects CxHxW, got " + shape_str(in));
    const std::size_t pad = padding_ == Padding::same ? kernel_ - 1 : 0;
    if (in[1] + pad < kernel_ || in[2] + pad < kernel_)
        throw ShapeError("conv layer: kernel larger than input " + shape_str(in));
    return {kernels_.value().dim(0), in[1] + pad - kernel_ + 1, in[2] + pad - kernel_ + 1};
}

template <typename T>
Shape MaxPool2dLayer<T>::output_shape(const Shape& in) const {
    if (in.size() != 3) throw ShapeError("pool layer expects CxHxW, got " + shape_str(in));
    if (in[1] < window_ || in[2] < window_)
        throw ShapeError("pool layer: spatial extent would reach zero at input " + shape_str(in));
    return {in[0], (in[1] - window_) / stride_ + 1, (in[2] - window_) / stride_ + 1};
}

template <typename T>
DenseLayer<T>::DenseLayer(std::string name, std::size_t in, std::size_t out, Activation activation, Rng& init_rng)
    : out_(out), activation_(activation) {
    Tensor<T> w({in, out});
    if (activation == Activation::relu)
        he_uniform(w, in, init_rng);
    else
        glorot_uniform(w, in, out, init_rng);
    weight_ = Parameter<T>(name + ".weight", std::move(w));
    bias_ = Parameter<T>(name + ".bias", Tensor<T>::zeros({out}));
}

template <typename T>
Tensor<T> DenseLayer<T>::forward(const Tensor<T>& x, Mode, Rng&) const {
    auto y = add_bias(matmul(x, weight_.value()), bias_.value());
    switch (activation_) {
        case Activation::relu: return relu(y);
        case Activation::sigmoid: return sigmoid(y);
        case Activation::none: break;
    }
    return y;
}

template <typename T>
DropoutLayer<T>::DropoutLayer(double rate) : rate_(rate) {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must lie in [0,1)");
}

template class Conv2dLayer<float>;
template class Conv2dLayer<double>;
template class MaxPool2dLayer<float>;
template class MaxPool2dLayer<double>;
template class DenseLayer<float>;
template class DenseLayer<double>;
template class DropoutLayer<float>;
template class DropoutLayer<double>;
template void he_uniform<float>(Tensor<float>&, std::size_t, Rng&);
template void he_uniform<double>(Tensor<double>&, std::size_t, Rng&);
template void glorot_uniform<float>(Tensor<float>&, std::size_t, std::size_t, Rng&);
template void glorot_uniform<double>(Tensor<double>&, std::size_t, std::size_t, Rng&);

}  // namespace vsnt
