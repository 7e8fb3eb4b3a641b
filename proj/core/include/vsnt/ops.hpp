#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "vsnt/tensor.hpp"

namespace vsnt {

using Rng = std::mt19937_64;

enum class ElementOp { add, sub, mul, sigmoid, tanh, relu };

enum class Padding { valid, same };

// Binary ops require equal shapes; a rank-0 operand broadcasts as a scalar.
template <typename T> Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b);
template <typename T> Tensor<T> scale(const Tensor<T>& x, T factor);
// c - x, elementwise.
template <typename T> Tensor<T> rsub(T c, const Tensor<T>& x);

template <typename T> Tensor<T> sigmoid(const Tensor<T>& x);
template <typename T> Tensor<T> tanh(const Tensor<T>& x);
template <typename T> Tensor<T> relu(const Tensor<T>& x);

// Dispatcher over the op table above. Unary ops take one input, binary two.
template <typename T>
Tensor<T> elementwise(ElementOp op, std::span<const Tensor<T>> inputs);

template <typename T> Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b);

// x: [N x F] (or [N x F x H x W]), bias: [F]. Adds bias[f] along axis 1.
template <typename T> Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias);

template <typename T> Tensor<T> sum(const Tensor<T>& x);
template <typename T> Tensor<T> mean(const Tensor<T>& x);

// Cross-correlation. input: [C x H x W] or [N x C x H x W]; kernels: [F x C x kh x kw];
// bias: [F] or undefined. "same" padding pads (k-1)/2 on the leading side.
template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& bias,
                 std::size_t stride = 1, Padding padding = Padding::valid);

// Floor truncation on each spatial axis; ties route the gradient to the first
// maximum in row-major window order.
template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& input, std::size_t window = 2, std::size_t stride = 2);

// Inverted dropout. In eval mode (training=false) returns the input unchanged.
template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, bool training, Rng& rng);

// Same as dropout in training mode but with a caller-supplied keep mask (0/1).
template <typename T>
Tensor<T> dropout_with_mask(const Tensor<T>& x, double rate, std::span<const std::uint8_t> keep);

// x: [B x L x D] -> [B x D] at time index t.
template <typename T> Tensor<T> select_time(const Tensor<T>& x, std::size_t t);

// Row-wise softmax over the last axis of a [N x K] tensor.
template <typename T> Tensor<T> softmax(const Tensor<T>& x);

inline constexpr double kProbClamp = 1e-7;

// Mean binary cross-entropy. pred holds N probabilities, targets N values in {0,1}.
template <typename T>
Tensor<T> bce_loss(const Tensor<T>& pred, std::span<const T> targets);

// Mean categorical cross-entropy on a [N x K] probability matrix.
template <typename T>
Tensor<T> cce_loss(const Tensor<T>& probs, std::span<const std::size_t> targets);

namespace detail {
// C[M x N] (+)= op(A) * op(B), row-major with leading dimensions.
template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T* c, std::size_t ldc, bool accumulate);
}  // namespace detail

}  // namespace vsnt
