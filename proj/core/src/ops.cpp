#include "vsnt/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace vsnt {
namespace {

template <typename T>
using NodePtr = std::shared_ptr<Node<T>>;

template <typename T>
Tensor<T> finish(const char* op, NodePtr<T> out) {
    for (T v : out->value)
        if (!std::isfinite(v)) throw NumericError(std::string("non-finite value produced by ") + op);
    return Tensor<T>::from_node(std::move(out));
}

template <typename T>
NodePtr<T> make_node(Shape shape, std::vector<T> value, std::vector<NodePtr<T>> inputs) {
    auto n = std::make_shared<Node<T>>();
    n->shape = std::move(shape);
    n->value = std::move(value);
    bool any = false;
    if (grad_enabled())
        for (const auto& in : inputs) any = any || in->requires_grad;
    n->requires_grad = any;
    if (any) n->inputs = std::move(inputs);
    return n;
}

bool is_scalar(const Shape& s) { return s.empty(); }

template <typename T>
void require_same(const char* op, const Tensor<T>& a, const Tensor<T>& b) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
}

enum class Bin { add, sub, mul };

template <typename T>
Tensor<T> binary(Bin kind, const char* name, const Tensor<T>& a, const Tensor<T>& b) {
    const bool a_s = is_scalar(a.shape()) && !is_scalar(b.shape());
    const bool b_s = is_scalar(b.shape()) && !is_scalar(a.shape());
    if (!a_s && !b_s) require_same(name, a, b);
    const Shape shape = a_s ? b.shape() : a.shape();
    const std::size_t n = shape_numel(shape);
    auto av = a.data();
    auto bv = b.data();
    std::vector<T> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const T x = av[a_s ? 0 : i];
        const T y = bv[b_s ? 0 : i];
        out[i] = kind == Bin::add ? x + y : kind == Bin::sub ? x - y : x * y;
    }
    auto node = make_node<T>(shape, std::move(out), {a.node(), b.node()});
    if (node->requires_grad) {
        node->backward_fn = [kind, a_s, b_s](Node<T>& self) {
            Node<T>& na = *self.inputs[0];
            Node<T>& nb = *self.inputs[1];
            const std::size_t n = self.value.size();
            if (na.requires_grad) {
                auto& g = na.grad_buffer();
                for (std::size_t i = 0; i < n; ++i) {
                    T d = kind == Bin::mul ? self.grad[i] * nb.value[b_s ? 0 : i] : self.grad[i];
                    g[a_s ? 0 : i] += d;
                }
            }
            if (nb.requires_grad) {
                auto& g = nb.grad_buffer();
                for (std::size_t i = 0; i < n; ++i) {
                    T d = kind == Bin::add   ? self.grad[i]
                          : kind == Bin::sub ? -self.grad[i]
                                             : self.grad[i] * na.value[a_s ? 0 : i];
                    g[b_s ? 0 : i] += d;
                }
            }
        };
    }
    return finish<T>(name, std::move(node));
}

// Unary op whose derivative is expressed through the output value y.
template <typename T, typename F, typename D>
Tensor<T> unary(const char* name, const Tensor<T>& x, F f, D dydx_from_xy) {
    auto xv = x.data();
    std::vector<T> out(xv.size());
    for (std::size_t i = 0; i < xv.size(); ++i) out[i] = f(xv[i]);
    auto node = make_node<T>(x.shape(), std::move(out), {x.node()});
    if (node->requires_grad) {
        node->backward_fn = [dydx_from_xy](Node<T>& self) {
            Node<T>& in = *self.inputs[0];
            auto& g = in.grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i)
                g[i] += self.grad[i] * dydx_from_xy(in.value[i], self.value[i]);
        };
    }
    return finish<T>(name, std::move(node));
}

// Kept inside the open interval (0,1) even where exp saturates.
template <typename T>
T sigmoid_scalar(T v) {
    static const T hi = std::nextafter(T(1), T(0));
    if (v >= T(0)) return std::min(hi, T(1) / (T(1) + std::exp(-v)));
    const T e = std::exp(v);
    return std::max(std::numeric_limits<T>::min(), e / (T(1) + e));
}

template <typename T>
void transpose(const T* src, std::size_t rows, std::size_t cols, std::size_t ld, std::vector<T>& dst) {
    dst.resize(rows * cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) dst[c * rows + r] = src[r * ld + c];
}

struct ConvGeom {
    std::size_t n, c, h, w, f, kh, kw, stride, pad_top, pad_left, ho, wo;
};

template <typename T>
void im2col(const T* img, const ConvGeom& g, T* col) {
    const std::size_t hw = g.ho * g.wo;
    for (std::size_t ch = 0; ch < g.c; ++ch)
        for (std::size_t ky = 0; ky < g.kh; ++ky)
            for (std::size_t kx = 0; kx < g.kw; ++kx) {
                T* row = col + ((ch * g.kh + ky) * g.kw + kx) * hw;
                for (std::size_t oy = 0; oy < g.ho; ++oy) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                              static_cast<std::ptrdiff_t>(g.pad_top);
                    T* dst = row + oy * g.wo;
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) {
                        std::fill(dst, dst + g.wo, T(0));
                        continue;
                    }
                    const T* src = img + (ch * g.h + static_cast<std::size_t>(iy)) * g.w;
                    for (std::size_t ox = 0; ox < g.wo; ++ox) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                                  static_cast<std::ptrdiff_t>(g.pad_left);
                        dst[ox] = (ix < 0 || ix >= static_cast<std::ptrdiff_t>(g.w))
                                      ? T(0)
                                      : src[static_cast<std::size_t>(ix)];
                    }
                }
            }
}

template <typename T>
void col2im(const T* col, const ConvGeom& g, T* img) {
    const std::size_t hw = g.ho * g.wo;
    for (std::size_t ch = 0; ch < g.c; ++ch)
        for (std::size_t ky = 0; ky < g.kh; ++ky)
            for (std::size_t kx = 0; kx < g.kw; ++kx) {
                const T* row = col + ((ch * g.kh + ky) * g.kw + kx) * hw;
                for (std::size_t oy = 0; oy < g.ho; ++oy) {
                    const std::ptrdiff_t iy = static_cast<std::ptrdiff_t>(oy * g.stride + ky) -
                                              static_cast<std::ptrdiff_t>(g.pad_top);
                    if (iy < 0 || iy >= static_cast<std::ptrdiff_t>(g.h)) continue;
                    T* dst = img + (ch * g.h + static_cast<std::size_t>(iy)) * g.w;
                    for (std::size_t ox = 0; ox < g.wo; ++ox) {
                        const std::ptrdiff_t ix = static_cast<std::ptrdiff_t>(ox * g.stride + kx) -
                                                  static_cast<std::ptrdiff_t>(g.pad_left);
                        if (ix >= 0 && ix < static_cast<std::ptrdiff_t>(g.w))
                            dst[static_cast<std::size_t>(ix)] += row[oy * g.wo + ox];
                    }
                }
            }
}

}  // namespace

namespace detail {

template <typename T>
void gemm(bool trans_a, bool trans_b, std::size_t m, std::size_t n, std::size_t k, const T* a,
          std::size_t lda, const T* b, std::size_t ldb, T* c, std::size_t ldc, bool accumulate) {
    if (!accumulate)
        for (std::size_t i = 0; i < m; ++i) std::fill(c + i * ldc, c + i * ldc + n, T(0));

    std::vector<T> bt;
    if (trans_b) {
        // B is stored n x k; materialize the k x n operand.
        transpose(b, n, k, ldb, bt);
        b = bt.data();
        ldb = n;
    }

    constexpr std::size_t kTileN = 256;
    constexpr std::size_t kRows = 4;
    auto a_at = [&](std::size_t i, std::size_t p) { return trans_a ? a[p * lda + i] : a[i * lda + p]; };

    for (std::size_t j0 = 0; j0 < n; j0 += kTileN) {
        const std::size_t jn = std::min(kTileN, n - j0);
        std::size_t i = 0;
        for (; i + kRows <= m; i += kRows) {
            T* c0 = c + i * ldc + j0;
            T* c1 = c0 + ldc;
            T* c2 = c1 + ldc;
            T* c3 = c2 + ldc;
            for (std::size_t p = 0; p < k; ++p) {
                const T a0 = a_at(i, p), a1 = a_at(i + 1, p), a2 = a_at(i + 2, p), a3 = a_at(i + 3, p);
                const T* brow = b + p * ldb + j0;
                for (std::size_t j = 0; j < jn; ++j) {
                    const T bv = brow[j];
                    c0[j] += a0 * bv;
                    c1[j] += a1 * bv;
                    c2[j] += a2 * bv;
                    c3[j] += a3 * bv;
                }
            }
        }
        for (; i < m; ++i) {
            T* c0 = c + i * ldc + j0;
            for (std::size_t p = 0; p < k; ++p) {
                const T a0 = a_at(i, p);
                const T* brow = b + p * ldb + j0;
                for (std::size_t j = 0; j < jn; ++j) c0[j] += a0 * brow[j];
            }
        }
    }
}

template void gemm<float>(bool, bool, std::size_t, std::size_t, std::size_t, const float*, std::size_t,
                          const float*, std::size_t, float*, std::size_t, bool);
template void gemm<double>(bool, bool, std::size_t, std::size_t, std::size_t, const double*, std::size_t,
                           const double*, std::size_t, double*, std::size_t, bool);

}  // namespace detail

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
    return binary(Bin::add, "add", a, b);
}
template <typename T>
Tensor<T> sub(const Tensor<T>& a, const Tensor<T>& b) {
    return binary(Bin::sub, "sub", a, b);
}
template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
    return binary(Bin::mul, "mul", a, b);
}

template <typename T>
Tensor<T> scale(const Tensor<T>& x, T factor) {
    return unary<T>("scale", x, [factor](T v) { return v * factor; }, [factor](T, T) { return factor; });
}

template <typename T>
Tensor<T> rsub(T c, const Tensor<T>& x) {
    return unary<T>("rsub", x, [c](T v) { return c - v; }, [](T, T) { return T(-1); });
}

template <typename T>
Tensor<T> sigmoid(const Tensor<T>& x) {
    return unary<T>("sigmoid", x, sigmoid_scalar<T>, [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> tanh(const Tensor<T>& x) {
    return unary<T>("tanh", x, [](T v) { return std::tanh(v); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> relu(const Tensor<T>& x) {
    return unary<T>("relu", x, [](T v) { return v > T(0) ? v : T(0); },
                    [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> elementwise(ElementOp op, std::span<const Tensor<T>> inputs) {
    const bool is_binary = op == ElementOp::add || op == ElementOp::sub || op == ElementOp::mul;
    const std::size_t want = is_binary ? 2 : 1;
    if (inputs.size() != want)
        throw ShapeError("elementwise op expects " + std::to_string(want) + " inputs, got " +
                         std::to_string(inputs.size()));
    switch (op) {
        case ElementOp::add: return add(inputs[0], inputs[1]);
        case ElementOp::sub: return sub(inputs[0], inputs[1]);
        case ElementOp::mul: return mul(inputs[0], inputs[1]);
        case ElementOp::sigmoid: return sigmoid(inputs[0]);
        case ElementOp::tanh: return tanh(inputs[0]);
        case ElementOp::relu: return relu(inputs[0]);
    }
    throw ShapeError("unknown elementwise op");
}

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw ShapeError("matmul: cannot multiply " + shape_str(a.shape()) + " by " + shape_str(b.shape()));
    const std::size_t m = a.dim(0), k = a.dim(1), n = b.dim(1);
    std::vector<T> out(m * n);
    detail::gemm<T>(false, false, m, n, k, a.data().data(), k, b.data().data(), n, out.data(), n, false);
    auto node = make_node<T>({m, n}, std::move(out), {a.node(), b.node()});
    if (node->requires_grad) {
        node->backward_fn = [m, n, k](Node<T>& self) {
            Node<T>& na = *self.inputs[0];
            Node<T>& nb = *self.inputs[1];
            if (na.requires_grad)  // dA = dC * B^T
                detail::gemm<T>(false, true, m, k, n, self.grad.data(), n, nb.value.data(), n,
                                na.grad_buffer().data(), k, true);
            if (nb.requires_grad)  // dB = A^T * dC
                detail::gemm<T>(true, false, k, n, m, na.value.data(), k, self.grad.data(), n,
                                nb.grad_buffer().data(), n, true);
        };
    }
    return finish<T>("matmul", std::move(node));
}

template <typename T>
Tensor<T> add_bias(const Tensor<T>& x, const Tensor<T>& bias) {
    if (x.rank() < 2 || bias.rank() != 1 || bias.dim(0) != x.dim(1))
        throw ShapeError("add_bias: bias " + shape_str(bias.shape()) + " does not match axis 1 of " +
                         shape_str(x.shape()));
    const std::size_t outer = x.dim(0), f = x.dim(1), inner = x.size() / (outer * f);
    std::vector<T> out(x.data().begin(), x.data().end());
    auto bv = bias.data();
    for (std::size_t o = 0; o < outer; ++o)
        for (std::size_t c = 0; c < f; ++c) {
            T* p = out.data() + (o * f + c) * inner;
            for (std::size_t i = 0; i < inner; ++i) p[i] += bv[c];
        }
    auto node = make_node<T>(x.shape(), std::move(out), {x.node(), bias.node()});
    if (node->requires_grad) {
        node->backward_fn = [outer, f, inner](Node<T>& self) {
            Node<T>& nx = *self.inputs[0];
            Node<T>& nb = *self.inputs[1];
            if (nx.requires_grad) {
                auto& g = nx.grad_buffer();
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
            }
            if (nb.requires_grad) {
                auto& g = nb.grad_buffer();
                for (std::size_t o = 0; o < outer; ++o)
                    for (std::size_t c = 0; c < f; ++c) {
                        const T* p = self.grad.data() + (o * f + c) * inner;
                        T acc = T(0);
                        for (std::size_t i = 0; i < inner; ++i) acc += p[i];
                        g[c] += acc;
                    }
            }
        };
    }
    return finish<T>("add_bias", std::move(node));
}

template <typename T>
Tensor<T> sum(const Tensor<T>& x) {
    T acc = T(0);
    for (T v : x.data()) acc += v;
    auto node = make_node<T>({}, {acc}, {x.node()});
    if (node->requires_grad) {
        node->backward_fn = [](Node<T>& self) {
            auto& g = self.inputs[0]->grad_buffer();
            for (auto& v : g) v += self.grad[0];
        };
    }
    return finish<T>("sum", std::move(node));
}

template <typename T>
Tensor<T> mean(const Tensor<T>& x) {
    return scale(sum(x), T(1) / static_cast<T>(x.size()));
}

template <typename T>
Tensor<T> conv2d(const Tensor<T>& input, const Tensor<T>& kernels, const Tensor<T>& bias,
                 std::size_t stride, Padding padding) {
    const bool batched = input.rank() == 4;
    if (!(input.rank() == 3 || batched))
        throw ShapeError("conv2d: input must be CxHxW or NxCxHxW, got " + shape_str(input.shape()));
    if (kernels.rank() != 4)
        throw ShapeError("conv2d: kernels must be FxCxkhxkw, got " + shape_str(kernels.shape()));
    if (stride == 0) throw ShapeError("conv2d: stride must be positive");
    ConvGeom g{};
    g.n = batched ? input.dim(0) : 1;
    g.c = input.dim(batched ? 1 : 0);
    g.h = input.dim(batched ? 2 : 1);
    g.w = input.dim(batched ? 3 : 2);
    g.f = kernels.dim(0);
    g.kh = kernels.dim(2);
    g.kw = kernels.dim(3);
    g.stride = stride;
    if (kernels.dim(1) != g.c)
        throw ShapeError("conv2d: kernels " + shape_str(kernels.shape()) + " do not match input channels of " +
                         shape_str(input.shape()));
    if (bias.defined() && (bias.rank() != 1 || bias.dim(0) != g.f))
        throw ShapeError("conv2d: bias " + shape_str(bias.shape()) + " does not match " + std::to_string(g.f) +
                         " filters");
    const std::size_t pad_h = padding == Padding::same ? g.kh - 1 : 0;
    const std::size_t pad_w = padding == Padding::same ? g.kw - 1 : 0;
    g.pad_top = pad_h / 2;
    g.pad_left = pad_w / 2;
    if (g.kh > g.h + pad_h || g.kw > g.w + pad_w)
        throw ShapeError("conv2d: kernel " + shape_str(kernels.shape()) + " larger than padded input " +
                         shape_str(input.shape()));
    g.ho = (g.h + pad_h - g.kh) / stride + 1;
    g.wo = (g.w + pad_w - g.kw) / stride + 1;

    const std::size_t ck = g.c * g.kh * g.kw, hw = g.ho * g.wo;
    std::vector<T> out(g.n * g.f * hw);
    std::vector<T> col(ck * hw);
    const T* in = input.data().data();
    const T* kv = kernels.data().data();
    for (std::size_t img = 0; img < g.n; ++img) {
        im2col(in + img * g.c * g.h * g.w, g, col.data());
        T* o = out.data() + img * g.f * hw;
        detail::gemm<T>(false, false, g.f, hw, ck, kv, ck, col.data(), hw, o, hw, false);
        if (bias.defined()) {
            auto bv = bias.data();
            for (std::size_t f = 0; f < g.f; ++f)
                for (std::size_t i = 0; i < hw; ++i) o[f * hw + i] += bv[f];
        }
    }

    Shape shape = batched ? Shape{g.n, g.f, g.ho, g.wo} : Shape{g.f, g.ho, g.wo};
    std::vector<NodePtr<T>> inputs{input.node(), kernels.node()};
    if (bias.defined()) inputs.push_back(bias.node());
    auto node = make_node<T>(std::move(shape), std::move(out), std::move(inputs));
    if (node->requires_grad) {
        node->backward_fn = [g, ck, hw](Node<T>& self) {
            Node<T>& nx = *self.inputs[0];
            Node<T>& nk = *self.inputs[1];
            Node<T>* nb = self.inputs.size() > 2 ? self.inputs[2].get() : nullptr;
            std::vector<T> col(ck * hw);
            std::vector<T> dcol(nx.requires_grad ? ck * hw : 0);
            for (std::size_t img = 0; img < g.n; ++img) {
                const T* dout = self.grad.data() + img * g.f * hw;
                if (nk.requires_grad) {
                    im2col(nx.value.data() + img * g.c * g.h * g.w, g, col.data());
                    detail::gemm<T>(false, true, g.f, ck, hw, dout, hw, col.data(), hw,
                                    nk.grad_buffer().data(), ck, true);
                }
                if (nx.requires_grad) {
                    detail::gemm<T>(true, false, ck, hw, g.f, nk.value.data(), ck, dout, hw, dcol.data(), hw,
                                    false);
                    col2im(dcol.data(), g, nx.grad_buffer().data() + img * g.c * g.h * g.w);
                }
                if (nb && nb->requires_grad) {
                    auto& gb = nb->grad_buffer();
                    for (std::size_t f = 0; f < g.f; ++f) {
                        T acc = T(0);
                        for (std::size_t i = 0; i < hw; ++i) acc += dout[f * hw + i];
                        gb[f] += acc;
                    }
                }
            }
        };
    }
    return finish<T>("conv2d", std::move(node));
}

template <typename T>
Tensor<T> maxpool2d(const Tensor<T>& input, std::size_t window, std::size_t stride) {
    if (input.rank() < 3)
        throw ShapeError("maxpool2d: input must be CxHxW or NxCxHxW, got " + shape_str(input.shape()));
    if (window == 0 || stride == 0) throw ShapeError("maxpool2d: window and stride must be positive");
    const std::size_t r = input.rank();
    const std::size_t h = input.dim(r - 2), w = input.dim(r - 1);
    if (window > h || window > w)
        throw ShapeError("maxpool2d: window " + std::to_string(window) + " larger than input " +
                         shape_str(input.shape()));
    const std::size_t ho = (h - window) / stride + 1, wo = (w - window) / stride + 1;
    const std::size_t planes = input.size() / (h * w);
    std::vector<T> out(planes * ho * wo);
    std::vector<std::size_t> argmax(out.size());
    const T* in = input.data().data();
    for (std::size_t p = 0; p < planes; ++p)
        for (std::size_t oy = 0; oy < ho; ++oy)
            for (std::size_t ox = 0; ox < wo; ++ox) {
                std::size_t best = p * h * w + (oy * stride) * w + ox * stride;
                for (std::size_t ky = 0; ky < window; ++ky)
                    for (std::size_t kx = 0; kx < window; ++kx) {
                        const std::size_t idx = p * h * w + (oy * stride + ky) * w + ox * stride + kx;
                        if (in[idx] > in[best]) best = idx;
                    }
                const std::size_t o = (p * ho + oy) * wo + ox;
                out[o] = in[best];
                argmax[o] = best;
            }
    Shape shape = input.shape();
    shape[r - 2] = ho;
    shape[r - 1] = wo;
    auto node = make_node<T>(std::move(shape), std::move(out), {input.node()});
    if (node->requires_grad) {
        node->backward_fn = [argmax = std::move(argmax)](Node<T>& self) {
            auto& g = self.inputs[0]->grad_buffer();
            for (std::size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += self.grad[o];
        };
    }
    return finish<T>("maxpool2d", std::move(node));
}

template <typename T>
Tensor<T> dropout_with_mask(const Tensor<T>& x, double rate, std::span<const std::uint8_t> keep) {
    if (rate < 0.0 || rate >= 1.0) throw ShapeError("dropout: rate must lie in [0,1)");
    if (keep.size() != x.size()) throw ShapeError("dropout: mask size does not match input");
    const T factor = static_cast<T>(1.0 / (1.0 - rate));
    std::vector<T> scale_v(x.size());
    for (std::size_t i = 0; i < keep.size(); ++i) scale_v[i] = keep[i] ? factor : T(0);
    auto xv = x.data();
    std::vector<T> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = xv[i] * scale_v[i];
    auto node = make_node<T>(x.shape(), std::move(out), {x.node()});
    if (node->requires_grad) {
        node->backward_fn = [scale_v = std::move(scale_v)](Node<T>& self) {
            auto& g = self.inputs[0]->grad_buffer();
            for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * scale_v[i];
        };
    }
    return finish<T>("dropout", std::move(node));
}

template <typename T>
Tensor<T> dropout(const Tensor<T>& x, double rate, bool training, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw ShapeError("dropout: rate must lie in [0,1)");
    if (!training || rate == 0.0) return x;
    std::bernoulli_distribution keep_dist(1.0 - rate);
    std::vector<std::uint8_t> keep(x.size());
    for (auto& k : keep) k = keep_dist(rng) ? 1 : 0;
    return dropout_with_mask(x, rate, keep);
}

template <typename T>
Tensor<T> select_time(const Tensor<T>& x, std::size_t t) {
    if (x.rank() != 3 || t >= x.dim(1))
        throw ShapeError("select_time: index " + std::to_string(t) + " invalid for " + shape_str(x.shape()));
    const std::size_t b = x.dim(0), l = x.dim(1), d = x.dim(2);
    std::vector<T> out(b * d);
    auto xv = x.data();
    for (std::size_t i = 0; i < b; ++i)
        std::copy_n(xv.begin() + static_cast<std::ptrdiff_t>((i * l + t) * d), d, out.begin() + static_cast<std::ptrdiff_t>(i * d));
    auto node = make_node<T>({b, d}, std::move(out), {x.node()});
    if (node->requires_grad) {
        node->backward_fn = [b, l, d, t](Node<T>& self) {
            auto& g = self.inputs[0]->grad_buffer();
            for (std::size_t i = 0; i < b; ++i)
                for (std::size_t j = 0; j < d; ++j) g[(i * l + t) * d + j] += self.grad[i * d + j];
        };
    }
    return finish<T>("select_time", std::move(node));
}

template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
    if (x.rank() != 2) throw ShapeError("softmax: expects NxK, got " + shape_str(x.shape()));
    const std::size_t n = x.dim(0), k = x.dim(1);
    auto xv = x.data();
    std::vector<T> out(x.size());
    for (std::size_t i = 0; i < n; ++i) {
        const T* row = xv.data() + i * k;
        const T mx = *std::max_element(row, row + k);
        T total = T(0);
        for (std::size_t j = 0; j < k; ++j) total += out[i * k + j] = std::exp(row[j] - mx);
        for (std::size_t j = 0; j < k; ++j) out[i * k + j] /= total;
    }
    auto node = make_node<T>(x.shape(), std::move(out), {x.node()});
    if (node->requires_grad) {
        node->backward_fn = [n, k](Node<T>& self) {
            auto& g = self.inputs[0]->grad_buffer();
            for (std::size_t i = 0; i < n; ++i) {
                const T* y = self.value.data() + i * k;
                const T* gy = self.grad.data() + i * k;
                T dot = T(0);
                for (std::size_t j = 0; j < k; ++j) dot += y[j] * gy[j];
                for (std::size_t j = 0; j < k; ++j) g[i * k + j] += y[j] * (gy[j] - dot);
            }
        };
    }
    return finish<T>("softmax", std::move(node));
}

template <typename T>
Tensor<T> bce_loss(const Tensor<T>& pred, std::span<const T> targets) {
    if (pred.size() != targets.size())
        throw ShapeError("bce_loss: " + std::to_string(pred.size()) + " predictions vs " +
                         std::to_string(targets.size()) + " targets");
    const T lo = static_cast<T>(kProbClamp), hi = T(1) - static_cast<T>(kProbClamp);
    auto pv = pred.data();
    for (std::size_t i = 0; i < pv.size(); ++i) {
        if (targets[i] != T(0) && targets[i] != T(1))
            throw ValidationError("bce_loss: target " + std::to_string(static_cast<double>(targets[i])) +
                                  " is not 0 or 1");
        if (!(pv[i] >= T(0) && pv[i] <= T(1)))
            throw ValidationError("bce_loss: prediction outside [0,1]");
    }
    const std::size_t n = pv.size();
    T total = T(0);
    for (std::size_t i = 0; i < n; ++i) {
        const T p = std::clamp(pv[i], lo, hi);
        total -= targets[i] * std::log(p) + (T(1) - targets[i]) * std::log(T(1) - p);
    }
    auto node = make_node<T>({}, {total / static_cast<T>(n)}, {pred.node()});
    if (node->requires_grad) {
        std::vector<T> y(targets.begin(), targets.end());
        node->backward_fn = [y = std::move(y), lo, hi](Node<T>& self) {
            Node<T>& in = *self.inputs[0];
            auto& g = in.grad_buffer();
            const T inv_n = T(1) / static_cast<T>(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                const T p = in.value[i];
                if (p < lo || p > hi) continue;  // clamped region is flat
                g[i] += self.grad[0] * inv_n * (-y[i] / p + (T(1) - y[i]) / (T(1) - p));
            }
        };
    }
    return finish<T>("bce_loss", std::move(node));
}

template <typename T>
Tensor<T> cce_loss(const Tensor<T>& probs, std::span<const std::size_t> targets) {
    if (probs.rank() != 2 || probs.dim(0) != targets.size())
        throw ShapeError("cce_loss: probabilities " + shape_str(probs.shape()) + " vs " +
                         std::to_string(targets.size()) + " targets");
    const std::size_t n = probs.dim(0), k = probs.dim(1);
    for (std::size_t t : targets)
        if (t >= k)
            throw ValidationError("cce_loss: target class " + std::to_string(t) + " out of range for " +
                                  std::to_string(k) + " classes");
    const T lo = static_cast<T>(kProbClamp), hi = T(1) - static_cast<T>(kProbClamp);
    auto pv = probs.data();
    T total = T(0);
    for (std::size_t i = 0; i < n; ++i) total -= std::log(std::clamp(pv[i * k + targets[i]], lo, hi));
    auto node = make_node<T>({}, {total / static_cast<T>(n)}, {probs.node()});
    if (node->requires_grad) {
        std::vector<std::size_t> y(targets.begin(), targets.end());
        node->backward_fn = [y = std::move(y), k, lo, hi](Node<T>& self) {
            Node<T>& in = *self.inputs[0];
            auto& g = in.grad_buffer();
            const T inv_n = T(1) / static_cast<T>(y.size());
            for (std::size_t i = 0; i < y.size(); ++i) {
                const T p = in.value[i * k + y[i]];
                if (p < lo || p > hi) continue;
                g[i * k + y[i]] -= self.grad[0] * inv_n / p;
            }
        };
    }
    return finish<T>("cce_loss", std::move(node));
}

#define VSNT_INSTANTIATE_OPS(T)                                                                         \
    template Tensor<T> add(const Tensor<T>&, const Tensor<T>&);                                         \
    template Tensor<T> sub(const Tensor<T>&, const Tensor<T>&);                                         \
    template Tensor<T> mul(const Tensor<T>&, const Tensor<T>&);                                         \
    template Tensor<T> scale(const Tensor<T>&, T);                                                      \
    template Tensor<T> rsub(T, const Tensor<T>&);                                                       \
    template Tensor<T> sigmoid(const Tensor<T>&);                                                       \
    template Tensor<T> tanh(const Tensor<T>&);                                                          \
    template Tensor<T> relu(const Tensor<T>&);                                                          \
    template Tensor<T> elementwise(ElementOp, std::span<const Tensor<T>>);                              \
    template Tensor<T> matmul(const Tensor<T>&, const Tensor<T>&);                                      \
    template Tensor<T> add_bias(const Tensor<T>&, const Tensor<T>&);                                    \
    template Tensor<T> sum(const Tensor<T>&);                                                           \
    template Tensor<T> mean(const Tensor<T>&);                                                          \
    template Tensor<T> conv2d(const Tensor<T>&, const Tensor<T>&, const Tensor<T>&, std::size_t, Padding); \
    template Tensor<T> maxpool2d(const Tensor<T>&, std::size_t, std::size_t);                           \
    template Tensor<T> dropout(const Tensor<T>&, double, bool, Rng&);                                   \
    template Tensor<T> dropout_with_mask(const Tensor<T>&, double, std::span<const std::uint8_t>);      \
    template Tensor<T> select_time(const Tensor<T>&, std::size_t);                                      \
    template Tensor<T> softmax(const Tensor<T>&);                                                       \
    template Tensor<T> bce_loss(const Tensor<T>&, std::span<const T>);                                  \
    template Tensor<T> cce_loss(const Tensor<T>&, std::span<const std::size_t>);

VSNT_INSTANTIATE_OPS(float)
VSNT_INSTANTIATE_OPS(double)

}  // namespace vsnt
