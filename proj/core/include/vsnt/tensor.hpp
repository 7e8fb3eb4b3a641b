#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "vsnt/errors.hpp"

namespace vsnt {

using Shape = std::vector<std::size_t>;

inline std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>{});
}

inline std::string shape_str(const Shape& shape) {
    std::string s = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) s += "x";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

namespace detail {
inline thread_local bool grad_recording = true;
}

inline bool grad_enabled() { return detail::grad_recording; }

// Disables graph recording on this thread for the guard's lifetime.
class NoGradGuard {
public:
    NoGradGuard() : previous_(detail::grad_recording) { detail::grad_recording = false; }
    ~NoGradGuard() { detail::grad_recording = previous_; }
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool previous_;
};

template <typename T>
struct Node {
    Shape shape;
    std::vector<T> value;
    std::vector<T> grad;  // empty until something flows into it
    bool requires_grad = false;
    bool consumed = false;
    std::vector<std::shared_ptr<Node>> inputs;
    // Reads this->grad and accumulates into the inputs' grad buffers.
    std::function<void(Node&)> backward_fn;

    std::vector<T>& grad_buffer() {
        if (grad.empty()) grad.assign(value.size(), T(0));
        return grad;
    }
};

// Dense row-major array with reverse-mode gradient tracking. Copies share the
// underlying storage; use clone() for a deep copy.
template <typename T>
class Tensor {
public:
    using value_type = T;

    Tensor() = default;

    explicit Tensor(Shape shape, T fill = T(0)) : node_(std::make_shared<Node<T>>()) {
        check_extents(shape);
        node_->value.assign(shape_numel(shape), fill);
        node_->shape = std::move(shape);
    }

    Tensor(Shape shape, std::vector<T> values) : node_(std::make_shared<Node<T>>()) {
        check_extents(shape);
        if (shape_numel(shape) != values.size())
            throw ShapeError("tensor of shape " + shape_str(shape) + " needs " +
                             std::to_string(shape_numel(shape)) + " values, got " +
                             std::to_string(values.size()));
        node_->value = std::move(values);
        node_->shape = std::move(shape);
    }

    static Tensor zeros(Shape shape) { return Tensor(std::move(shape), T(0)); }
    static Tensor ones(Shape shape) { return Tensor(std::move(shape), T(1)); }
    static Tensor scalar(T v) { return Tensor(Shape{}, std::vector<T>{v}); }

    static Tensor from_node(std::shared_ptr<Node<T>> node) {
        Tensor t;
        t.node_ = std::move(node);
        return t;
    }

    bool defined() const { return static_cast<bool>(node_); }
    const std::shared_ptr<Node<T>>& node() const { return node_; }

    const Shape& shape() const { return node_->shape; }
    std::size_t rank() const { return node_->shape.size(); }
    std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
    std::size_t size() const { return node_->value.size(); }

    std::span<const T> data() const { return node_->value; }
    // Direct mutation is for leaves (weights, inputs) only.
    std::span<T> data_mut() { return node_->value; }
    T at(std::size_t i) const { return node_->value.at(i); }

    T item() const {
        if (size() != 1) throw ShapeError("item() on tensor of shape " + shape_str(shape()));
        return node_->value[0];
    }

    bool requires_grad() const { return node_->requires_grad; }
    Tensor& set_requires_grad(bool on) {
        node_->requires_grad = on;
        return *this;
    }

    bool has_grad() const { return !node_->grad.empty(); }
    std::span<const T> grad() const { return node_->grad; }
    void zero_grad() {
        node_->grad.clear();
        node_->consumed = false;
    }

    Tensor clone() const { return Tensor(shape(), node_->value); }
    Tensor detach() const { return clone(); }

    // Differentiable view with new extents over the same element order.
    Tensor reshape(Shape new_shape) const {
        check_extents(new_shape);
        if (shape_numel(new_shape) != size())
            throw ShapeError("cannot reshape " + shape_str(shape()) + " to " + shape_str(new_shape));
        auto out = std::make_shared<Node<T>>();
        out->shape = std::move(new_shape);
        out->value = node_->value;
        if (node_->requires_grad && grad_enabled()) {
            out->requires_grad = true;
            out->inputs = {node_};
            out->backward_fn = [](Node<T>& self) {
                auto& g = self.inputs[0]->grad_buffer();
                for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
            };
        }
        return from_node(std::move(out));
    }

    // Reverse sweep from a scalar. The recorded graph is released afterwards,
    // so a second call on the same result is an error.
    void backward() const {
        if (!defined()) throw GraphError("backward() on an empty tensor");
        if (size() != 1)
            throw GraphError("backward() needs a scalar, got shape " + shape_str(shape()));
        if (!node_->requires_grad)
            throw GraphError("backward() on a tensor that was not produced by a recorded computation");
        if (node_->consumed)
            throw GraphError("backward() called twice on the same result without a reset");

        std::vector<Node<T>*> order;
        std::unordered_set<Node<T>*> seen;
        std::vector<std::pair<Node<T>*, std::size_t>> stack{{node_.get(), 0}};
        seen.insert(node_.get());
        while (!stack.empty()) {
            auto& [n, next] = stack.back();
            if (next < n->inputs.size()) {
                Node<T>* child = n->inputs[next++].get();
                if (child->requires_grad && seen.insert(child).second) stack.push_back({child, 0});
            } else {
                order.push_back(n);
                stack.pop_back();
            }
        }

        node_->grad_buffer()[0] += T(1);
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            Node<T>* n = *it;
            if (n->backward_fn && !n->grad.empty()) n->backward_fn(*n);
        }
        for (Node<T>* n : order) {
            if (n->backward_fn) {
                n->backward_fn = nullptr;
                n->inputs.clear();
                if (n != node_.get()) n->grad.clear();
            }
        }
        node_->consumed = true;
    }

private:
    static void check_extents(const Shape& shape) {
        for (std::size_t e : shape)
            if (e == 0) throw ShapeError("zero extent in shape " + shape_str(shape));
    }

    std::shared_ptr<Node<T>> node_;
};

}  // namespace vsnt
