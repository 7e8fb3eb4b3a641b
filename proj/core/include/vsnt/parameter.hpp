#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "vsnt/tensor.hpp"

namespace vsnt {

// A named weight tensor. Frozen parameters never receive gradient and are
// skipped by the optimizer.
template <typename T>
class Parameter {
public:
    Parameter() = default;
    Parameter(std::string name, Tensor<T> value, bool trainable = true)
        : name_(std::move(name)), value_(std::move(value)) {
        set_trainable(trainable);
    }

    const std::string& name() const { return name_; }
    const Tensor<T>& value() const { return value_; }
    Tensor<T>& value() { return value_; }

    bool trainable() const { return value_.requires_grad(); }
    void set_trainable(bool on) {
        value_.set_requires_grad(on);
        if (!on) value_.zero_grad();
    }

    // Accumulated gradient; zeros when nothing has flowed in (always for frozen).
    std::vector<T> grad() const {
        if (!value_.has_grad()) return std::vector<T>(value_.size(), T(0));
        auto g = value_.grad();
        return {g.begin(), g.end()};
    }

    void zero_grad() { value_.zero_grad(); }

private:
    std::string name_;
    Tensor<T> value_;
};

template <typename T>
using ParameterList = std::vector<Parameter<T>*>;

template <typename T>
void zero_grad(std::span<Parameter<T>* const> params) {
    for (auto* p : params) p->zero_grad();
}

// Plain SGD: value -= lr * grad for trainable parameters, then clears grads.
template <typename T>
void sgd_step(std::span<Parameter<T>* const> params, T lr) {
    if (!(lr > T(0))) throw ConfigError("sgd_step: learning rate must be positive");
    for (auto* p : params) {
        if (p->trainable() && p->value().has_grad()) {
            auto g = p->value().grad();
            auto v = p->value().data_mut();
            for (std::size_t i = 0; i < v.size(); ++i) v[i] -= lr * g[i];
        }
        p->zero_grad();
    }
}

template <typename T>
void zero_grad(const ParameterList<T>& params) {
    zero_grad(std::span<Parameter<T>* const>(params));
}

template <typename T>
void sgd_step(const ParameterList<T>& params, T lr) {
    sgd_step(std::span<Parameter<T>* const>(params), lr);
}

// SGD with heavy-ball momentum: v = mu * v + g, value -= lr * v. With mu = 0
// this is exactly sgd_step. Frozen parameters and ones without a gradient
// keep their velocity untouched.
template <typename T>
class MomentumSgd {
public:
    MomentumSgd(ParameterList<T> params, T lr, T momentum) : params_(std::move(params)), lr_(lr), mu_(momentum) {
        if (!(lr > T(0))) throw ConfigError("MomentumSgd: learning rate must be positive");
        if (!(momentum >= T(0) && momentum < T(1))) throw ConfigError("MomentumSgd: momentum must lie in [0,1)");
        for (auto* p : params_) velocity_.emplace_back(p->value().size(), T(0));
    }

    void step() {
        for (std::size_t k = 0; k < params_.size(); ++k) {
            auto* p = params_[k];
            if (p->trainable() && p->value().has_grad()) {
                auto g = p->value().grad();
                auto v = p->value().data_mut();
                auto& vel = velocity_[k];
                for (std::size_t i = 0; i < v.size(); ++i) {
                    vel[i] = mu_ * vel[i] + g[i];
                    v[i] -= lr_ * vel[i];
                }
            }
            p->zero_grad();
        }
    }

private:
    ParameterList<T> params_;
    T lr_, mu_;
    std::vector<std::vector<T>> velocity_;
};

}  // namespace vsnt
