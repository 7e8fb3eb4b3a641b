#pragma once

#include <cstddef>
#include <memory>
#include <string>

#include "vsnt/config.hpp"
#include "vsnt/layers.hpp"

namespace vsnt {

// Hidden state for a batch: h [B x H]; c [B x H] is only defined for LSTM.
template <typename T>
struct CellState {
    Tensor<T> h;
    Tensor<T> c;

    static CellState zeros(std::size_t batch, std::size_t hidden, bool with_cell) {
        CellState s{Tensor<T>::zeros({batch, hidden}), {}};
        if (with_cell) s.c = Tensor<T>::zeros({batch, hidden});
        return s;
    }
};

template <typename T>
class RecurrentCell {
public:
    virtual ~RecurrentCell() = default;
    // x: [B x D] (or [D] for a single sample, state then [1 x H]).
    virtual CellState<T> step(const Tensor<T>& x, const CellState<T>& state) const = 0;
    virtual CellState<T> initial_state(std::size_t batch) const = 0;
    virtual ParameterList<T> parameters() = 0;
    virtual std::size_t input_size() const = 0;
    virtual std::size_t hidden_size() const = 0;

    // Runs the cell over a [B x L x D] feature sequence, returning the final h.
    Tensor<T> run(const Tensor<T>& features) const;
};

// One gate's weights: input projection W [D x H], recurrent U [H x H], bias [H].
template <typename T>
struct GateWeights {
    Parameter<T> w;
    Parameter<T> u;
    Parameter<T> b;
};

// z = s(Wz x + Uz h + bz), r = s(Wr x + Ur h + br),
// n = tanh(Wh x + Uh (r*h) + bh), h' = (1 - z) * h + z * n.
template <typename T>
class GruCell final : public RecurrentCell<T> {
public:
    GruCell(std::size_t input, std::size_t hidden, Rng& init_rng, const std::string& prefix = "gru");

    CellState<T> step(const Tensor<T>& x, const CellState<T>& state) const override;
    CellState<T> initial_state(std::size_t batch) const override {
        return CellState<T>::zeros(batch, hidden_, false);
    }
    ParameterList<T> parameters() override;
    std::size_t input_size() const override { return input_; }
    std::size_t hidden_size() const override { return hidden_; }

    GateWeights<T>& update_gate() { return z_; }
    GateWeights<T>& reset_gate() { return r_; }
    GateWeights<T>& candidate() { return n_; }

private:
    std::size_t input_;
    std::size_t hidden_;
    GateWeights<T> z_, r_, n_;
};

// f, i, o = s(W x + U h + b), g = tanh(W x + U h + b),
// c' = f * c + i * g, h' = o * tanh(c').
template <typename T>
class LstmCell final : public RecurrentCell<T> {
public:
    LstmCell(std::size_t input, std::size_t hidden, Rng& init_rng, const std::string& prefix = "lstm");

    CellState<T> step(const Tensor<T>& x, const CellState<T>& state) const override;
    CellState<T> initial_state(std::size_t batch) const override {
        return CellState<T>::zeros(batch, hidden_, true);
    }
    ParameterList<T> parameters() override;
    std::size_t input_size() const override { return input_; }
    std::size_t hidden_size() const override { return hidden_; }

    GateWeights<T>& forget_gate() { return f_; }
    GateWeights<T>& input_gate() { return i_; }
    GateWeights<T>& output_gate() { return o_; }
    GateWeights<T>& candidate() { return g_; }

private:
    std::size_t input_;
    std::size_t hidden_;
    GateWeights<T> f_, i_, o_, g_;
};

template <typename T>
std::unique_ptr<RecurrentCell<T>> make_cell(CellKind kind, std::size_t input, std::size_t hidden, Rng& init_rng);

}  // namespace vsnt
