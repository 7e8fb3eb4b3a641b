#include "vsnt/recurrent.hpp"

namespace vsnt {
namespace {

template <typename T>
GateWeights<T> make_gate(const std::string& name, std::size_t input, std::size_t hidden, Rng& rng) {
    Tensor<T> w({input, hidden});
    Tensor<T> u({hidden, hidden});
    glorot_uniform(w, input, hidden, rng);
    glorot_uniform(u, hidden, hidden, rng);
    return {Parameter<T>(name + ".W", std::move(w)), Parameter<T>(name + ".U", std::move(u)),
            Parameter<T>(name + ".b", Tensor<T>::zeros({hidden}))};
}

template <typename T>
Tensor<T> as_rows(const Tensor<T>& x) {
    return x.rank() == 1 ? x.reshape({1, x.dim(0)}) : x;
}

template <typename T>
void check_dims(const char* cell, const Tensor<T>& x, const Tensor<T>& h, std::size_t input, std::size_t hidden) {
    if (x.rank() != 2 || x.dim(1) != input)
        throw ShapeError(std::string(cell) + ": input " + shape_str(x.shape()) + " does not match input size " +
                         std::to_string(input));
    if (!h.defined() || h.rank() != 2 || h.dim(0) != x.dim(0) || h.dim(1) != hidden)
        throw ShapeError(std::string(cell) + ": state does not match batch " + std::to_string(x.dim(0)) +
                         " and hidden size " + std::to_string(hidden));
}

// W x + U h + b
template <typename T>
Tensor<T> affine(const GateWeights<T>& g, const Tensor<T>& x, const Tensor<T>& h) {
    return add_bias(add(matmul(x, g.w.value()), matmul(h, g.u.value())), g.b.value());
}

}  // namespace

template <typename T>
Tensor<T> RecurrentCell<T>::run(const Tensor<T>& features) const {
    if (features.rank() != 3 || features.dim(2) != input_size())
        throw ShapeError("recurrent run expects BxLx" + std::to_string(input_size()) + ", got " +
                         shape_str(features.shape()));
    auto state = initial_state(features.dim(0));
    for (std::size_t t = 0; t < features.dim(1); ++t) state = step(select_time(features, t), state);
    return state.h;
}

template <typename T>
GruCell<T>::GruCell(std::size_t input, std::size_t hidden, Rng& init_rng, const std::string& prefix)
    : input_(input),
      hidden_(hidden),
      z_(make_gate<T>(prefix + ".z", input, hidden, init_rng)),
      r_(make_gate<T>(prefix + ".r", input, hidden, init_rng)),
      n_(make_gate<T>(prefix + ".h", input, hidden, init_rng)) {}

template <typename T>
CellState<T> GruCell<T>::step(const Tensor<T>& x_in, const CellState<T>& state) const {
    const auto x = as_rows(x_in);
    check_dims("gru_step", x, state.h, input_, hidden_);
    const auto& h = state.h;
    auto z = sigmoid(affine(z_, x, h));
    auto r = sigmoid(affine(r_, x, h));
    auto n = tanh(add_bias(add(matmul(x, n_.w.value()), matmul(mul(r, h), n_.u.value())), n_.b.value()));
    auto h_next = add(mul(rsub(T(1), z), h), mul(z, n));
    return {h_next, {}};
}

template <typename T>
ParameterList<T> GruCell<T>::parameters() {
    ParameterList<T> out;
    for (auto* g : {&z_, &r_, &n_}) {
        out.push_back(&g->w);
        out.push_back(&g->u);
        out.push_back(&g->b);
    }
    return out;
}

template <typename T>
LstmCell<T>::LstmCell(std::size_t input, std::size_t hidden, Rng& init_rng, const std::string& prefix)
    : input_(input),
      hidden_(hidden),
      f_(make_gate<T>(prefix + ".f", input, hidden, init_rng)),
      i_(make_gate<T>(prefix + ".i", input, hidden, init_rng)),
      o_(make_gate<T>(prefix + ".o", input, hidden, init_rng)),
      g_(make_gate<T>(prefix + ".g", input, hidden, init_rng)) {}

template <typename T>
CellState<T> LstmCell<T>::step(const Tensor<T>& x_in, const CellState<T>& state) const {
    const auto x = as_rows(x_in);
    check_dims("lstm_step", x, state.h, input_, hidden_);
    if (!state.c.defined() || state.c.shape() != state.h.shape())
        throw ShapeError("lstm_step: cell memory missing or mis-shaped");
    auto f = sigmoid(affine(f_, x, state.h));
    auto i = sigmoid(affine(i_, x, state.h));
    auto o = sigmoid(affine(o_, x, state.h));
    auto g = tanh(affine(g_, x, state.h));
    auto c_next = add(mul(f, state.c), mul(i, g));
    auto h_next = mul(o, tanh(c_next));
    return {h_next, c_next};
}

template <typename T>
ParameterList<T> LstmCell<T>::parameters() {
    ParameterList<T> out;
    for (auto* g : {&f_, &i_, &o_, &g_}) {
        out.push_back(&g->w);
        out.push_back(&g->u);
        out.push_back(&g->b);
    }
    return out;
}

template <typename T>
std::unique_ptr<RecurrentCell<T>> make_cell(CellKind kind, std::size_t input, std::size_t hidden, Rng& init_rng) {
    if (kind == CellKind::gru) return std::make_unique<GruCell<T>>(input, hidden, init_rng);
    return std::make_unique<LstmCell<T>>(input, hidden, init_rng);
}

template class RecurrentCell<float>;
template class RecurrentCell<double>;
template class GruCell<float>;
template class GruCell<double>;
template class LstmCell<float>;
template class LstmCell<double>;
template std::unique_ptr<RecurrentCell<float>> make_cell<float>(CellKind, std::size_t, std::size_t, Rng&);
template std::unique_ptr<RecurrentCell<double>> make_cell<double>(CellKind, std::size_t, std::size_t, Rng&);

}  // namespace vsnt
