#include "vsnt/model.hpp"

namespace vsnt {

template <typename T>
ClassifierHead<T>::ClassifierHead(const ModelConfig& cfg, std::size_t input, Rng& init_rng) : loss_(cfg.loss) {
    std::size_t width = input;
    if (cfg.with_pred_head) {
        std::size_t idx = 0;
        for (const auto& spec : cfg.head) {
            layers_.push_back(std::make_unique<DenseLayer<T>>("head." + std::to_string(idx++), width, spec.width,
                                                              Activation::relu, init_rng));
            if (spec.dropout > 0.0) layers_.push_back(std::make_unique<DropoutLayer<T>>(spec.dropout));
            width = spec.width;
        }
    }
    const bool binary = cfg.loss == LossKind::bce;
    layers_.push_back(std::make_unique<DenseLayer<T>>("head.out", width, cfg.output_classes(),
                                                      binary ? Activation::sigmoid : Activation::none, init_rng));
}

template <typename T>
Tensor<T> ClassifierHead<T>::forward(const Tensor<T>& h_final, Mode mode, Rng& rng) const {
    Tensor<T> x = h_final.rank() == 1 ? h_final.reshape({1, h_final.dim(0)}) : h_final;
    for (auto& l : layers_) x = l->forward(x, mode, rng);
    if (loss_ == LossKind::cce) return softmax(x);
    return x.reshape({x.dim(0)});
}

template <typename T>
ParameterList<T> ClassifierHead<T>::parameters() {
    ParameterList<T> out;
    for (auto& l : layers_)
        for (auto* p : l->parameters()) out.push_back(p);
    return out;
}

template <typename T>
AnomalyNet<T>::AnomalyNet(const ModelConfig& cfg, std::uint64_t init_seed) : cfg_(cfg), init_seed_(init_seed) {
    cfg_.validate();
    Rng init_rng(init_seed);
    backbone_ = build_backbone<T>(cfg_, init_rng);
    cell_ = make_cell<T>(cfg_.cell, backbone_->feature_size(), cfg_.hidden_size, init_rng);
    head_ = std::make_unique<ClassifierHead<T>>(cfg_, cfg_.hidden_size, init_rng);
    backbone_->freeze_prefix(cfg_.freeze_boundary.value_or(default_freeze_boundary(cfg_.backbone)));
}

template <typename T>
Tensor<T> AnomalyNet<T>::forward(const Tensor<T>& batch, Mode mode, Rng& rng) const {
    TimeDistributed<T> td(*backbone_, cfg_.seq_len);
    Tensor<T> input = batch.rank() == 4 ? batch.reshape([&] {
        Shape s{1};
        s.insert(s.end(), batch.shape().begin(), batch.shape().end());
        return s;
    }())
                                        : batch;
    auto features = td.forward(input, mode, rng);
    auto h = cell_->run(features);
    return head_->forward(h, mode, rng);
}

template <typename T>
std::vector<T> AnomalyNet<T>::predict(const Tensor<T>& batch) const {
    NoGradGuard no_grad;
    Rng unused(0);
    return positive_probabilities(forward(batch, Mode::eval, unused));
}

template <typename T>
Tensor<T> AnomalyNet<T>::loss(const Tensor<T>& output, std::span<const std::size_t> labels) const {
    if (cfg_.loss == LossKind::cce) return cce_loss(output, labels);
    std::vector<T> targets(labels.begin(), labels.end());
    return bce_loss(output, std::span<const T>(targets));
}

template <typename T>
std::vector<T> AnomalyNet<T>::positive_probabilities(const Tensor<T>& output) const {
    auto v = output.data();
    if (cfg_.loss == LossKind::bce) return {v.begin(), v.end()};
    const std::size_t k = output.dim(1);
    std::vector<T> out(output.dim(0));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = v[i * k + 1];
    return out;
}

template <typename T>
ParameterList<T> AnomalyNet<T>::parameters() {
    ParameterList<T> out = backbone_->parameters();
    for (auto* p : cell_->parameters()) out.push_back(p);
    for (auto* p : head_->parameters()) out.push_back(p);
    return out;
}

template <typename T>
Parameter<T>* AnomalyNet<T>::find_parameter(const std::string& name) {
    for (auto* p : parameters())
        if (p->name() == name) return p;
    return nullptr;
}

template class ClassifierHead<float>;
template class ClassifierHead<double>;
template class AnomalyNet<float>;
template class AnomalyNet<double>;

}  // namespace vsnt
