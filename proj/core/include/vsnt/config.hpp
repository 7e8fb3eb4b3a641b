#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vsnt {

enum class BackboneKind { conv3, conv5, conv8, vgg19 };
enum class CellKind { gru, lstm };
enum class LossKind { bce, cce };
enum class SampleMode { single_sequence, sliding };

struct HeadLayerSpec {
    std::size_t width = 0;
    double dropout = 0.0;
    bool operator==(const HeadLayerSpec&) const = default;
};

// Full architecture and training geometry. Field names double as the JSON keys.
struct ModelConfig {
    BackboneKind backbone = BackboneKind::conv3;
    CellKind cell = CellKind::gru;
    std::size_t hidden_size = 32;
    std::vector<HeadLayerSpec> head{{64, 0.3}, {16, 0.0}};
    bool with_pred_head = true;
    std::size_t seq_len = 30;
    std::size_t frame_size = 112;
    std::size_t channels = 3;
    // First trainable backbone layer; unset means the backbone's default.
    std::optional<std::size_t> freeze_boundary;
    double lr = 0.001;
    // Heavy-ball momentum on top of SGD; 0 is plain SGD.
    double momentum = 0.0;
    std::size_t batch = 16;
    LossKind loss = LossKind::bce;
    // Training-time sampling.
    SampleMode mode = SampleMode::single_sequence;
    double window_seconds = 1.0;
    // Sliding stride in sampled frames; 0 means seq_len / 2.
    std::size_t sliding_stride = 0;
    bool augment = true;

    bool operator==(const ModelConfig&) const = default;

    // Throws ConfigError naming the offending field.
    void validate() const;
    std::size_t effective_sliding_stride() const { return sliding_stride ? sliding_stride : std::max<std::size_t>(1, seq_len / 2); }
    std::size_t output_classes() const { return loss == LossKind::cce ? 2 : 1; }
};

std::string to_string(BackboneKind kind);
std::string to_string(CellKind kind);
std::string to_string(LossKind kind);
std::string to_string(SampleMode mode);
BackboneKind parse_backbone(std::string_view s);
CellKind parse_cell(std::string_view s);
LossKind parse_loss(std::string_view s);
SampleMode parse_mode(std::string_view s);

std::string config_to_json(const ModelConfig& cfg);
ModelConfig config_from_json(std::string_view text);
// Applies only the keys present in `json_text` on top of `base`.
ModelConfig apply_config_overrides(ModelConfig base, std::string_view json_text);
ModelConfig load_config_file(const std::string& path, ModelConfig base = {});

}  // namespace vsnt
