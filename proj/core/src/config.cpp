#include "vsnt/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "vsnt/backbone.hpp"
#include "vsnt/errors.hpp"

namespace vsnt {
namespace {

using nlohmann::json;

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw ConfigError("config field '" + field + "': " + why);
}

json to_json_value(const ModelConfig& c) {
    json head = json::array();
    for (const auto& h : c.head) head.push_back({{"width", h.width}, {"dropout", h.dropout}});
    json j = {{"backbone", to_string(c.backbone)},
              {"cell", to_string(c.cell)},
              {"hidden_size", c.hidden_size},
              {"head", head},
              {"with_pred_head", c.with_pred_head},
              {"seq_len", c.seq_len},
              {"frame_size", c.frame_size},
              {"channels", c.channels},
              {"freeze_boundary", nullptr},
              {"lr", c.lr},
              {"momentum", c.momentum},
              {"batch", c.batch},
              {"loss", to_string(c.loss)},
              {"mode", to_string(c.mode)},
              {"window_seconds", c.window_seconds},
              {"sliding_stride", c.sliding_stride},
              {"augment", c.augment}};
    if (c.freeze_boundary) j["freeze_boundary"] = *c.freeze_boundary;
    return j;
}

template <typename V>
V get_as(const json& j, const char* key) {
    try {
        return j.at(key).get<V>();
    } catch (const json::exception& e) {
        bad_field(key, e.what());
    }
}

void apply_fields(ModelConfig& c, const json& j) {
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const char* known[] = {"backbone", "cell",    "hidden_size", "head",           "with_pred_head",
                                  "seq_len",  "frame_size", "channels", "freeze_boundary", "lr", "momentum",
                                  "batch",    "loss",    "mode",        "window_seconds", "sliding_stride",
                                  "augment"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        bool ok = false;
        for (const char* k : known) ok = ok || key == k;
        if (!ok) bad_field(key, "unknown field");
    }
    if (j.contains("backbone")) c.backbone = parse_backbone(get_as<std::string>(j, "backbone"));
    if (j.contains("cell")) c.cell = parse_cell(get_as<std::string>(j, "cell"));
    if (j.contains("hidden_size")) c.hidden_size = get_as<std::size_t>(j, "hidden_size");
    if (j.contains("head")) {
        c.head.clear();
        for (const auto& h : j.at("head")) {
            HeadLayerSpec spec;
            spec.width = get_as<std::size_t>(h, "width");
            spec.dropout = h.value("dropout", 0.0);
            c.head.push_back(spec);
        }
    }
    if (j.contains("with_pred_head")) c.with_pred_head = get_as<bool>(j, "with_pred_head");
    if (j.contains("seq_len")) c.seq_len = get_as<std::size_t>(j, "seq_len");
    if (j.contains("frame_size")) c.frame_size = get_as<std::size_t>(j, "frame_size");
    if (j.contains("channels")) c.channels = get_as<std::size_t>(j, "channels");
    if (j.contains("freeze_boundary")) {
        if (j.at("freeze_boundary").is_null())
            c.freeze_boundary.reset();
        else
            c.freeze_boundary = get_as<std::size_t>(j, "freeze_boundary");
    }
    if (j.contains("lr")) c.lr = get_as<double>(j, "lr");
    if (j.contains("momentum")) c.momentum = get_as<double>(j, "momentum");
    if (j.contains("batch")) c.batch = get_as<std::size_t>(j, "batch");
    if (j.contains("loss")) c.loss = parse_loss(get_as<std::string>(j, "loss"));
    if (j.contains("mode")) c.mode = parse_mode(get_as<std::string>(j, "mode"));
    if (j.contains("window_seconds")) c.window_seconds = get_as<double>(j, "window_seconds");
    if (j.contains("sliding_stride")) c.sliding_stride = get_as<std::size_t>(j, "sliding_stride");
    if (j.contains("augment")) c.augment = get_as<bool>(j, "augment");
}

json parse(std::string_view text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
}

}  // namespace

void ModelConfig::validate() const {
    if (seq_len < 1) bad_field("seq_len", "must be >= 1");
    if (frame_size < 8) bad_field("frame_size", "must be >= 8");
    if (channels < 1) bad_field("channels", "must be >= 1");
    if (hidden_size < 1) bad_field("hidden_size", "must be >= 1");
    if (batch < 1) bad_field("batch", "must be >= 1");
    if (!(lr >= 0.0)) bad_field("lr", "must be >= 0");
    if (!(momentum >= 0.0 && momentum < 1.0)) bad_field("momentum", "must lie in [0,1)");
    if (!(window_seconds > 0.0)) bad_field("window_seconds", "must be > 0");
    for (const auto& h : head) {
        if (h.width < 1) bad_field("head", "layer width must be >= 1");
        if (h.dropout < 0.0 || h.dropout >= 1.0) bad_field("head", "dropout must lie in [0,1)");
    }
    if (freeze_boundary && *freeze_boundary > backbone_layer_count(backbone))
        bad_field("freeze_boundary", std::to_string(*freeze_boundary) + " exceeds the " +
                                         std::to_string(backbone_layer_count(backbone)) + " layers of " +
                                         to_string(backbone));
}

std::string to_string(BackboneKind kind) {
    switch (kind) {
        case BackboneKind::conv3: return "conv3";
        case BackboneKind::conv5: return "conv5";
        case BackboneKind::conv8: return "conv8";
        case BackboneKind::vgg19: return "vgg19";
    }
    return "?";
}

std::string to_string(CellKind kind) { return kind == CellKind::gru ? "gru" : "lstm"; }
std::string to_string(LossKind kind) { return kind == LossKind::bce ? "bce" : "cce"; }
std::string to_string(SampleMode mode) { return mode == SampleMode::single_sequence ? "single" : "sliding"; }

BackboneKind parse_backbone(std::string_view s) {
    if (s == "conv3") return BackboneKind::conv3;
    if (s == "conv5") return BackboneKind::conv5;
    if (s == "conv8") return BackboneKind::conv8;
    if (s == "vgg19") return BackboneKind::vgg19;
    bad_field("backbone", "unknown kind '" + std::string(s) + "'");
}

CellKind parse_cell(std::string_view s) {
    if (s == "gru") return CellKind::gru;
    if (s == "lstm") return CellKind::lstm;
    bad_field("cell", "unknown kind '" + std::string(s) + "'");
}

LossKind parse_loss(std::string_view s) {
    if (s == "bce") return LossKind::bce;
    if (s == "cce") return LossKind::cce;
    bad_field("loss", "unknown kind '" + std::string(s) + "'");
}

SampleMode parse_mode(std::string_view s) {
    if (s == "single" || s == "single_sequence") return SampleMode::single_sequence;
    if (s == "sliding") return SampleMode::sliding;
    bad_field("mode", "unknown mode '" + std::string(s) + "'");
}

std::string config_to_json(const ModelConfig& cfg) { return to_json_value(cfg).dump(); }

ModelConfig config_from_json(std::string_view text) { return apply_config_overrides(ModelConfig{}, text); }

ModelConfig apply_config_overrides(ModelConfig base, std::string_view json_text) {
    apply_fields(base, parse(json_text));
    base.validate();
    return base;
}

ModelConfig load_config_file(const std::string& path, ModelConfig base) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return apply_config_overrides(std::move(base), ss.str());
}

}  // namespace vsnt
