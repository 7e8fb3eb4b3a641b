#include "cli.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "vsnt/checkpoint.hpp"
#include "vsnt/config.hpp"
#include "vsnt/dataset.hpp"
#include "vsnt/errors.hpp"
#include "vsnt/matrix.hpp"
#include "vsnt/stream.hpp"
#include "vsnt/synth.hpp"
#include "vsnt/train.hpp"

namespace vsnt::cli {
namespace {

namespace fs = std::filesystem;

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Globals {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    double threshold = 0.5;
    std::optional<double> window_seconds;
    std::optional<std::string> mode;
};

std::uint64_t resolve_seed(const Globals& g) {
    if (g.seed) return *g.seed;
    const char* env = std::getenv("VSNT_SEED");
    if (!env || !*env) return 0;
    std::uint64_t v = 0;
    const char* end = env + std::strlen(env);
    auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec != std::errc() || ptr != end) throw UsageError(std::string("VSNT_SEED is not an unsigned integer: ") + env);
    return v;
}

ModelConfig resolve_config(const Globals& g) {
    ModelConfig cfg = g.config_path.empty() ? ModelConfig{} : load_config_file(g.config_path);
    if (g.window_seconds) cfg.window_seconds = *g.window_seconds;
    if (g.mode) cfg.mode = parse_mode(*g.mode);
    cfg.validate();
    return cfg;
}

SampleMode resolve_mode(const Globals& g, SampleMode fallback) { return g.mode ? parse_mode(*g.mode) : fallback; }

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << text;
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ',');)
        if (!item.empty()) out.push_back(item);
    return out;
}

std::string metrics_csv(const std::string& key, const MetricsReport& m) {
    MatrixResult r;
    MatrixRow row;
    row.key = key;
    row.report = m;
    r.rows.push_back(std::move(row));
    return r.csv();
}

VideoMeta video_from_dir(const fs::path& dir, std::optional<double> fps) {
    if (!fs::is_directory(dir)) throw IoError("video directory not found: " + dir.string());
    VideoMeta meta;
    if (fs::exists(dir / "meta.json")) {
        meta = read_video_meta(dir);
        meta.source_path = dir.string();
    } else {
        meta.id = dir.filename().string();
        meta.n_frames = count_frames(dir);
        meta.fps = 30.0;
        meta.source_path = dir.string();
    }
    if (fps) meta.fps = *fps;
    if (meta.n_frames == 0) throw ValidationError("video '" + meta.id + "' is empty");
    return meta;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
    CLI::App app{"Video anomaly detection: synthetic data, training, evaluation and streaming inference",
                 "vsentinel"};
    app.require_subcommand(1);
    app.fallthrough();

    Globals g;
    app.add_option("--config", g.config_path, "JSON file overriding model config fields");
    app.add_option("--seed", g.seed, "Random seed (falls back to VSNT_SEED, then 0)");
    app.add_option("--threshold", g.threshold, "Anomaly probability threshold")->check(CLI::Range(0.0, 1.0));
    app.add_option("--window-seconds", g.window_seconds, "Seconds covered by one sequence")
        ->check(CLI::PositiveNumber);
    app.add_option("--mode", g.mode, "Sequence preparation")->check(CLI::IsMember({"single", "sliding"}));

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic calm/agitated dataset");
    std::string synth_out;
    SynthDatasetSpec sds;
    synth->add_option("--out", synth_out, "Output directory")->required();
    synth->add_option("--calm", sds.n_calm, "Number of calm videos");
    synth->add_option("--agitated", sds.n_agitated, "Number of agitated videos");
    synth->add_option("--frames", sds.n_frames, "Frames per video");
    synth->add_option("--side", sds.side, "Frame side in pixels");
    synth->add_option("--fps", sds.fps, "Declared frame rate");
    synth->add_option("--sprites", sds.sprite_count, "Sprites per video");
    double synth_ratio = 0.0;
    synth->add_option("--split", synth_ratio, "Also write a stratified split with this train ratio");

    // split
    auto* split = app.add_subcommand("split", "Write a stratified train/test split next to a manifest");
    std::string split_manifest;
    double ratio = 0.6;
    split->add_option("--manifest", split_manifest, "Manifest file")->required();
    split->add_option("--ratio", ratio, "Train fraction")->check(CLI::Range(0.0, 1.0));

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a model on the train split");
    std::string train_manifest, train_out, curve_prefix;
    std::size_t epochs = 10;
    train_cmd->add_option("--manifest", train_manifest, "Manifest file")->required();
    train_cmd->add_option("--out", train_out, "Checkpoint path")->required();
    train_cmd->add_option("--epochs", epochs, "Epochs")->check(CLI::PositiveNumber);
    train_cmd->add_option("--curve", curve_prefix, "Learning-curve prefix (default: checkpoint path)");

    // eval
    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on one split");
    std::string eval_ckpt, eval_manifest, eval_split = "test", metrics_out;
    eval->add_option("--checkpoint", eval_ckpt, "Checkpoint file")->required();
    eval->add_option("--manifest", eval_manifest, "Manifest file")->required();
    eval->add_option("--split", eval_split, "Partition")->check(CLI::IsMember({"train", "test"}));
    eval->add_option("--metrics-out", metrics_out, "Metrics CSV path");

    // matrix
    auto* matrix = app.add_subcommand("matrix", "Train and compare backbone x cell x head combinations");
    std::string matrix_manifest, matrix_csv, backbones = "conv3,conv5,conv8,vgg19", cells = "gru,lstm",
                                             heads = "pred,nopred";
    std::size_t matrix_epochs = 10;
    matrix->add_option("--manifest", matrix_manifest, "Manifest file")->required();
    matrix->add_option("--epochs", matrix_epochs, "Epochs per configuration")->check(CLI::PositiveNumber);
    matrix->add_option("--backbones", backbones, "Comma-separated backbones");
    matrix->add_option("--cells", cells, "Comma-separated cells");
    matrix->add_option("--heads", heads, "Comma-separated head variants (pred, nopred)");
    matrix->add_option("--csv", matrix_csv, "Write the comparison CSV here");

    // infer
    auto* infer = app.add_subcommand("infer", "Run a checkpoint on a stored video or a PPM stream");
    std::string infer_ckpt, infer_video_dir, infer_input, alert_log;
    bool stream_flag = false, sync_flag = false;
    std::optional<double> fps;
    std::size_t emit_stride = 0;
    infer->add_option("--checkpoint", infer_ckpt, "Checkpoint file")->required();
    auto* stream_opt = infer->add_flag("--stream", stream_flag, "Read concatenated P6 frames");
    auto* video_opt = infer->add_option("--video", infer_video_dir, "Frame directory");
    stream_opt->excludes(video_opt);
    infer->add_option("--input", infer_input, "Stream source file or pipe (default stdin)");
    infer->add_option("--fps", fps, "Frame rate of the input")->check(CLI::PositiveNumber);
    infer->add_option("--emit-stride", emit_stride, "Frames between stream predictions (default half a window)");
    infer->add_option("--log", alert_log, "Append alerts to this file");
    infer->add_flag("--sync", sync_flag, "Classify every due window on the ingest thread");

    // inspect-checkpoint
    auto* inspect = app.add_subcommand("inspect-checkpoint", "Print a checkpoint's header and parameters");
    std::string inspect_path;
    inspect->add_option("checkpoint", inspect_path, "Checkpoint file")->required();

    std::vector<const char*> argv{"vsentinel"};
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help();
        return kUsage;
    }
    if (*infer && !stream_flag && infer_video_dir.empty()) {
        err << "error: infer needs --stream or --video\n\n" << infer->help();
        return kUsage;
    }

    try {
        const std::uint64_t seed = resolve_seed(g);

        if (*synth) {
            sds.seed = seed;
            auto m = generate_synthetic_dataset(synth_out, sds);
            if (synth_ratio > 0.0) {
                m = split_dataset(m, synth_ratio, seed);
                write_manifest(fs::path(synth_out) / "manifest.jsonl", m);
            }
            out << "wrote " << m.records.size() << " videos to " << (fs::path(synth_out) / "manifest.jsonl").string()
                << "\n";
        } else if (*split) {
            auto m = split_dataset(read_manifest(split_manifest), ratio, seed);
            write_manifest(split_manifest, m);
            out << "train " << m.partition(Partition::train).size() << ", test "
                << m.partition(Partition::test).size() << "\n";
        } else if (*train_cmd) {
            const auto cfg = resolve_config(g);
            const auto m = ingest_manifest(train_manifest);
            TrainOptions o;
            o.epochs = epochs;
            o.seed = seed;
            o.threshold = g.threshold;
            o.on_epoch = [&](const CurveRow& r) {
                char buf[160];
                std::snprintf(buf, sizeof buf, "epoch %zu  loss %.4f  acc %.3f  val_loss %.4f  val_acc %.3f\n",
                              r.epoch, r.train_loss, r.train_acc, r.val_loss, r.val_acc);
                out << buf << std::flush;
                return true;
            };
            auto result = train(cfg, m, o);
            save_checkpoint(*result.model, train_out, seed, result.curve.rows.size());
            const std::string prefix = curve_prefix.empty() ? train_out : curve_prefix;
            write_text(prefix + ".curve.csv", result.curve.to_csv());
            write_text(prefix + ".curve.svg", result.curve.to_svg());
            if (result.skipped_videos) err << "skipped " << result.skipped_videos << " unreadable videos\n";
            out << "saved " << train_out << "\n";
        } else if (*eval) {
            auto ck = load_checkpoint(eval_ckpt);
            const auto m = ingest_manifest(eval_manifest);
            const auto mode = resolve_mode(g, SampleMode::single_sequence);
            const auto report = evaluate(*ck.model, m, parse_partition(eval_split), g.threshold, mode);
            const auto csv = metrics_csv(matrix_key(ck.model->config()), report);
            out << csv;
            if (!metrics_out.empty()) write_text(metrics_out, csv);
        } else if (*matrix) {
            auto cfg = resolve_config(g);
            const auto m = ingest_manifest(matrix_manifest);
            MatrixAxes axes;
            axes.backbones.clear();
            axes.cells.clear();
            axes.pred_heads.clear();
            for (const auto& b : split_list(backbones)) axes.backbones.push_back(parse_backbone(b));
            for (const auto& c : split_list(cells)) axes.cells.push_back(parse_cell(c));
            for (const auto& h : split_list(heads)) {
                if (h != "pred" && h != "nopred") throw UsageError("unknown head variant '" + h + "'");
                axes.pred_heads.push_back(h == "pred");
            }
            TrainOptions o;
            o.epochs = matrix_epochs;
            o.seed = seed;
            o.threshold = g.threshold;
            const auto result = run_matrix(cfg, m, axes, o, resolve_mode(g, SampleMode::single_sequence));
            out << result.table();
            if (!matrix_csv.empty()) write_text(matrix_csv, result.csv());
        } else if (*infer) {
            auto ck = load_checkpoint(infer_ckpt);
            const Model& model = *ck.model;
            std::ofstream log;
            if (!alert_log.empty()) {
                log.open(alert_log, std::ios::app);
                if (!log) throw IoError("cannot open alert log " + alert_log);
            }
            auto emit = [&](const AlertRecord& a) {
                const auto line = a.to_json();
                out << line << "\n" << std::flush;
                if (log) log << line << "\n" << std::flush;
            };
            if (!infer_video_dir.empty()) {
                const auto video = video_from_dir(infer_video_dir, fps);
                const auto mode = resolve_mode(g, SampleMode::sliding);
                const auto report = infer_video(model, video, mode, g.threshold, g.window_seconds);
                for (const auto& a : report.alerts) emit(a);
                nlohmann::json summary = {{"video", video.id},
                                          {"verdict", report.verdict},
                                          {"p", report.probability},
                                          {"padded", report.padded},
                                          {"windows", report.alerts.size()}};
                out << summary.dump() << "\n";
            } else {
                StreamOptions so;
                so.fps = fps.value_or(30.0);
                so.window_seconds = g.window_seconds.value_or(model.config().window_seconds);
                so.emit_stride = emit_stride;
                so.threshold = g.threshold;
                StreamSession session(model, so);
                std::ifstream file;
                std::istream* src = &in;
                if (!infer_input.empty()) {
                    file.open(infer_input, std::ios::binary);
                    if (!file) throw IoError("cannot open stream input " + infer_input);
                    src = &file;
                }
                std::size_t dropped = 0;
                if (sync_flag) {
                    while (auto f = read_ppm_frame(*src))
                        if (auto a = session.push_frame(*f)) emit(*a);
                } else {
                    AsyncStreamRunner runner(session, emit);
                    while (auto f = read_ppm_frame(*src)) runner.push(*f);
                    runner.finish();
                    dropped = runner.dropped();
                }
                const auto lat = summarize_latencies(session.latencies());
                nlohmann::json summary = {{"frames", session.frames_seen()},
                                          {"step", session.step()},
                                          {"alerts", lat.count},
                                          {"dropped", dropped},
                                          {"p50_ms", lat.p50_ms},
                                          {"p95_ms", lat.p95_ms}};
                err << summary.dump() << "\n";
            }
        } else if (*inspect) {
            auto ck = load_checkpoint(inspect_path);
            nlohmann::json j = {{"config", nlohmann::json::parse(config_to_json(ck.model->config()))},
                                {"seed", ck.seed},
                                {"epoch", ck.epoch}};
            out << j.dump(2) << "\n";
            std::size_t total = 0;
            for (auto* p : ck.model->parameters()) {
                out << p->name() << " " << shape_str(p->value().shape()) << (p->trainable() ? "" : " frozen")
                    << "\n";
                total += p->value().size();
            }
            out << "total parameters " << total << "\n";
        }
    } catch (const UsageError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kOk;
}

}  // namespace vsnt::cli
