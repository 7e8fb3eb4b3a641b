#include <doctest.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "../support/tempdir.hpp"
#include "cli.hpp"
#include "vsnt/checkpoint.hpp"
#include "vsnt/errors.hpp"
#include "vsnt/sampling.hpp"
#include "vsnt/stream.hpp"
#include "vsnt/synth.hpp"
#include "vsnt/train.hpp"

using testing_support::TempDir;
using namespace vsnt;
using nlohmann::json;

namespace {

ModelConfig small_config(std::size_t seq_len = 4) {
    ModelConfig c;
    c.frame_size = 16;
    c.seq_len = seq_len;
    c.hidden_size = 8;
    c.head = {{8, 0.0}};
    c.batch = 4;
    c.lr = 0.01;
    return c;
}

std::vector<Frame> frames_of(const VideoMeta& v) {
    std::vector<Frame> out;
    for (std::size_t i = 0; i < v.n_frames; ++i) out.push_back(load_frame(v, i));
    return out;
}

VideoMeta stored_video(const TempDir& dir, std::size_t n_frames, SynthClass kind = SynthClass::agitated,
                       std::size_t side = 24) {
    SynthSpec s;
    s.kind = kind;
    s.n_frames = n_frames;
    s.side = side;
    s.seed = 17;
    return generate_synthetic_video(s, dir / "video", "video");
}

struct CliResult {
    int code;
    std::string out, err;
};

CliResult run_cli(const std::vector<std::string>& args, const std::string& stdin_bytes = {}) {
    std::istringstream in(stdin_bytes);
    std::ostringstream out, err;
    const int code = cli::run(args, in, out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> split_lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string line; std::getline(in, line);)
        if (!line.empty()) out.push_back(line);
    return out;
}

}  // namespace

TEST_SUITE("sentinel-cli") {

TEST_CASE("no prediction before a full window at step 1") {
    TempDir dir;
    const auto video = stored_video(dir, 31, SynthClass::calm, 16);
    Model model(small_config(30), 1);
    StreamSession s(model, {30.0, 1.0, 0, 0.5});
    CHECK(s.step() == 1);
    CHECK(s.capacity() == 30);
    const auto frames = frames_of(video);
    for (std::size_t i = 0; i < 29; ++i) CHECK_FALSE(s.push_frame(frames[i]).has_value());
    auto a = s.push_frame(frames[29]);
    REQUIRE(a.has_value());
    CHECK(a->frame == 30);
    CHECK(a->span_first == 0);
    CHECK(a->span_last == 29);
}

TEST_CASE("warm-up length follows the computed step") {
    TempDir dir;
    const auto video = stored_video(dir, 70, SynthClass::calm, 16);
    Model model(small_config(4), 1);
    StreamSession s(model, {30.0, 2.0, 0, 0.5});
    const std::size_t step = compute_step(30.0, 2.0, 4);
    CHECK(s.step() == step);
    CHECK(step == 15);
    CHECK(s.emit_stride() == 2 * step);
    std::size_t first = 0;
    std::vector<std::size_t> spans;
    for (const auto& f : frames_of(video))
        if (auto a = s.push_frame(f)) {
            if (!first) first = a->frame;
            spans.push_back(a->span_first);
            CHECK(a->span_last == a->span_first + 3 * step);
        }
    CHECK(first == 4 * step);
    CHECK(spans == std::vector<std::size_t>{0});
    CHECK(s.buffered() == s.capacity());
}

TEST_CASE("streaming probabilities equal offline sliding evaluation") {
    TempDir dir;
    const auto video = stored_video(dir, 47);
    auto cfg = small_config(5);
    cfg.window_seconds = 10.0 / 30.0;  // step 2
    Model model(cfg, 9);

    const auto offline = infer_video(model, video, SampleMode::sliding, 0.5);
    const auto scored = score_video(model, video, SampleMode::sliding);
    StreamSession s(model, {video.fps, cfg.window_seconds, 0, 0.5});
    std::vector<AlertRecord> online;
    for (const auto& f : frames_of(video))
        if (auto a = s.push_frame(f)) online.push_back(*a);

    REQUIRE(online.size() == offline.alerts.size());
    REQUIRE(online.size() == scored.window_probabilities.size());
    for (std::size_t i = 0; i < online.size(); ++i) {
        CHECK(online[i].probability == offline.alerts[i].probability);
        CHECK(online[i].probability == scored.window_probabilities[i]);
        CHECK(online[i].span_first == offline.alerts[i].span_first);
        CHECK(online[i].span_last == offline.alerts[i].span_last);
        CHECK(online[i].frame == offline.alerts[i].frame);
    }
}

TEST_CASE("per-frame cadence with emit stride 1") {
    TempDir dir;
    const auto video = stored_video(dir, 12, SynthClass::calm, 16);
    Model model(small_config(4), 2);
    StreamSession s(model, {30.0, 4.0 / 30.0, 1, 0.5});
    std::size_t alerts = 0;
    for (const auto& f : frames_of(video)) {
        alerts += s.push_frame(f).has_value() ? 1u : 0u;
        CHECK(s.buffered() <= s.capacity());
    }
    CHECK(alerts == 12 - 4 + 1);
    CHECK(s.latencies().size() == alerts);
}

TEST_CASE("frame geometry must stay constant") {
    Model model(small_config(4), 2);
    StreamSession s(model, {});
    s.push_frame(Frame(20, 20, 0.2f));
    CHECK_THROWS_AS(s.push_frame(Frame(20, 24, 0.2f)), ShapeError);
}

TEST_CASE("alert label follows the threshold") {
    Model model(small_config(4), 2);
    StreamSession low(model, {30.0, 4.0 / 30.0, 1, 0.0});
    StreamSession high(model, {30.0, 4.0 / 30.0, 1, 1.0});
    std::optional<AlertRecord> a, b;
    for (int i = 0; i < 4; ++i) {
        a = low.push_frame(Frame(16, 16, 0.1f * float(i)));
        b = high.push_frame(Frame(16, 16, 0.1f * float(i)));
    }
    REQUIRE(a);
    REQUIRE(b);
    CHECK(a->label == "anomaly");
    CHECK(b->label == "normal");
    CHECK(a->probability == b->probability);
}

TEST_CASE("async runner keeps the newest window and counts drops") {
    TempDir dir;
    const auto video = stored_video(dir, 40, SynthClass::agitated, 16);
    auto cfg = small_config(4);
    Model model(cfg, 4);
    StreamOptions opts{30.0, 4.0 / 30.0, 1, 0.5};

    StreamSession sync(model, opts);
    std::map<std::size_t, double> expected;
    for (const auto& f : frames_of(video))
        if (auto a = sync.push_frame(f)) expected[a->frame] = a->probability;

    StreamSession session(model, opts);
    std::vector<AlertRecord> got;
    std::mutex mu;
    AsyncStreamRunner runner(session, [&](const AlertRecord& a) {
        std::this_thread::sleep_for(std::chrono::milliseconds(15));
        std::lock_guard lock(mu);
        got.push_back(a);
    });
    std::size_t last_drop = 0;
    for (const auto& f : frames_of(video)) {
        runner.push(f);
        CHECK(runner.dropped() >= last_drop);
        last_drop = runner.dropped();
    }
    runner.finish();

    CHECK(runner.dropped() > 0);
    CHECK(got.size() + runner.dropped() == expected.size());
    REQUIRE_FALSE(got.empty());
    CHECK(got.back().frame == expected.rbegin()->first);
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].probability == expected.at(got[i].frame));
        if (i) CHECK(got[i].frame > got[i - 1].frame);
    }
}

TEST_CASE("alert records serialise as one JSON object") {
    AlertRecord a{30, 1.25, 0.75, true, "anomaly", 0, 29};
    const auto j = json::parse(a.to_json());
    CHECK(j.at("frame") == 30);
    CHECK(j.at("wall_ms") == 1.25);
    CHECK(j.at("p") == 0.75);
    CHECK(j.at("label") == "anomaly");
    CHECK(j.at("span") == json::array({0, 29}));
    CHECK(a.to_json().find('\n') == std::string::npos);
}

TEST_CASE("latency percentiles use nearest rank") {
    std::vector<double> ms;
    for (int i = 20; i >= 1; --i) ms.push_back(i);
    auto s = summarize_latencies(ms);
    CHECK(s.count == 20);
    CHECK(s.p50_ms == 10);
    CHECK(s.p95_ms == 19);
    CHECK(summarize_latencies({}).count == 0);
    CHECK(summarize_latencies({4.0}).p95_ms == 4.0);
}

TEST_CASE("short video in single mode gives one padded prediction") {
    TempDir dir;
    const auto video = stored_video(dir, 3, SynthClass::calm, 16);
    Model model(small_config(4), 5);
    auto r = infer_video(model, video, SampleMode::single_sequence, 0.5);
    REQUIRE(r.alerts.size() == 1);
    CHECK(r.padded);
    CHECK(r.probability == r.alerts[0].probability);
    CHECK(r.verdict == (r.probability >= 0.5 ? "anomaly" : "normal"));
}

TEST_CASE("sliding verdict is the window maximum") {
    TempDir dir;
    const auto video = stored_video(dir, 30, SynthClass::agitated, 16);
    auto cfg = small_config(4);
    cfg.window_seconds = 4.0 / 30.0;
    Model model(cfg, 5);
    auto r = infer_video(model, video, SampleMode::sliding, 0.5);
    REQUIRE(r.alerts.size() > 1);
    double mx = 0;
    for (const auto& a : r.alerts) {
        mx = std::max(mx, a.probability);
        CHECK(r.probability >= a.probability);
    }
    CHECK(r.probability == mx);
}

TEST_CASE("cli without arguments prints usage") {
    auto r = run_cli({});
    CHECK(r.code == 1);
    CHECK(r.err.find("Usage") != std::string::npos);
}

TEST_CASE("cli rejects unknown flags") {
    auto r = run_cli({"synth", "--out", "x", "--bogus"});
    CHECK(r.code == 1);
    CHECK(r.err.find("Usage") != std::string::npos);
    CHECK(run_cli({"--mode", "diagonal", "split", "--manifest", "m"}).code == 1);
    CHECK(run_cli({"infer", "--checkpoint", "c"}).code == 1);
}

TEST_CASE("cli eval on a missing checkpoint fails at runtime") {
    TempDir dir;
    auto r = run_cli({"eval", "--checkpoint", (dir / "none.vsnt").string(), "--manifest", (dir / "m").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("none.vsnt") != std::string::npos);
}

TEST_CASE("cli seed falls back to VSNT_SEED") {
    TempDir dir;
    ::setenv("VSNT_SEED", "not-a-number", 1);
    CHECK(run_cli({"synth", "--out", (dir / "a").string(), "--calm", "1", "--agitated", "1", "--frames", "4",
                   "--side", "16"})
              .code == 1);
    ::setenv("VSNT_SEED", "41", 1);
    REQUIRE(run_cli({"synth", "--out", (dir / "b").string(), "--calm", "1", "--agitated", "1", "--frames", "4",
                     "--side", "16"})
                .code == 0);
    ::unsetenv("VSNT_SEED");
    REQUIRE(run_cli({"--seed", "41", "synth", "--out", (dir / "c").string(), "--calm", "1", "--agitated", "1",
                     "--frames", "4", "--side", "16"})
                .code == 0);
    auto bytes = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const auto f = std::filesystem::path("videos") / "agitated_0000" / frame_filename(3);
    CHECK(bytes(dir / "b" / f) == bytes(dir / "c" / f));
}

TEST_CASE("cli train then eval writes parseable metrics") {
    TempDir dir;
    {
        std::ofstream cfg(dir / "cfg.json");
        cfg << config_to_json(small_config(4));
    }
    const auto ds = (dir / "ds").string();
    const auto manifest = (dir / "ds" / "manifest.jsonl").string();
    const auto ckpt = (dir / "model.vsnt").string();
    REQUIRE(run_cli({"--seed", "3", "synth", "--out", ds, "--calm", "4", "--agitated", "4", "--frames", "12",
                     "--side", "16"})
                .code == 0);
    REQUIRE(run_cli({"split", "--manifest", manifest}).code == 0);
    auto t = run_cli({"--config", (dir / "cfg.json").string(), "train", "--manifest", manifest, "--out", ckpt,
                      "--epochs", "2"});
    REQUIRE(t.code == 0);
    CHECK(std::filesystem::exists(ckpt + ".curve.csv"));
    CHECK(std::filesystem::exists(ckpt + ".curve.svg"));

    const auto metrics = (dir / "metrics.csv").string();
    auto e = run_cli({"eval", "--checkpoint", ckpt, "--manifest", manifest, "--metrics-out", metrics});
    REQUIRE(e.code == 0);
    std::ifstream in(metrics);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    CHECK(header == "config,accuracy,precision,recall,f1,tp,fp,tn,fn");
    std::vector<std::string> cols;
    std::stringstream ss(row);
    for (std::string c; std::getline(ss, c, ',');) cols.push_back(c);
    REQUIRE(cols.size() == 9);
    CHECK(cols[0] == "conv3-gru-pred");
    if (!cols[4].empty()) {
        const double f1 = std::stod(cols[4]);
        CHECK(f1 >= 0.0);
        CHECK(f1 <= 1.0);
    }

    auto info = run_cli({"inspect-checkpoint", ckpt});
    CHECK(info.code == 0);
    CHECK(info.out.find("\"seq_len\": 4") != std::string::npos);

    auto v = run_cli({"--window-seconds", "0.2", "infer", "--checkpoint", ckpt, "--video",
                      (dir / "ds" / "videos" / "calm_0000").string()});
    REQUIRE(v.code == 0);
    const auto lines = split_lines(v.out);
    REQUIRE(lines.size() >= 2);
    const auto summary = json::parse(lines.back());
    CHECK(summary.at("windows") == lines.size() - 1);

    std::ostringstream ppm;
    for (std::size_t i = 0; i < 12; ++i)
        write_ppm(ppm, load_frame(read_video_meta(dir / "ds" / "videos" / "calm_0000"), i));
    auto s = run_cli({"--window-seconds", "0.2", "infer", "--checkpoint", ckpt, "--stream", "--sync", "--fps", "30"},
                     ppm.str());
    REQUIRE(s.code == 0);
    const auto alerts = split_lines(s.out);
    CHECK(alerts.size() == lines.size() - 1);
    for (std::size_t i = 0; i < alerts.size(); ++i)
        CHECK(json::parse(alerts[i]).at("p") == json::parse(lines[i]).at("p"));
    CHECK(json::parse(s.err).at("frames") == 12);

    auto m = run_cli({"--config", (dir / "cfg.json").string(), "matrix", "--manifest", manifest, "--epochs", "1",
                      "--backbones", "conv3", "--cells", "lstm", "--heads", "nopred", "--csv",
                      (dir / "grid.csv").string()});
    REQUIRE(m.code == 0);
    CHECK(m.out.find("conv3-lstm-nopred") != std::string::npos);
    CHECK(std::filesystem::exists(dir / "grid.csv"));
}

}  // TEST_SUITE
