#include "vsnt/stream.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include <json.hpp>

#include "vsnt/errors.hpp"
#include "vsnt/sampling.hpp"
#include "vsnt/transform.hpp"

namespace vsnt {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

const char* label_for(bool anomaly) { return anomaly ? "anomaly" : "normal"; }

}  // namespace

std::string AlertRecord::to_json() const {
    nlohmann::json j = {{"frame", frame},
                        {"wall_ms", wall_ms},
                        {"p", probability},
                        {"label", label},
                        {"span", {span_first, span_last}}};
    return j.dump();
}

LatencySummary summarize_latencies(std::vector<double> ms) {
    LatencySummary s;
    s.count = ms.size();
    if (ms.empty()) return s;
    std::sort(ms.begin(), ms.end());
    auto rank = [&](double q) {
        const auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(ms.size())));
        return ms[std::clamp<std::size_t>(k, 1, ms.size()) - 1];
    };
    s.p50_ms = rank(0.50);
    s.p95_ms = rank(0.95);
    return s;
}

StreamSession::StreamSession(const Model& model, StreamOptions opts)
    : model_(model), opts_(opts), side_(model.config().frame_size) {
    if (!(opts_.fps > 0.0)) throw ValidationError("stream: fps must be > 0");
    if (!(opts_.window_seconds > 0.0)) throw ValidationError("stream: window_seconds must be > 0");
    const auto& cfg = model.config();
    step_ = compute_step(opts_.fps, opts_.window_seconds, cfg.seq_len);
    capacity_ = cfg.seq_len * step_;
    emit_stride_ = opts_.emit_stride ? opts_.emit_stride : cfg.effective_sliding_stride() * step_;
}

std::optional<PendingWindow> StreamSession::ingest(const Frame& frame) {
    if (frame.channels != 3 || frame.pixels.size() != 3 * frame.height * frame.width)
        throw ShapeError("stream: malformed frame");
    if (seen_ == 0) {
        in_h_ = frame.height;
        in_w_ = frame.width;
    } else if (frame.height != in_h_ || frame.width != in_w_) {
        throw ShapeError("stream: frame " + std::to_string(seen_ + 1) + " is " + std::to_string(frame.width) + "x" +
                         std::to_string(frame.height) + ", session expects " + std::to_string(in_w_) + "x" +
                         std::to_string(in_h_));
    }
    ring_.push_back(resize_frame(frame, side_).pixels);
    if (ring_.size() > capacity_) ring_.pop_front();
    ++seen_;

    if (seen_ < capacity_ || (seen_ - capacity_) % emit_stride_ != 0) return std::nullopt;

    const std::size_t L = model_.config().seq_len;
    const std::size_t per = 3 * side_ * side_;
    const std::size_t start = seen_ - capacity_;  // ring holds frames [start, seen_)
    std::vector<float> data(L * per);
    for (std::size_t k = 0; k < L; ++k) {
        const auto& src = ring_[k * step_];
        std::copy(src.begin(), src.end(), data.begin() + static_cast<std::ptrdiff_t>(k * per));
    }
    PendingWindow w;
    w.frame = seen_;
    w.span_first = start;
    w.span_last = start + (L - 1) * step_;
    w.frames = Tensor<float>({1, L, 3, side_, side_}, std::move(data));
    return w;
}

AlertRecord StreamSession::classify(const PendingWindow& w) const {
    const auto t0 = Clock::now();
    const double p = model_.predict(w.frames)[0];
    AlertRecord a;
    a.wall_ms = ms_since(t0);
    a.frame = w.frame;
    a.probability = p;
    a.anomaly = p >= opts_.threshold;
    a.label = label_for(a.anomaly);
    a.span_first = w.span_first;
    a.span_last = w.span_last;
    return a;
}

std::optional<AlertRecord> StreamSession::push_frame(const Frame& frame) {
    auto w = ingest(frame);
    if (!w) return std::nullopt;
    auto a = classify(*w);
    record_latency(a.wall_ms);
    return a;
}

AsyncStreamRunner::AsyncStreamRunner(StreamSession& session, std::function<void(const AlertRecord&)> sink)
    : session_(session), sink_(std::move(sink)), worker_([this] { work(); }) {}

AsyncStreamRunner::~AsyncStreamRunner() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
    if (worker_.joinable()) worker_.join();
}

void AsyncStreamRunner::push(const Frame& frame) {
    auto w = session_.ingest(frame);
    if (!w) return;
    std::lock_guard lock(mu_);
    if (failure_) std::rethrow_exception(failure_);
    if (slot_) ++dropped_;
    slot_ = std::move(w);
    cv_.notify_one();
}

void AsyncStreamRunner::finish() {
    {
        std::lock_guard lock(mu_);
        closed_ = true;
    }
    cv_.notify_all();
    if (worker_.joinable()) worker_.join();
    if (failure_) std::rethrow_exception(failure_);
}

std::size_t AsyncStreamRunner::dropped() const {
    std::lock_guard lock(mu_);
    return dropped_;
}

void AsyncStreamRunner::work() {
    for (;;) {
        PendingWindow w;
        {
            std::unique_lock lock(mu_);
            cv_.wait(lock, [&] { return slot_.has_value() || closed_; });
            if (!slot_) return;
            w = std::move(*slot_);
            slot_.reset();
        }
        try {
            auto a = session_.classify(w);
            session_.record_latency(a.wall_ms);
            sink_(a);
        } catch (...) {
            std::lock_guard lock(mu_);
            failure_ = std::current_exception();
            return;
        }
    }
}

VideoReport infer_video(const Model& model, const VideoMeta& video, SampleMode mode, double threshold,
                        std::optional<double> window_seconds) {
    video.validate();
    if (video.n_frames == 0) throw ValidationError("video '" + video.id + "' is empty");
    const auto& cfg = model.config();
    VideoReport report;

    auto classify = [&](std::span<const std::size_t> idx, std::size_t frame) {
        const auto t0 = Clock::now();
        auto seq = load_frames(video, idx, cfg.frame_size);
        Shape s{1};
        s.insert(s.end(), seq.shape().begin(), seq.shape().end());
        const double p = model.predict(seq.reshape(s))[0];
        AlertRecord a;
        a.wall_ms = ms_since(t0);
        a.frame = frame;
        a.probability = p;
        a.anomaly = p >= threshold;
        a.label = label_for(a.anomaly);
        a.span_first = idx.front();
        a.span_last = idx.back();
        report.alerts.push_back(a);
        report.probability = report.alerts.size() == 1 ? p : std::max(report.probability, p);
    };

    if (mode == SampleMode::single_sequence) {
        auto s = sample_whole_video(video.n_frames, cfg.seq_len);
        report.padded = s.padded;
        classify(s.indices, video.n_frames);
    } else {
        const std::size_t step = compute_step(video.fps, window_seconds.value_or(cfg.window_seconds), cfg.seq_len);
        for (const auto& w : sliding_windows(video.n_frames, cfg.seq_len, step, cfg.effective_sliding_stride())) {
            report.padded = report.padded || w.padded;
            classify(w.indices, std::min(w.start + cfg.seq_len * step, video.n_frames));
        }
    }
    report.verdict = label_for(report.probability >= threshold);
    return report;
}

}  // namespace vsnt
