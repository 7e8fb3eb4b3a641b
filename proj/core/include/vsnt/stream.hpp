#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vsnt/model.hpp"
#include "vsnt/train.hpp"
#include "vsnt/video.hpp"

namespace vsnt {

struct AlertRecord {
    std::size_t frame = 0;  // 1-based count of frames received when the window completed
    double wall_ms = 0.0;   // inference duration
    double probability = 0.0;
    bool anomaly = false;
    std::string label;  // "anomaly" or "normal"
    std::size_t span_first = 0, span_last = 0;  // 0-based source frame indices

    // {"frame":..,"wall_ms":..,"p":..,"label":..,"span":[a,b]}
    std::string to_json() const;
};

struct StreamOptions {
    double fps = 30.0;
    double window_seconds = 1.0;
    // Frames between predictions; 0 means half a window (step * L / 2).
    std::size_t emit_stride = 0;
    double threshold = 0.5;
};

struct LatencySummary {
    std::size_t count = 0;
    double p50_ms = 0.0, p95_ms = 0.0;
};

// Nearest-rank percentiles.
LatencySummary summarize_latencies(std::vector<double> ms);

// A complete window ready for classification.
struct PendingWindow {
    std::size_t frame = 0;
    std::size_t span_first = 0, span_last = 0;
    Tensor<float> frames;  // [1 x L x 3 x S x S]
};

// Ring buffer of resized frames plus the window cadence. The first frame
// fixes the expected geometry.
class StreamSession {
public:
    StreamSession(const Model& model, StreamOptions opts);

    // Buffers the frame; returns a window when one is due.
    std::optional<PendingWindow> ingest(const Frame& frame);
    AlertRecord classify(const PendingWindow& w) const;
    // ingest + classify in one call. Records the latency.
    std::optional<AlertRecord> push_frame(const Frame& frame);

    std::size_t step() const { return step_; }
    std::size_t emit_stride() const { return emit_stride_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t buffered() const { return ring_.size(); }
    std::size_t frames_seen() const { return seen_; }
    const std::vector<double>& latencies() const { return latencies_; }
    void record_latency(double ms) { latencies_.push_back(ms); }

private:
    const Model& model_;
    StreamOptions opts_;
    std::size_t step_, capacity_, emit_stride_, side_;
    std::size_t seen_ = 0;
    std::size_t in_h_ = 0, in_w_ = 0;
    std::deque<std::vector<float>> ring_;
    std::vector<double> latencies_;
};

// Ingestion on the caller's thread, inference on a worker. Windows pass
// through a single slot; a newer window replaces one still waiting and the
// replaced window counts as dropped.
class AsyncStreamRunner {
public:
    AsyncStreamRunner(StreamSession& session, std::function<void(const AlertRecord&)> sink);
    ~AsyncStreamRunner();
    AsyncStreamRunner(const AsyncStreamRunner&) = delete;
    AsyncStreamRunner& operator=(const AsyncStreamRunner&) = delete;

    // Never waits for inference.
    void push(const Frame& frame);
    // Processes whatever is still in the slot, then stops the worker.
    void finish();
    std::size_t dropped() const;

private:
    void work();

    StreamSession& session_;
    std::function<void(const AlertRecord&)> sink_;
    mutable std::mutex mu_;
    std::condition_variable cv_;
    std::optional<PendingWindow> slot_;
    bool closed_ = false;
    std::size_t dropped_ = 0;
    std::exception_ptr failure_;
    std::thread worker_;
};

struct VideoReport {
    std::vector<AlertRecord> alerts;
    double probability = 0.0;  // max over windows, or the single prediction
    std::string verdict;       // "anomaly" or "normal"
    bool padded = false;
};

// Offline per-window records and verdict for one stored video. The window
// length defaults to the model config's window_seconds.
VideoReport infer_video(const Model& model, const VideoMeta& video, SampleMode mode, double threshold,
                        std::optional<double> window_seconds = std::nullopt);

}  // namespace vsnt
