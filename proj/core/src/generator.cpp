#include "vsnt/generator.hpp"

#include <algorithm>
#include <random>
#include <set>

#include "vsnt/errors.hpp"
#include "vsnt/sampling.hpp"
#include "vsnt/transform.hpp"

namespace vsnt {

std::vector<SampleRef> enumerate_samples(const std::vector<VideoMeta>& videos, const ModelConfig& cfg) {
    std::vector<SampleRef> out;
    for (std::size_t v = 0; v < videos.size(); ++v) {
        const auto& meta = videos[v];
        meta.validate();
        if (cfg.mode == SampleMode::single_sequence) {
            auto s = sample_whole_video(meta.n_frames, cfg.seq_len);
            out.push_back({v, 0, s.step, s.padded, std::move(s.indices)});
        } else {
            const std::size_t step = compute_step(meta.fps, cfg.window_seconds, cfg.seq_len);
            for (auto& w : sliding_windows(meta.n_frames, cfg.seq_len, step, cfg.effective_sliding_stride()))
                out.push_back({v, w.start, step, w.padded, std::move(w.indices)});
        }
    }
    return out;
}

BatchGenerator::BatchGenerator(std::vector<VideoMeta> videos, std::vector<std::size_t> labels,
                               const ModelConfig& cfg, GeneratorOptions opts)
    : videos_(std::move(videos)), labels_(std::move(labels)), cfg_(cfg), opts_(opts), queue_(opts.buffer) {
    if (videos_.empty()) throw ValidationError("batch generator: no videos");
    if (labels_.size() != videos_.size()) throw ValidationError("batch generator: one label per video required");
    if (opts_.batch < 1) throw ConfigError("batch generator: batch size must be >= 1");
    order_ = enumerate_samples(videos_, cfg_);
    if (opts_.shuffle) {
        std::mt19937_64 rng(opts_.seed);
        std::shuffle(order_.begin(), order_.end(), rng);
    }
    producer_ = std::thread([this] { produce(); });
}

BatchGenerator::~BatchGenerator() {
    queue_.close();
    if (producer_.joinable()) producer_.join();
}

void BatchGenerator::produce() {
    try {
        const std::size_t side = cfg_.frame_size;
        std::mt19937_64 aug_rng(opts_.seed ^ 0x9e3779b97f4a7c15ULL);
        std::set<std::size_t> bad;
        Batch cur;
        std::vector<float> data;
        auto flush = [&]() -> bool {
            const std::size_t b = cur.labels.size();
            if (b == 0) return true;
            cur.frames = Tensor<float>({b, cfg_.seq_len, 3, side, side}, std::move(data));
            data = {};
            bool ok = queue_.push(std::move(cur));
            cur = Batch{};
            return ok;
        };
        for (const auto& s : order_) {
            // Drawn for every sample so the stream of specs does not depend on load failures.
            const AugmentSpec spec = opts_.augment ? random_augment(aug_rng) : AugmentSpec{};
            if (bad.count(s.video)) continue;
            const auto& meta = videos_[s.video];
            FrameSequence seq;
            try {
                seq.frames = load_frames(meta, s.indices, side);
            } catch (const Error& e) {
                bad.insert(s.video);
                std::lock_guard lock(mu_);
                skipped_.push_back({meta.id, e.what()});
                continue;
            }
            if (opts_.augment) seq = augment(seq, spec);
            auto px = seq.frames.data();
            data.insert(data.end(), px.begin(), px.end());
            cur.labels.push_back(labels_[s.video]);
            cur.ids.push_back(meta.id);
            cur.starts.push_back(s.start);
            if (cur.labels.size() == opts_.batch && !flush()) return;
        }
        flush();
    } catch (...) {
        std::lock_guard lock(mu_);
        failure_ = std::current_exception();
    }
    queue_.close();
}

std::optional<Batch> BatchGenerator::next() {
    auto b = queue_.pop();
    if (!b) {
        std::lock_guard lock(mu_);
        if (failure_) std::rethrow_exception(failure_);
    }
    return b;
}

std::size_t BatchGenerator::skipped_count() const {
    std::lock_guard lock(mu_);
    return skipped_.size();
}

std::vector<SkippedVideo> BatchGenerator::skipped() const {
    std::lock_guard lock(mu_);
    return skipped_;
}

}  // namespace vsnt
