#pragma once

#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "vsnt/bounded_queue.hpp"
#include "vsnt/config.hpp"
#include "vsnt/video.hpp"

namespace vsnt {

// One sequence to be drawn from one video.
struct SampleRef {
    std::size_t video = 0;  // index into the generator's video list
    std::size_t start = 0;
    std::size_t step = 1;
    bool padded = false;
    std::vector<std::size_t> indices;
};

// Sample list in video order: one whole-video sequence per video in
// single_sequence mode, every sliding window otherwise.
std::vector<SampleRef> enumerate_samples(const std::vector<VideoMeta>& videos, const ModelConfig& cfg);

struct Batch {
    Tensor<float> frames;  // [B x L x 3 x S x S]
    std::vector<std::size_t> labels;
    std::vector<std::string> ids;
    std::vector<std::size_t> starts;
};

struct SkippedVideo {
    std::string id;
    std::string reason;
};

struct GeneratorOptions {
    std::size_t batch = 16;
    std::size_t buffer = 2;  // batches in flight
    std::uint64_t seed = 0;
    bool shuffle = true;
    bool augment = false;
};

// Producer thread that loads, augments and batches samples into a bounded
// buffer. Consumption order is the seeded shuffle order. A video that fails
// to load is skipped, recorded once, and the remaining samples continue.
class BatchGenerator {
public:
    BatchGenerator(std::vector<VideoMeta> videos, std::vector<std::size_t> labels, const ModelConfig& cfg,
                   GeneratorOptions opts);
    ~BatchGenerator();
    BatchGenerator(const BatchGenerator&) = delete;
    BatchGenerator& operator=(const BatchGenerator&) = delete;

    // Next batch, or nullopt once the epoch is exhausted. Rethrows producer failures.
    std::optional<Batch> next();

    std::size_t sample_count() const { return order_.size(); }
    std::size_t high_water() const { return queue_.high_water(); }
    std::size_t skipped_count() const;
    std::vector<SkippedVideo> skipped() const;

private:
    void produce();

    std::vector<VideoMeta> videos_;
    std::vector<std::size_t> labels_;
    ModelConfig cfg_;
    GeneratorOptions opts_;
    std::vector<SampleRef> order_;
    BoundedQueue<Batch> queue_;
    mutable std::mutex mu_;
    std::vector<SkippedVideo> skipped_;
    std::exception_ptr failure_;
    std::thread producer_;
};

}  // namespace vsnt
