#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vsnt/tensor.hpp"

namespace vsnt {

struct VideoMeta {
    std::string id;
    double fps = 30.0;
    std::size_t n_frames = 0;
    std::string label;
    std::string source_path;  // directory holding frame_NNNNNN.ppm and meta.json

    void validate() const;
    bool operator==(const VideoMeta&) const = default;
};

// One RGB frame, planar 3 x H x W, values in [0,1].
struct Frame {
    static constexpr std::size_t channels = 3;
    std::size_t height = 0;
    std::size_t width = 0;
    std::vector<float> pixels;

    Frame() = default;
    Frame(std::size_t h, std::size_t w, float fill = 0.0f) : height(h), width(w), pixels(channels * h * w, fill) {}

    float& at(std::size_t c, std::size_t y, std::size_t x) { return pixels[(c * height + y) * width + x]; }
    float at(std::size_t c, std::size_t y, std::size_t x) const { return pixels[(c * height + y) * width + x]; }
    bool operator==(const Frame&) const = default;
};

struct FrameSequence {
    Tensor<float> frames;  // [L x 3 x S x S]
    std::string origin;
    std::size_t start_index = 0;
    std::size_t step = 1;
    bool padded = false;  // the source was shorter than the window
};

// Binary PPM (P6). Samples are scaled by 1/maxval on read and written with maxval 255.
Frame read_ppm(std::istream& in);
Frame read_ppm(const std::filesystem::path& path);
// Next frame of a concatenated P6 stream, or nullopt at a clean end of stream.
std::optional<Frame> read_ppm_frame(std::istream& in);
void write_ppm(std::ostream& out, const Frame& frame);
void write_ppm(const std::filesystem::path& path, const Frame& frame);

std::string frame_filename(std::size_t index);
std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t index);
// Number of consecutive frame files starting at index 0.
std::size_t count_frames(const std::filesystem::path& dir);

VideoMeta read_video_meta(const std::filesystem::path& dir);
void write_video_meta(const std::filesystem::path& dir, const VideoMeta& meta);

Frame load_frame(const VideoMeta& meta, std::size_t index);

// Loads the given source frames, resizes each to side x side and stacks them
// into [L x 3 x side x side]. Repeated indices are read once.
Tensor<float> load_frames(const VideoMeta& meta, std::span<const std::size_t> indices, std::size_t side);

}  // namespace vsnt
