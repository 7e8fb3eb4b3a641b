#include "vsnt/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vsnt/errors.hpp"

namespace vsnt {

std::size_t compute_step(double fps, double window_seconds, std::size_t seq_len) {
    if (!(fps > 0.0) || !std::isfinite(fps)) throw ValidationError("compute_step: fps must be > 0");
    if (!(window_seconds > 0.0) || !std::isfinite(window_seconds))
        throw ValidationError("compute_step: window_seconds must be > 0");
    if (seq_len < 1) throw ValidationError("compute_step: seq_len must be >= 1");
    const double raw = std::floor(fps * window_seconds / static_cast<double>(seq_len) + 0.5);
    return raw < 1.0 ? 1 : static_cast<std::size_t>(raw);
}

SampleIndices sample_whole_video(std::size_t n_frames, std::size_t seq_len) {
    if (n_frames == 0) throw ValidationError("sample_whole_video: video has no frames");
    if (seq_len < 1) throw ValidationError("sample_whole_video: seq_len must be >= 1");
    SampleIndices s;
    s.indices.resize(seq_len);
    if (n_frames >= seq_len) {
        s.step = n_frames / seq_len;
        for (std::size_t i = 0; i < seq_len; ++i) s.indices[i] = i * s.step;
    } else {
        s.padded = true;
        for (std::size_t i = 0; i < seq_len; ++i) s.indices[i] = i < n_frames ? i : n_frames - 1;
    }
    return s;
}

std::vector<Window> sliding_windows(std::size_t n_frames, std::size_t seq_len, std::size_t step,
                                    std::size_t stride) {
    if (n_frames == 0) throw ValidationError("sliding_windows: video has no frames");
    if (seq_len < 1 || step < 1 || stride < 1)
        throw ValidationError("sliding_windows: seq_len, step and stride must be >= 1");
    std::vector<Window> out;
    const std::size_t extent = window_extent(seq_len, step);
    if (n_frames < extent) {
        Window w;
        w.padded = true;
        for (std::size_t i = 0; i < seq_len; ++i) w.indices.push_back(std::min(i * step, n_frames - 1));
        out.push_back(std::move(w));
        return out;
    }
    for (std::size_t s = 0; s + extent <= n_frames; s += stride * step) {
        Window w;
        w.start = s;
        for (std::size_t i = 0; i < seq_len; ++i) w.indices.push_back(s + i * step);
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace vsnt
