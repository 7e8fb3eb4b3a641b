#pragma once

#include <cstddef>
#include <vector>

namespace vsnt {

// max(1, round_half_up(fps * window_seconds / seq_len)).
std::size_t compute_step(double fps, double window_seconds, std::size_t seq_len);

struct SampleIndices {
    std::vector<std::size_t> indices;
    std::size_t step = 1;
    bool padded = false;
};

// One sequence covering the whole video at step floor(n/L). Shorter videos
// take every frame and repeat the last one up to seq_len.
SampleIndices sample_whole_video(std::size_t n_frames, std::size_t seq_len);

struct Window {
    std::size_t start = 0;
    std::vector<std::size_t> indices;
    bool padded = false;
};

// Frames occupied by one sliding window: seq_len * step.
inline std::size_t window_extent(std::size_t seq_len, std::size_t step) { return seq_len * step; }

// Windows sampling start + i*step, i < seq_len. Starts advance by
// stride*step frames while start + seq_len*step <= n_frames. A video shorter
// than one window yields a single window with indices clamped to the last
// frame.
std::vector<Window> sliding_windows(std::size_t n_frames, std::size_t seq_len, std::size_t step, std::size_t stride);

}  // namespace vsnt
