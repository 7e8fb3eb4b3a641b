#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "vsnt/dataset.hpp"
#include "vsnt/video.hpp"

namespace vsnt {

enum class SynthClass { calm, agitated };

std::string to_string(SynthClass c);

// Sprites on a flat background. Calm sprites drift at a constant slow
// velocity; agitated sprites take high-variance random accelerations and
// flash white on contact. Both classes share sprite sizes and colors.
// Motion wraps around the frame edges.
struct SynthSpec {
    SynthClass kind = SynthClass::calm;
    std::size_t n_frames = 64;
    double fps = 30.0;
    std::size_t side = 32;
    std::uint64_t seed = 0;
    std::size_t sprite_count = 3;

    std::size_t sprite_size() const;
    void validate() const;
};

struct SpritePos {
    double x = 0, y = 0;
};

struct SyntheticVideo {
    std::vector<Frame> frames;
    std::vector<std::vector<SpritePos>> positions;  // [frame][sprite], top-left corner
};

SyntheticVideo render_synthetic_video(const SynthSpec& spec);

// Writes frame_NNNNNN.ppm files and meta.json into dir (created if needed).
VideoMeta generate_synthetic_video(const SynthSpec& spec, const std::filesystem::path& dir, const std::string& id);

struct SynthDatasetSpec {
    std::size_t n_calm = 34;
    std::size_t n_agitated = 33;
    std::size_t n_frames = 64;
    double fps = 30.0;
    std::size_t side = 32;
    std::size_t sprite_count = 3;
    std::uint64_t seed = 0;
};

// Writes root/videos/<id>/ for every video and root/manifest.jsonl with
// classes [calm, agitated]. Returns the manifest as read back from disk.
DatasetManifest generate_synthetic_dataset(const std::filesystem::path& root, const SynthDatasetSpec& spec);

// Seed of the i-th video of a dataset seeded with `seed`.
std::uint64_t synth_video_seed(std::uint64_t seed, std::size_t index);

}  // namespace vsnt
