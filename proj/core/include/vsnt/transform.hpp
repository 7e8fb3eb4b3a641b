#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

#include "vsnt/video.hpp"

namespace vsnt {

// Bilinear stretch to side x side with half-pixel centers and clamped borders.
Frame resize_frame(const Frame& frame, std::size_t side);

// Bilinear resample of the region [y0, y0+rh) x [x0, x0+rw) to out_h x out_w.
Frame resize_region(const Frame& frame, std::size_t y0, std::size_t x0, std::size_t rh, std::size_t rw,
                    std::size_t out_h, std::size_t out_w);

struct AugmentSpec {
    bool flip = false;
    double crop_fraction = 1.0;  // (0.5, 1]
    double zoom = 1.0;           // [1, 1.5]
    bool random_offset = false;  // crop placed at a seeded offset instead of centered
    std::uint64_t seed = 0;

    void validate() const;
};

// Draws a training-time spec: flip with p=0.5, crop in [0.8,1], zoom in [1,1.2].
AugmentSpec random_augment(std::mt19937_64& rng);

// Crops crop_fraction of the side (centered or at the seeded offset), then
// center-crops 1/zoom of that, resizes back to the original side and finally
// mirrors horizontally if requested. Every frame gets the same transform.
FrameSequence augment(const FrameSequence& seq, const AugmentSpec& spec);

}  // namespace vsnt
