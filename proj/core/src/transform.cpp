#include "vsnt/transform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vsnt/errors.hpp"

namespace vsnt {
namespace {

struct Tap {
    std::size_t lo, hi;
    float frac;
};

// Source taps for each output coordinate of a region [origin, origin+len).
std::vector<Tap> taps(std::size_t origin, std::size_t len, std::size_t out) {
    std::vector<Tap> t(out);
    const double scale = static_cast<double>(len) / static_cast<double>(out);
    for (std::size_t i = 0; i < out; ++i) {
        double s = (static_cast<double>(i) + 0.5) * scale - 0.5;
        s = std::clamp(s, 0.0, static_cast<double>(len - 1));
        const auto lo = static_cast<std::size_t>(std::floor(s));
        t[i] = {origin + lo, origin + std::min(lo + 1, len - 1), static_cast<float>(s - static_cast<double>(lo))};
    }
    return t;
}

void flip_in_place(float* plane, std::size_t h, std::size_t w) {
    for (std::size_t y = 0; y < h; ++y) std::reverse(plane + y * w, plane + (y + 1) * w);
}

}  // namespace

Frame resize_region(const Frame& frame, std::size_t y0, std::size_t x0, std::size_t rh, std::size_t rw,
                    std::size_t out_h, std::size_t out_w) {
    if (out_h < 1 || out_w < 1) throw ValidationError("resize: output side must be >= 1");
    if (frame.height < 1 || frame.width < 1) throw ValidationError("resize: empty input frame");
    if (rh < 1 || rw < 1 || y0 + rh > frame.height || x0 + rw > frame.width)
        throw ValidationError("resize: region outside the frame");
    if (y0 == 0 && x0 == 0 && rh == frame.height && rw == frame.width && out_h == rh && out_w == rw) return frame;

    const auto ty = taps(y0, rh, out_h);
    const auto tx = taps(x0, rw, out_w);
    Frame out(out_h, out_w);
    for (std::size_t c = 0; c < Frame::channels; ++c)
        for (std::size_t y = 0; y < out_h; ++y) {
            const Tap& a = ty[y];
            for (std::size_t x = 0; x < out_w; ++x) {
                const Tap& b = tx[x];
                const float top = frame.at(c, a.lo, b.lo) * (1 - b.frac) + frame.at(c, a.lo, b.hi) * b.frac;
                const float bot = frame.at(c, a.hi, b.lo) * (1 - b.frac) + frame.at(c, a.hi, b.hi) * b.frac;
                out.at(c, y, x) = std::clamp(top * (1 - a.frac) + bot * a.frac, 0.0f, 1.0f);
            }
        }
    return out;
}

Frame resize_frame(const Frame& frame, std::size_t side) {
    if (side < 1) throw ValidationError("resize_frame: side must be >= 1");
    return resize_region(frame, 0, 0, frame.height, frame.width, side, side);
}

void AugmentSpec::validate() const {
    if (!(crop_fraction > 0.5 && crop_fraction <= 1.0))
        throw ValidationError("augment: crop_fraction must lie in (0.5, 1], got " + std::to_string(crop_fraction));
    if (!(zoom >= 1.0 && zoom <= 1.5))
        throw ValidationError("augment: zoom must lie in [1, 1.5], got " + std::to_string(zoom));
}

AugmentSpec random_augment(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    AugmentSpec s;
    s.flip = unit(rng) < 0.5;
    s.crop_fraction = 1.0 - 0.2 * unit(rng);
    s.zoom = 1.0 + 0.2 * unit(rng);
    s.random_offset = true;
    s.seed = rng();
    return s;
}

FrameSequence augment(const FrameSequence& seq, const AugmentSpec& spec) {
    spec.validate();
    const auto& shape = seq.frames.shape();
    if (shape.size() != 4 || shape[1] != Frame::channels || shape[2] != shape[3])
        throw ShapeError("augment expects [L x 3 x S x S] frames, got " + shape_str(shape));
    const std::size_t n = shape[0], side = shape[2];

    const auto crop = static_cast<std::size_t>(std::lround(spec.crop_fraction * static_cast<double>(side)));
    const auto region = static_cast<std::size_t>(std::lround(static_cast<double>(crop) / spec.zoom));
    if (region < 2)
        throw ValidationError("augment: degenerate crop of " + std::to_string(region) + "px from a " +
                              std::to_string(side) + "px frame");
    std::size_t oy = (side - crop) / 2, ox = (side - crop) / 2;
    if (spec.random_offset && crop < side) {
        std::mt19937_64 rng(spec.seed);
        std::uniform_int_distribution<std::size_t> d(0, side - crop);
        oy = d(rng);
        ox = d(rng);
    }
    oy += (crop - region) / 2;
    ox += (crop - region) / 2;

    FrameSequence out = seq;
    const std::size_t per = Frame::channels * side * side;
    std::vector<float> data(seq.frames.data().begin(), seq.frames.data().end());
    for (std::size_t t = 0; t < n; ++t) {
        float* base = data.data() + t * per;
        if (region != side) {
            Frame f(side, side);
            std::copy(base, base + per, f.pixels.begin());
            Frame r = resize_region(f, oy, ox, region, region, side, side);
            std::copy(r.pixels.begin(), r.pixels.end(), base);
        }
        if (spec.flip)
            for (std::size_t c = 0; c < Frame::channels; ++c) flip_in_place(base + c * side * side, side, side);
    }
    out.frames = Tensor<float>(shape, std::move(data));
    return out;
}

}  // namespace vsnt
