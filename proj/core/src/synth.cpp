#include "vsnt/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>

#include "vsnt/errors.hpp"
#include "vsnt/seed.hpp"

namespace vsnt {
namespace {

namespace fs = std::filesystem;

constexpr float kBackground = 0.15f;
// Scene brightness on frames where agitated sprites touch.
constexpr float kFlashBackground = 0.55f;
constexpr std::array<std::array<float, 3>, 6> kPalette{{{0.90f, 0.30f, 0.20f},
                                                         {0.20f, 0.80f, 0.30f},
                                                         {0.30f, 0.40f, 0.95f},
                                                         {0.90f, 0.85f, 0.20f},
                                                         {0.80f, 0.30f, 0.85f},
                                                         {0.25f, 0.85f, 0.85f}}};

double wrap(double v, double side) {
    v = std::fmod(v, side);
    return v < 0 ? v + side : v;
}

// Shortest distance on a ring of circumference `side`.
double ring_dist(double a, double b, double side) {
    const double d = std::fabs(a - b);
    return std::min(d, side - d);
}

void draw_square(Frame& f, double x, double y, std::size_t size, const std::array<float, 3>& rgb) {
    const std::size_t side = f.width;
    const auto x0 = static_cast<std::size_t>(wrap(std::round(x), static_cast<double>(side)));
    const auto y0 = static_cast<std::size_t>(wrap(std::round(y), static_cast<double>(side)));
    for (std::size_t dy = 0; dy < size; ++dy)
        for (std::size_t dx = 0; dx < size; ++dx)
            for (std::size_t c = 0; c < 3; ++c) f.at(c, (y0 + dy) % side, (x0 + dx) % side) = rgb[c];
}

}  // namespace

std::string to_string(SynthClass c) { return c == SynthClass::calm ? "calm" : "agitated"; }

std::size_t SynthSpec::sprite_size() const { return std::max<std::size_t>(2, side / 8); }

void SynthSpec::validate() const {
    if (n_frames < 1) throw ValidationError("synth: n_frames must be >= 1");
    if (!(fps > 0.0)) throw ValidationError("synth: fps must be > 0");
    if (side < 8) throw ValidationError("synth: side must be >= 8");
    if (sprite_count < 1) throw ValidationError("synth: sprite_count must be >= 1");
    const std::size_t s = sprite_size();
    if (sprite_count * s * s * 4 > side * side)
        throw ValidationError("synth: side " + std::to_string(side) + " is too small for " +
                              std::to_string(sprite_count) + " sprites");
}

SyntheticVideo render_synthetic_video(const SynthSpec& spec) {
    spec.validate();
    const double side = static_cast<double>(spec.side);
    const std::size_t size = spec.sprite_size();
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> pos(0.0, side), angle(0.0, 2.0 * M_PI);

    const std::size_t n = spec.sprite_count;
    std::vector<SpritePos> p(n), v(n);
    const double calm_speed = side / 40.0;
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = {pos(rng), pos(rng)};
        const double a = angle(rng);
        v[i] = {calm_speed * std::cos(a), calm_speed * std::sin(a)};
    }
    std::normal_distribution<double> kick(0.0, side / 16.0);

    SyntheticVideo out;
    for (std::size_t t = 0; t < spec.n_frames; ++t) {
        if (t > 0)
            for (std::size_t i = 0; i < n; ++i) {
                if (spec.kind == SynthClass::agitated) {
                    v[i].x = 0.6 * v[i].x + kick(rng);
                    v[i].y = 0.6 * v[i].y + kick(rng);
                }
                p[i] = {wrap(p[i].x + v[i].x, side), wrap(p[i].y + v[i].y, side)};
            }
        std::vector<bool> flash(n, false);
        if (spec.kind == SynthClass::agitated)
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j) {
                    const double reach = 1.5 * static_cast<double>(size);
                    if (ring_dist(p[i].x, p[j].x, side) < reach && ring_dist(p[i].y, p[j].y, side) < reach)
                        flash[i] = flash[j] = true;
                }
        const bool any_flash = std::find(flash.begin(), flash.end(), true) != flash.end();
        Frame f(spec.side, spec.side, any_flash ? kFlashBackground : kBackground);
        for (std::size_t i = 0; i < n; ++i) {
            const auto& rgb = flash[i] ? std::array<float, 3>{1, 1, 1} : kPalette[i % kPalette.size()];
            draw_square(f, p[i].x, p[i].y, size, rgb);
        }
        out.frames.push_back(std::move(f));
        out.positions.push_back(p);
    }
    return out;
}

VideoMeta generate_synthetic_video(const SynthSpec& spec, const fs::path& dir, const std::string& id) {
    auto video = render_synthetic_video(spec);
    fs::create_directories(dir);
    for (std::size_t t = 0; t < video.frames.size(); ++t) write_ppm(frame_path(dir, t), video.frames[t]);
    VideoMeta meta{id, spec.fps, spec.n_frames, to_string(spec.kind), dir.string()};
    write_video_meta(dir, meta);
    return meta;
}

std::uint64_t synth_video_seed(std::uint64_t seed, std::size_t index) { return derive_seed(seed, index); }

DatasetManifest generate_synthetic_dataset(const fs::path& root, const SynthDatasetSpec& spec) {
    fs::create_directories(root / "videos");
    DatasetManifest m;
    m.classes = {to_string(SynthClass::calm), to_string(SynthClass::agitated)};
    std::size_t index = 0;
    for (SynthClass kind : {SynthClass::calm, SynthClass::agitated}) {
        const std::size_t count = kind == SynthClass::calm ? spec.n_calm : spec.n_agitated;
        for (std::size_t k = 0; k < count; ++k, ++index) {
            char id[64];
            std::snprintf(id, sizeof id, "%s_%04zu", to_string(kind).c_str(), k);
            SynthSpec s{kind, spec.n_frames, spec.fps, spec.side, synth_video_seed(spec.seed, index),
                        spec.sprite_count};
            auto meta = generate_synthetic_video(s, root / "videos" / id, id);
            meta.source_path = (root / "videos" / id).string();
            m.records.push_back(std::move(meta));
        }
    }
    fs::remove(root / "split.json");
    write_manifest(root / "manifest.jsonl", m);
    return read_manifest(root / "manifest.jsonl");
}

}  // namespace vsnt
