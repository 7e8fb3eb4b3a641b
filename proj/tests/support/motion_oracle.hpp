#pragma once

// Motion-energy statistics computed from raw PPM bytes, independent of the
// library's frame reader and resampler.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

namespace oracle {

// Pixel bytes of a P6 file written without comments.
inline std::vector<unsigned char> ppm_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::string magic;
    std::size_t w = 0, h = 0, maxval = 0;
    in >> magic >> w >> h >> maxval;
    in.get();
    std::vector<unsigned char> px(w * h * 3);
    in.read(reinterpret_cast<char*>(px.data()), static_cast<std::streamsize>(px.size()));
    return px;
}

inline std::filesystem::path nth_frame(const std::filesystem::path& dir, std::size_t i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%06zu.ppm", i);
    return dir / name;
}

// Mean absolute difference between consecutive frames, in [0,1] units.
inline double motion_energy(const std::filesystem::path& dir, std::size_t n_frames) {
    double total = 0.0;
    std::size_t count = 0;
    auto prev = ppm_bytes(nth_frame(dir, 0));
    for (std::size_t t = 1; t < n_frames; ++t) {
        auto cur = ppm_bytes(nth_frame(dir, t));
        for (std::size_t i = 0; i < cur.size(); ++i) total += std::abs(int(cur[i]) - int(prev[i])) / 255.0;
        count += cur.size();
        prev = std::move(cur);
    }
    return count ? total / static_cast<double>(count) : 0.0;
}

// Threshold halfway between the per-class mean energies.
inline double energy_threshold(const std::vector<double>& calm, const std::vector<double>& agitated) {
    double a = 0, b = 0;
    for (double v : calm) a += v;
    for (double v : agitated) b += v;
    return 0.5 * (a / static_cast<double>(calm.size()) + b / static_cast<double>(agitated.size()));
}

}  // namespace oracle
