#include "vsnt/video.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "vsnt/errors.hpp"
#include "vsnt/transform.hpp"

namespace vsnt {
namespace {

void skip_space_and_comments(std::istream& in) {
    for (;;) {
        int c = in.peek();
        if (c == '#') {
            std::string discard;
            std::getline(in, discard);
        } else if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            in.get();
        } else {
            return;
        }
    }
}

std::size_t read_header_number(std::istream& in, const char* what) {
    skip_space_and_comments(in);
    long long v = -1;
    if (!(in >> v) || v <= 0) throw FormatError(std::string("PPM header: bad ") + what);
    return static_cast<std::size_t>(v);
}

Frame read_ppm_body(std::istream& in) {
    const std::size_t w = read_header_number(in, "width");
    const std::size_t h = read_header_number(in, "height");
    const std::size_t maxval = read_header_number(in, "maxval");
    if (maxval > 255) throw FormatError("PPM maxval " + std::to_string(maxval) + " unsupported (16-bit samples)");
    const int sep = in.get();
    if (sep != ' ' && sep != '\n' && sep != '\t' && sep != '\r') throw FormatError("PPM header: missing separator");

    std::vector<unsigned char> raw(3 * w * h);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size())
        throw FormatError("PPM truncated: expected " + std::to_string(raw.size()) + " bytes of pixel data");

    Frame f(h, w);
    const float scale = 1.0f / static_cast<float>(maxval);
    const std::size_t plane = h * w;
    for (std::size_t i = 0; i < plane; ++i)
        for (std::size_t c = 0; c < 3; ++c)
            f.pixels[c * plane + i] = std::min(1.0f, static_cast<float>(raw[3 * i + c]) * scale);
    return f;
}

using nlohmann::json;

}  // namespace

void VideoMeta::validate() const {
    if (id.empty()) throw ValidationError("video record has an empty id");
    if (!(fps > 0.0) || !std::isfinite(fps)) throw ValidationError("video '" + id + "': fps must be > 0");
    if (n_frames < 1) throw ValidationError("video '" + id + "': n_frames must be >= 1");
}

Frame read_ppm(std::istream& in) {
    auto f = read_ppm_frame(in);
    if (!f) throw FormatError("PPM stream is empty");
    return std::move(*f);
}

Frame read_ppm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open frame " + path.string());
    try {
        return read_ppm(in);
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

std::optional<Frame> read_ppm_frame(std::istream& in) {
    skip_space_and_comments(in);
    if (in.peek() == std::char_traits<char>::eof()) return std::nullopt;
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (in.gcount() != 2 || magic[0] != 'P' || magic[1] != '6') throw FormatError("not a binary PPM (P6) frame");
    return read_ppm_body(in);
}

void write_ppm(std::ostream& out, const Frame& frame) {
    out << "P6\n" << frame.width << ' ' << frame.height << "\n255\n";
    const std::size_t plane = frame.height * frame.width;
    std::vector<unsigned char> raw(3 * plane);
    for (std::size_t i = 0; i < plane; ++i)
        for (std::size_t c = 0; c < 3; ++c) {
            const float v = std::clamp(frame.pixels[c * plane + i], 0.0f, 1.0f);
            raw[3 * i + c] = static_cast<unsigned char>(std::lround(v * 255.0f));
        }
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

void write_ppm(const std::filesystem::path& path, const Frame& frame) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write frame " + path.string());
    write_ppm(out, frame);
    if (!out) throw IoError("write failed for " + path.string());
}

std::string frame_filename(std::size_t index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%06zu.ppm", index);
    return buf;
}

std::filesystem::path frame_path(const std::filesystem::path& dir, std::size_t index) {
    return dir / frame_filename(index);
}

std::size_t count_frames(const std::filesystem::path& dir) {
    std::size_t n = 0;
    while (std::filesystem::exists(frame_path(dir, n))) ++n;
    return n;
}

VideoMeta read_video_meta(const std::filesystem::path& dir) {
    const auto path = dir / "meta.json";
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    VideoMeta m;
    try {
        json j = json::parse(in);
        m.id = j.at("id").get<std::string>();
        m.fps = j.at("fps").get<double>();
        m.n_frames = j.at("n_frames").get<std::size_t>();
        m.label = j.value("label", std::string{});
        m.source_path = dir.string();
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    m.validate();
    return m;
}

void write_video_meta(const std::filesystem::path& dir, const VideoMeta& meta) {
    json j = {{"id", meta.id}, {"fps", meta.fps}, {"n_frames", meta.n_frames}, {"label", meta.label},
              {"source_path", meta.source_path}};
    std::ofstream out(dir / "meta.json");
    if (!out) throw IoError("cannot write " + (dir / "meta.json").string());
    out << j.dump(2) << '\n';
}

Frame load_frame(const VideoMeta& meta, std::size_t index) {
    if (index >= meta.n_frames)
        throw ValidationError("video '" + meta.id + "': frame " + std::to_string(index) + " out of range");
    return read_ppm(frame_path(meta.source_path, index));
}

Tensor<float> load_frames(const VideoMeta& meta, std::span<const std::size_t> indices, std::size_t side) {
    if (indices.empty()) throw ValidationError("video '" + meta.id + "': no frames requested");
    const std::size_t per = 3 * side * side;
    std::vector<float> out(indices.size() * per);
    std::map<std::size_t, std::vector<float>> cache;
    for (std::size_t t = 0; t < indices.size(); ++t) {
        auto it = cache.find(indices[t]);
        if (it == cache.end()) {
            Frame f = resize_frame(load_frame(meta, indices[t]), side);
            it = cache.emplace(indices[t], std::move(f.pixels)).first;
        }
        std::copy(it->second.begin(), it->second.end(), out.begin() + static_cast<std::ptrdiff_t>(t * per));
    }
    return Tensor<float>({indices.size(), 3, side, side}, std::move(out));
}

}  // namespace vsnt
