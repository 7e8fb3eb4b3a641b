#include "vsnt/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "vsnt/errors.hpp"

namespace vsnt {
namespace {

using nlohmann::json;

constexpr char kMagic[4] = {'V', 'S', 'N', 'T'};

template <typename U>
U to_le(U v) {
    if constexpr (std::endian::native == std::endian::big) {
        U out = 0;
        for (std::size_t i = 0; i < sizeof(U); ++i) out = (out << 8) | ((v >> (8 * i)) & 0xff);
        return out;
    }
    return v;
}

class Writer {
public:
    void u32(std::uint32_t v) {
        v = to_le(v);
        bytes(&v, 4);
    }
    void f32(float f) { u32(std::bit_cast<std::uint32_t>(f)); }
    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        bytes(s.data(), s.size());
    }
    void bytes(const void* p, std::size_t n) {
        const char* c = static_cast<const char*>(p);
        buf.insert(buf.end(), c, c + n);
    }
    std::vector<char> buf;
};

class Reader {
public:
    explicit Reader(std::vector<char> data) : data_(std::move(data)) {}
    void need(std::size_t n, const char* what) {
        if (pos_ + n > data_.size())
            throw FormatError("truncated checkpoint: file ends inside " + std::string(what) + " at byte " +
                              std::to_string(pos_));
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v;
        std::memcpy(&v, data_.data() + pos_, 4);
        pos_ += 4;
        return to_le(v);
    }
    std::string str(const char* what) {
        const std::uint32_t n = u32(what);
        need(n, what);
        std::string s(data_.data() + pos_, n);
        pos_ += n;
        return s;
    }
    const char* raw(std::size_t n, const char* what) {
        need(n, what);
        const char* p = data_.data() + pos_;
        pos_ += n;
        return p;
    }
    bool done() const { return pos_ == data_.size(); }

private:
    std::vector<char> data_;
    std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(Model& model, const std::filesystem::path& path, std::uint64_t seed, std::size_t epoch) {
    Writer w;
    w.bytes(kMagic, 4);
    w.u32(kCheckpointVersion);
    json header = {{"config", json::parse(config_to_json(model.config()))}, {"seed", seed}, {"epoch", epoch}};
    w.str(header.dump());
    const auto params = model.parameters();
    w.u32(static_cast<std::uint32_t>(params.size()));
    for (const auto* p : params) {
        w.str(p->name());
        const auto& shape = p->value().shape();
        w.u32(static_cast<std::uint32_t>(shape.size()));
        for (std::size_t e : shape) w.u32(static_cast<std::uint32_t>(e));
        for (float v : p->value().data()) w.f32(v);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out.write(w.buf.data(), static_cast<std::streamsize>(w.buf.size()));
    if (!out) throw IoError("write failed for checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open checkpoint " + path.string());
    Reader r(std::vector<char>(std::istreambuf_iterator<char>(in), {}));

    const char* magic = r.raw(4, "magic");
    if (std::memcmp(magic, kMagic, 4) != 0) throw FormatError("bad magic in " + path.string());
    const std::uint32_t version = r.u32("version");
    if (version != kCheckpointVersion)
        throw FormatError("unsupported checkpoint version " + std::to_string(version) + " (expected " +
                          std::to_string(kCheckpointVersion) + ")");

    LoadedCheckpoint out;
    ModelConfig cfg;
    try {
        json header = json::parse(r.str("header"));
        cfg = config_from_json(header.at("config").dump());
        out.seed = header.at("seed").get<std::uint64_t>();
        out.epoch = header.at("epoch").get<std::size_t>();
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint header: ") + e.what());
    }
    out.model = std::make_unique<Model>(cfg, out.seed);

    const std::uint32_t count = r.u32("parameter count");
    const auto params = out.model->parameters();
    if (count != params.size())
        throw FormatError("checkpoint holds " + std::to_string(count) + " parameters but the config builds " +
                          std::to_string(params.size()));
    for (std::uint32_t i = 0; i < count; ++i) {
        const std::string name = r.str("parameter name");
        Parameter<float>* p = out.model->find_parameter(name);
        if (!p) throw FormatError("checkpoint parameter '" + name + "' is not part of the model");
        const std::uint32_t rank = r.u32("parameter rank");
        Shape shape(rank);
        for (auto& e : shape) e = r.u32("parameter extents");
        if (shape != p->value().shape())
            throw FormatError("shape mismatch for parameter '" + name + "': file " + shape_str(shape) + " vs model " +
                              shape_str(p->value().shape()));
        auto dst = p->value().data_mut();
        const char* src = r.raw(dst.size() * 4, "parameter values");
        for (std::size_t k = 0; k < dst.size(); ++k) {
            std::uint32_t bits;
            std::memcpy(&bits, src + 4 * k, 4);
            dst[k] = std::bit_cast<float>(to_le(bits));
        }
    }
    if (!r.done()) throw FormatError("trailing bytes after the last parameter in " + path.string());
    return out;
}

}  // namespace vsnt
