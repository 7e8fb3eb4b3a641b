#include "vsnt/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "vsnt/errors.hpp"

namespace vsnt {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path split_path(const fs::path& manifest) { return manifest.parent_path() / "split.json"; }

std::string record_context(const fs::path& file, std::size_t line) {
    return file.string() + ":" + std::to_string(line);
}

}  // namespace

std::string to_string(Partition p) { return p == Partition::train ? "train" : "test"; }

Partition parse_partition(std::string_view s) {
    if (s == "train") return Partition::train;
    if (s == "test") return Partition::test;
    throw ValidationError("unknown partition '" + std::string(s) + "'");
}

std::size_t DatasetManifest::class_index(const std::string& label) const {
    auto it = std::find(classes.begin(), classes.end(), label);
    if (it == classes.end()) throw ValidationError("unknown label '" + label + "'");
    return static_cast<std::size_t>(it - classes.begin());
}

std::vector<VideoMeta> DatasetManifest::partition(Partition p) const {
    std::vector<VideoMeta> out;
    for (const auto& r : records) {
        auto it = split.find(r.id);
        if (it != split.end() && it->second == p) out.push_back(r);
    }
    return out;
}

std::vector<std::size_t> DatasetManifest::labels_of(const std::vector<VideoMeta>& videos) const {
    std::vector<std::size_t> out;
    out.reserve(videos.size());
    for (const auto& v : videos) out.push_back(class_index(v.label));
    return out;
}

void DatasetManifest::validate() const {
    if (records.empty()) throw ValidationError("empty manifest");
    std::set<std::string> ids;
    for (const auto& r : records) {
        r.validate();
        if (!ids.insert(r.id).second) throw ValidationError("duplicate id '" + r.id + "'");
        if (std::find(classes.begin(), classes.end(), r.label) == classes.end())
            throw ValidationError("record '" + r.id + "': unknown label '" + r.label + "'");
    }
    if (!split.empty()) {
        for (const auto& r : records)
            if (!split.count(r.id)) throw ValidationError("record '" + r.id + "' is missing from the split");
        for (const auto& [id, p] : split)
            if (!ids.count(id)) throw ValidationError("split names unknown id '" + id + "'");
    }
}

void write_manifest(const fs::path& file, const DatasetManifest& m) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write manifest " + file.string());
    if (!m.classes.empty()) out << json{{"classes", m.classes}}.dump() << '\n';
    // Paths are stored relative to the manifest so a dataset directory can move.
    const auto base = fs::absolute(file).parent_path();
    auto stored_path = [&](const std::string& p) {
        const auto rel = fs::absolute(p).lexically_normal().lexically_relative(base);
        return rel.empty() || *rel.begin() == ".." ? fs::absolute(p).lexically_normal().string() : rel.string();
    };
    for (const auto& r : m.records)
        out << json{{"id", r.id}, {"path", stored_path(r.source_path)}, {"label", r.label}, {"fps", r.fps},
                    {"n_frames", r.n_frames}}
                   .dump()
            << '\n';
    if (!out) throw IoError("write failed for " + file.string());
    if (!m.split.empty()) {
        json s = json::object();
        for (const auto& [id, p] : m.split) s[id] = to_string(p);
        std::ofstream so(split_path(file));
        if (!so) throw IoError("cannot write " + split_path(file).string());
        so << s.dump(2) << '\n';
    }
}

DatasetManifest read_manifest(const fs::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open manifest " + file.string());
    DatasetManifest m;
    bool fixed_classes = false;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw FormatError(record_context(file, lineno) + ": " + e.what());
        }
        if (j.contains("classes") && !j.contains("id")) {
            m.classes = j.at("classes").get<std::vector<std::string>>();
            fixed_classes = true;
            continue;
        }
        VideoMeta r;
        try {
            r.id = j.at("id").get<std::string>();
            r.source_path = j.at("path").get<std::string>();
            r.label = j.at("label").get<std::string>();
            r.fps = j.at("fps").get<double>();
            r.n_frames = j.at("n_frames").get<std::size_t>();
        } catch (const json::exception& e) {
            throw FormatError(record_context(file, lineno) + ": " + e.what());
        }
        if (fs::path(r.source_path).is_relative())
            r.source_path = (file.parent_path() / r.source_path).lexically_normal().string();
        if (!fixed_classes && std::find(m.classes.begin(), m.classes.end(), r.label) == m.classes.end())
            m.classes.push_back(r.label);
        m.records.push_back(std::move(r));
    }
    if (fs::exists(split_path(file))) {
        std::ifstream si(split_path(file));
        try {
            json s = json::parse(si);
            for (auto it = s.begin(); it != s.end(); ++it)
                m.split[it.key()] = parse_partition(it.value().get<std::string>());
        } catch (const json::exception& e) {
            throw FormatError(split_path(file).string() + ": " + e.what());
        }
    }
    return m;
}

DatasetManifest ingest_manifest(const fs::path& file) {
    DatasetManifest m = read_manifest(file);
    m.validate();
    for (const auto& r : m.records) {
        try {
            read_ppm(frame_path(r.source_path, 0));
        } catch (const Error& e) {
            throw ValidationError("record '" + r.id + "': first frame unreadable: " + e.what());
        }
        const std::size_t found = count_frames(r.source_path);
        if (found != r.n_frames)
            throw ValidationError("record '" + r.id + "': missing frames, expected " + std::to_string(r.n_frames) +
                                  " found " + std::to_string(found));
    }
    return m;
}

DatasetManifest split_dataset(DatasetManifest m, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw ConfigError("split ratio must lie in (0,1)");
    m.split.clear();
    m.validate();
    std::mt19937_64 rng(seed);
    for (const auto& cls : m.classes) {
        std::vector<std::string> ids;
        for (const auto& r : m.records)
            if (r.label == cls) ids.push_back(r.id);
        if (ids.size() < 2)
            throw ValidationError("class '" + cls + "' has " + std::to_string(ids.size()) +
                                  " record(s); at least 2 are needed to split");
        std::shuffle(ids.begin(), ids.end(), rng);
        const double want = std::floor(ratio * static_cast<double>(ids.size()) + 0.5);
        const std::size_t n_train = std::clamp<std::size_t>(static_cast<std::size_t>(want), 1, ids.size() - 1);
        for (std::size_t i = 0; i < ids.size(); ++i) m.split[ids[i]] = i < n_train ? Partition::train : Partition::test;
    }
    return m;
}

}  // namespace vsnt
