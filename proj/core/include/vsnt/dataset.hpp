#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "vsnt/video.hpp"

namespace vsnt {

enum class Partition { train, test };

std::string to_string(Partition p);
Partition parse_partition(std::string_view s);

struct DatasetManifest {
    std::vector<VideoMeta> records;
    std::vector<std::string> classes;  // class index = position; index 1 is the anomaly class
    std::map<std::string, Partition> split;

    std::size_t class_index(const std::string& label) const;
    // Records of one partition, in manifest order.
    std::vector<VideoMeta> partition(Partition p) const;
    std::vector<std::size_t> labels_of(const std::vector<VideoMeta>& videos) const;
    // Ids unique, labels known, split (if present) covering exactly the ids.
    void validate() const;
    bool operator==(const DatasetManifest&) const = default;
};

// JSON-lines, one {"id","path","label","fps","n_frames"} record per line,
// optionally preceded by a {"classes":[...]} line fixing the class order.
// The split, when present, goes to a sibling split.json.
void write_manifest(const std::filesystem::path& file, const DatasetManifest& m);

// Parses the manifest and its split.json if one exists. Relative record
// paths resolve against the manifest's directory. Without a classes line,
// classes are taken in order of first appearance.
DatasetManifest read_manifest(const std::filesystem::path& file);

// read_manifest plus validation and a spot check of each record's frames
// (first frame readable, frame count matches n_frames).
DatasetManifest ingest_manifest(const std::filesystem::path& file);

// Stratified split: per class, round(ratio * n_c) records (clamped to
// [1, n_c - 1]) drawn at random go to train, the rest to test.
DatasetManifest split_dataset(DatasetManifest m, double ratio, std::uint64_t seed);

}  // namespace vsnt
