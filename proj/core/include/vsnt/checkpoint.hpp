#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>

#include "vsnt/model.hpp"

namespace vsnt {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: "VSNT", u32 version, u32 length + JSON {config, seed, epoch},
// u32 parameter count, then per parameter u32 name length, name, u32 rank,
// u32 extents, little-endian f32 values. All integers little-endian.
void save_checkpoint(Model& model, const std::filesystem::path& path, std::uint64_t seed, std::size_t epoch);

struct LoadedCheckpoint {
    std::unique_ptr<Model> model;
    std::uint64_t seed = 0;
    std::size_t epoch = 0;
};

// Throws IoError for unreadable files and FormatError for bad magic, an
// unsupported version, truncation, or parameters that do not match the
// stored config.
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace vsnt
