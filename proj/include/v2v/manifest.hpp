#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "v2v/video.hpp"

namespace v2v {

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;
    friend bool operator==(const Rgb&, const Rgb&) = default;
};

enum class Split { Train, Test };

const char* to_string(Split s);
Split parse_split(const std::string& s);

struct ClipEntry {
    std::string id;
    std::string path;  // relative to the manifest directory
    Shape shape;
    Split split = Split::Train;
    /// Ground-truth translation of this clip into the other domain, when known.
    std::optional<std::string> gt_path;
    std::optional<int> label;
    std::optional<Rgb> color;
};

inline constexpr int kManifestFormatVersion = 1;

/// Index of the clips of one domain. All clips share `shape`.
struct DatasetManifest {
    int format_version = kManifestFormatVersion;
    std::string domain_name;
    std::string kind;  // volumetric, moving_color, frames, ...
    std::uint64_t rng_seed = 0;
    Shape shape;
    std::vector<ClipEntry> clips;
    std::vector<Rgb> palette;
    /// Directory the relative clip paths resolve against; not serialised.
    std::filesystem::path root;

    std::vector<const ClipEntry*> split(Split s) const;
    std::filesystem::path resolve(const std::string& rel) const { return root / rel; }
    VideoTensor load(const ClipEntry& e) const;
    VideoTensor load_gt(const ClipEntry& e) const;
};

/// Throws ContaminationError if an id appears under both splits, and
/// DataError on duplicate ids within one split.
void check_splits_disjoint(const DatasetManifest& m);

/// Checks format version, shape contract and split disjointness; with
/// `verify_files`, also that every clip exists and its header matches.
void validate_manifest(const DatasetManifest& m, bool verify_files);

void save_manifest(const DatasetManifest& m, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path, bool verify_files = true);

std::string manifest_to_json_string(const DatasetManifest& m);

}  // namespace v2v
