#include "v2v/manifest.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <map>
#include <set>

#include <nlohmann/json.hpp>

#include "v2v/errors.hpp"

namespace v2v {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Split s) {
    return s == Split::Train ? "train" : "test";
}

Split parse_split(const std::string& s) {
    if (s == "train") {
        return Split::Train;
    }
    if (s == "test") {
        return Split::Test;
    }
    throw DataError("unknown split '" + s + "'");
}

std::vector<const ClipEntry*> DatasetManifest::split(Split s) const {
    std::vector<const ClipEntry*> out;
    for (const auto& c : clips) {
        if (c.split == s) {
            out.push_back(&c);
        }
    }
    return out;
}

VideoTensor DatasetManifest::load(const ClipEntry& e) const {
    VideoTensor v = load_clip(resolve(e.path));
    if (v.shape() != e.shape) {
        throw DataError("clip " + e.id + " has shape " + to_string(v.shape()) + ", manifest declares " +
                        to_string(e.shape));
    }
    return v;
}

VideoTensor DatasetManifest::load_gt(const ClipEntry& e) const {
    if (!e.gt_path) {
        throw DataError("clip " + e.id + " has no ground-truth counterpart");
    }
    return load_clip(resolve(*e.gt_path));
}

void check_splits_disjoint(const DatasetManifest& m) {
    std::map<std::string, std::set<Split>> seen;
    for (const auto& c : m.clips) {
        auto& splits = seen[c.id];
        if (splits.contains(c.split)) {
            throw DataError("duplicate clip id '" + c.id + "' in " + to_string(c.split) + " split of " +
                            m.domain_name);
        }
        splits.insert(c.split);
        if (splits.size() > 1) {
            throw ContaminationError("clip '" + c.id + "' of domain " + m.domain_name +
                                     " appears in both train and test splits");
        }
    }
}

void validate_manifest(const DatasetManifest& m, bool verify_files) {
    if (m.format_version != kManifestFormatVersion) {
        throw FormatError("unsupported manifest format_version " + std::to_string(m.format_version));
    }
    check_splits_disjoint(m);
    for (const auto& c : m.clips) {
        if (c.shape != m.shape) {
            throw DataError("clip " + c.id + " shape " + to_string(c.shape) + " breaks the manifest contract " +
                            to_string(m.shape));
        }
        if (verify_files) {
            // Header-only check: the payload length is re-validated on full load.
            const auto p = m.resolve(c.path);
            std::ifstream in(p, std::ios::binary | std::ios::ate);
            if (!in) {
                throw DataError("manifest references missing clip " + p.string());
            }
            const auto size = static_cast<std::size_t>(in.tellg());
            in.seekg(0);
            std::vector<std::uint8_t> hdr(std::min(size, kClipHeaderBytes));
            in.read(reinterpret_cast<char*>(hdr.data()), static_cast<std::streamsize>(hdr.size()));
            if (hdr.size() < kClipHeaderBytes || std::memcmp(hdr.data(), "VVT1", 4) != 0) {
                throw FormatError(p.string() + ": not a VVT1 clip");
            }
            std::uint32_t f[4];
            std::memcpy(f, hdr.data() + 4, sizeof(f));
            Shape s{f[0], f[1], f[2], f[3] & ~kModelSpaceFlag};
            const std::size_t elem = (f[3] & kModelSpaceFlag) ? 4 : 1;
            if (s != c.shape) {
                throw DataError("clip " + c.id + " file shape " + to_string(s) + " != declared " + to_string(c.shape));
            }
            if (size != kClipHeaderBytes + s.numel() * elem) {
                throw CorruptFileError(p.string() + ": payload size does not match header");
            }
        }
    }
}

namespace {

json rgb_json(const Rgb& c) {
    return json::array({c.r, c.g, c.b});
}

Rgb rgb_from(const json& j) {
    if (!j.is_array() || j.size() != 3) {
        throw DataError("colour must be an [r, g, b] array");
    }
    return {j[0].get<std::uint8_t>(), j[1].get<std::uint8_t>(), j[2].get<std::uint8_t>()};
}

json to_json(const DatasetManifest& m) {
    json clips = json::array();
    for (const auto& c : m.clips) {
        json e = {{"id", c.id},
                  {"path", c.path},
                  {"d", c.shape.d},
                  {"h", c.shape.h},
                  {"w", c.shape.w},
                  {"c", c.shape.c},
                  {"split", to_string(c.split)}};
        if (c.gt_path) {
            e["gt_path"] = *c.gt_path;
        }
        if (c.label) {
            e["label"] = *c.label;
        }
        if (c.color) {
            e["color"] = rgb_json(*c.color);
        }
        clips.push_back(std::move(e));
    }
    json palette = json::array();
    for (const auto& c : m.palette) {
        palette.push_back(rgb_json(c));
    }
    return {{"format_version", m.format_version},
            {"domain_name", m.domain_name},
            {"kind", m.kind},
            {"rng_seed", m.rng_seed},
            {"shape", {{"d", m.shape.d}, {"h", m.shape.h}, {"w", m.shape.w}, {"c", m.shape.c}}},
            {"palette", palette},
            {"clips", clips}};
}

}  // namespace

std::string manifest_to_json_string(const DatasetManifest& m) {
    return to_json(m).dump(2) + "\n";
}

void save_manifest(const DatasetManifest& m, const fs::path& path) {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::trunc);
    out << manifest_to_json_string(m);
    if (!out) {
        throw DataError("cannot write manifest " + path.string());
    }
}

DatasetManifest load_manifest(const fs::path& path, bool verify_files) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open manifest " + path.string());
    }
    DatasetManifest m;
    try {
        const json j = json::parse(in);
        m.format_version = j.at("format_version").get<int>();
        m.domain_name = j.at("domain_name").get<std::string>();
        m.kind = j.value("kind", std::string{});
        m.rng_seed = j.value("rng_seed", std::uint64_t{0});
        const auto& s = j.at("shape");
        m.shape = {s.at("d").get<std::uint32_t>(), s.at("h").get<std::uint32_t>(), s.at("w").get<std::uint32_t>(),
                   s.at("c").get<std::uint32_t>()};
        for (const auto& p : j.value("palette", json::array())) {
            m.palette.push_back(rgb_from(p));
        }
        for (const auto& e : j.at("clips")) {
            ClipEntry c;
            c.id = e.at("id").get<std::string>();
            c.path = e.at("path").get<std::string>();
            c.shape = {e.at("d").get<std::uint32_t>(), e.at("h").get<std::uint32_t>(), e.at("w").get<std::uint32_t>(),
                       e.at("c").get<std::uint32_t>()};
            c.split = parse_split(e.at("split").get<std::string>());
            if (e.contains("gt_path")) {
                c.gt_path = e["gt_path"].get<std::string>();
            }
            if (e.contains("label")) {
                c.label = e["label"].get<int>();
            }
            if (e.contains("color")) {
                c.color = rgb_from(e["color"]);
            }
            m.clips.push_back(std::move(c));
        }
    } catch (const json::exception& e) {
        throw FormatError("malformed manifest " + path.string() + ": " + e.what());
    }
    m.root = path.parent_path();
    validate_manifest(m, verify_files);
    return m;
}

}  // namespace v2v
