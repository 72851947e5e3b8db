#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace v2v::cli {

/// Parses a JSON or YAML file (chosen by extension, .json vs .yaml/.yml)
/// into a JSON value. YAML scalars become bool, integer, float or string.
nlohmann::json load_config(const std::filesystem::path& path);
nlohmann::json parse_yaml(const std::string& text);

/// Applies "a.b.c=value" onto `config`, creating objects along the path.
/// The value is read as JSON when it parses, else as a plain string.
void apply_override(nlohmann::json& config, const std::string& assignment);

/// Git blob hash of a file's bytes: sha1("blob <n>\0" + bytes), hex.
std::string git_blob_sha1(const std::filesystem::path& file);
std::string sha1_hex(const std::string& bytes);

/// Hash over the named inputs: sha1 of "<blob-sha1> <path>\n" lines.
std::string inputs_hash(const std::vector<std::filesystem::path>& files);

/// Guards an output directory. Without `force`, refuses a directory that
/// exists and is non-empty; with `force`, clears it. Creates it if absent.
void prepare_out_dir(const std::filesystem::path& dir, bool force);

/// run.json: resolved config, seed, input hash and completion flag.
struct RunRecord {
    std::string subcommand;
    nlohmann::json config;
    std::uint64_t seed = 0;
    std::string inputs_hash;
    nlohmann::json extra = nlohmann::json::object();
    bool completed = false;

    void write(const std::filesystem::path& dir) const;
};

}  // namespace v2v::cli
