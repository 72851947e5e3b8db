#include "cli_support.hpp"

#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "v2v/errors.hpp"

namespace v2v::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json scalar_to_json(const YAML::Node& n) {
    const std::string s = n.Scalar();
    if (n.Tag() == "!") {  // quoted
        return s;
    }
    if (s == "true" || s == "True" || s == "TRUE") {
        return true;
    }
    if (s == "false" || s == "False" || s == "FALSE") {
        return false;
    }
    if (s == "null" || s == "~" || s.empty()) {
        return nullptr;
    }
    // Numbers follow JSON syntax; anything else stays a string.
    try {
        json j = json::parse(s);
        if (j.is_number()) {
            return j;
        }
    } catch (const json::exception&) {
    }
    return s;
}

json yaml_to_json(const YAML::Node& n) {
    switch (n.Type()) {
        case YAML::NodeType::Map: {
            json out = json::object();
            for (const auto& kv : n) {
                out[kv.first.as<std::string>()] = yaml_to_json(kv.second);
            }
            return out;
        }
        case YAML::NodeType::Sequence: {
            json out = json::array();
            for (const auto& item : n) {
                out.push_back(yaml_to_json(item));
            }
            return out;
        }
        case YAML::NodeType::Scalar:
            return scalar_to_json(n);
        default:
            return nullptr;
    }
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw DataError("cannot read " + p.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

json parse_yaml(const std::string& text) {
    try {
        return yaml_to_json(YAML::Load(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("bad YAML: ") + e.what());
    }
}

json load_config(const fs::path& path) {
    if (!fs::exists(path)) {
        throw ConfigError("config file not found: " + path.string());
    }
    const std::string text = read_file(path);
    const std::string ext = path.extension().string();
    json out;
    if (ext == ".yaml" || ext == ".yml") {
        out = parse_yaml(text);
    } else {
        try {
            out = json::parse(text);
        } catch (const json::exception& e) {
            throw ConfigError(path.string() + ": " + e.what());
        }
    }
    if (!out.is_object()) {
        throw ConfigError(path.string() + ": top level must be a mapping");
    }
    return out;
}

void apply_override(json& config, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw ConfigError("override '" + assignment + "' is not key=value");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string raw = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(raw);
    } catch (const json::exception&) {
        value = raw;
    }
    json* node = &config;
    std::size_t start = 0;
    while (true) {
        const auto dot = key.find('.', start);
        const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (part.empty()) {
            throw ConfigError("override key '" + key + "' has an empty component");
        }
        if (!node->is_object()) {
            if (!node->is_null()) {
                throw ConfigError("override '" + key + "' descends into a non-mapping value");
            }
            *node = json::object();
        }
        node = &(*node)[part];
        if (dot == std::string::npos) {
            break;
        }
        start = dot + 1;
    }
    *node = value;
}

std::string sha1_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha1(), nullptr) != 1) {
        throw Error("SHA-1 digest failed");
    }
    std::string out;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof(buf), "%02x", md[i]);
        out += buf;
    }
    return out;
}

std::string git_blob_sha1(const fs::path& file) {
    const std::string body = read_file(file);
    std::string blob = "blob " + std::to_string(body.size());
    blob.push_back('\0');
    return sha1_hex(blob + body);
}

std::string inputs_hash(const std::vector<fs::path>& files) {
    std::string lines;
    for (const auto& f : files) {
        lines += git_blob_sha1(f) + " " + f.generic_string() + "\n";
    }
    return sha1_hex(lines);
}

void prepare_out_dir(const fs::path& dir, bool force) {
    if (fs::exists(dir)) {
        if (!fs::is_directory(dir)) {
            throw ConfigError(dir.string() + " exists and is not a directory");
        }
        if (!fs::is_empty(dir)) {
            if (!force) {
                throw ConfigError(dir.string() + " is not empty; pass --force to overwrite");
            }
            for (const auto& e : fs::directory_iterator(dir)) {
                fs::remove_all(e.path());
            }
        }
    }
    fs::create_directories(dir);
}

void RunRecord::write(const fs::path& dir) const {
    json j = {{"subcommand", subcommand},
              {"config", config},
              {"seed", seed},
              {"inputs_hash", inputs_hash},
              {"completed", completed}};
    for (const auto& [k, v] : extra.items()) {
        j[k] = v;
    }
    const fs::path tmp = dir / "run.json.tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        out << j.dump(2) << "\n";
        if (!out) {
            throw DataError("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, dir / "run.json");
}

}  // namespace v2v::cli
