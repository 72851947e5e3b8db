#include "v2v/video.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>

#include "v2v/errors.hpp"

namespace v2v {

static_assert(std::endian::native == std::endian::little, "clip I/O assumes a little-endian host");

std::string to_string(const Shape& s) {
    return std::to_string(s.d) + "x" + std::to_string(s.h) + "x" + std::to_string(s.w) + "x" +
           std::to_string(s.c);
}

void validate_shape(const Shape& shape) {
    if (shape.d == 0 || shape.h == 0 || shape.w == 0) {
        throw ConfigError("clip dimensions must be positive, got " + to_string(shape));
    }
    if (shape.c != 1 && shape.c != 3) {
        throw ConfigError("clip channels must be 1 or 3, got " + std::to_string(shape.c));
    }
}

VideoTensor VideoTensor::storage(Shape shape, std::vector<std::uint8_t> bytes) {
    validate_shape(shape);
    if (bytes.size() != shape.numel()) {
        throw DataError("payload has " + std::to_string(bytes.size()) + " elements, shape " +
                        to_string(shape) + " needs " + std::to_string(shape.numel()));
    }
    VideoTensor v;
    v.shape_ = shape;
    v.space_ = Space::Storage;
    v.data_ = std::move(bytes);
    return v;
}

VideoTensor VideoTensor::model(Shape shape, std::vector<float> values) {
    validate_shape(shape);
    if (values.size() != shape.numel()) {
        throw DataError("payload has " + std::to_string(values.size()) + " elements, shape " +
                        to_string(shape) + " needs " + std::to_string(shape.numel()));
    }
    for (float x : values) {
        if (!(x >= -1.0f && x <= 1.0f)) {
            throw DataError("model-space value outside [-1, 1]: " + std::to_string(x));
        }
    }
    VideoTensor v;
    v.shape_ = shape;
    v.space_ = Space::Model;
    v.data_ = std::move(values);
    return v;
}

VideoTensor VideoTensor::zeros(Shape shape, Space space) {
    if (space == Space::Storage) {
        return storage(shape, std::vector<std::uint8_t>(shape.numel(), 0));
    }
    return model(shape, std::vector<float>(shape.numel(), 0.0f));
}

std::span<const std::uint8_t> VideoTensor::bytes() const {
    if (space_ != Space::Storage) {
        throw DataError("expected a storage-space clip");
    }
    return std::get<std::vector<std::uint8_t>>(data_);
}

std::span<const float> VideoTensor::values() const {
    if (space_ != Space::Model) {
        throw DataError("expected a model-space clip");
    }
    return std::get<std::vector<float>>(data_);
}

double VideoTensor::at(std::size_t t, std::size_t y, std::size_t x, std::size_t ch) const {
    const std::size_t i = index(t, y, x, ch);
    if (space_ == Space::Storage) {
        return std::get<std::vector<std::uint8_t>>(data_)[i];
    }
    return std::get<std::vector<float>>(data_)[i];
}

bool operator==(const VideoTensor& a, const VideoTensor& b) {
    return a.shape_ == b.shape_ && a.space_ == b.space_ && a.data_ == b.data_;
}

VideoTensor slice_window(const VideoTensor& v, const ClipWindow& win) {
    const Shape& s = v.shape();
    if (win.depth == 0 || static_cast<std::uint64_t>(win.t0) + win.depth > s.d) {
        throw DataError("window [" + std::to_string(win.t0) + ", " +
                        std::to_string(static_cast<std::uint64_t>(win.t0) + win.depth) +
                        ") outside clip of depth " + std::to_string(s.d));
    }
    Shape out = s;
    out.d = win.depth;
    const std::size_t begin = static_cast<std::size_t>(win.t0) * s.frame_numel();
    const std::size_t count = out.numel();
    if (v.space() == Space::Storage) {
        auto src = v.bytes().subspan(begin, count);
        return VideoTensor::storage(out, {src.begin(), src.end()});
    }
    auto src = v.values().subspan(begin, count);
    return VideoTensor::model(out, {src.begin(), src.end()});
}

float dequantize(std::uint8_t s) noexcept {
    return static_cast<float>(static_cast<double>(s) / 127.5 - 1.0);
}

std::uint8_t quantize(float m) noexcept {
    double x = std::isnan(m) ? 0.0 : std::clamp(static_cast<double>(m), -1.0, 1.0);
    double s = std::floor(x * 127.5 + 127.5 + 0.5);
    return static_cast<std::uint8_t>(std::clamp(s, 0.0, 255.0));
}

VideoTensor to_model_space(const VideoTensor& v) {
    if (v.space() != Space::Storage) {
        throw DataError("to_model_space needs a storage-space clip");
    }
    auto in = v.bytes();
    std::vector<float> out(in.size());
    std::transform(in.begin(), in.end(), out.begin(), dequantize);
    return VideoTensor::model(v.shape(), std::move(out));
}

VideoTensor to_storage_space(const VideoTensor& v) {
    if (v.space() != Space::Model) {
        throw DataError("to_storage_space needs a model-space clip");
    }
    auto in = v.values();
    std::vector<std::uint8_t> out(in.size());
    std::transform(in.begin(), in.end(), out.begin(), quantize);
    return VideoTensor::storage(v.shape(), std::move(out));
}

namespace {

void put_u32(std::vector<std::uint8_t>& buf, std::uint32_t x) {
    for (int i = 0; i < 4; ++i) {
        buf.push_back(static_cast<std::uint8_t>(x >> (8 * i)));
    }
}

std::uint32_t get_u32(std::span<const std::uint8_t> buf, std::size_t off) {
    std::uint32_t x = 0;
    for (int i = 0; i < 4; ++i) {
        x |= static_cast<std::uint32_t>(buf[off + i]) << (8 * i);
    }
    return x;
}

}  // namespace

std::vector<std::uint8_t> encode_clip(const VideoTensor& v) {
    const Shape& s = v.shape();
    validate_shape(s);
    const bool model = v.space() == Space::Model;
    std::vector<std::uint8_t> buf;
    buf.reserve(kClipHeaderBytes + s.numel() * (model ? 4 : 1));
    buf.resize(4);
    std::memcpy(buf.data(), "VVT1", 4);
    put_u32(buf, s.d);
    put_u32(buf, s.h);
    put_u32(buf, s.w);
    put_u32(buf, s.c | (model ? kModelSpaceFlag : 0u));
    if (model) {
        auto vals = v.values();
        const std::size_t off = buf.size();
        buf.resize(off + vals.size() * sizeof(float));
        std::memcpy(buf.data() + off, vals.data(), vals.size() * sizeof(float));
    } else {
        auto bytes = v.bytes();
        buf.insert(buf.end(), bytes.begin(), bytes.end());
    }
    return buf;
}

VideoTensor decode_clip(std::span<const std::uint8_t> buf, const std::string& origin) {
    if (buf.size() < 4 || std::memcmp(buf.data(), "VVT1", 4) != 0) {
        throw FormatError(origin + ": not a VVT1 clip (bad magic)");
    }
    if (buf.size() < kClipHeaderBytes) {
        throw CorruptFileError(origin + ": truncated header");
    }
    const std::uint32_t cword = get_u32(buf, 16);
    const bool model = (cword & kModelSpaceFlag) != 0;
    Shape s{get_u32(buf, 4), get_u32(buf, 8), get_u32(buf, 12), cword & ~kModelSpaceFlag};
    try {
        validate_shape(s);
    } catch (const ConfigError& e) {
        throw CorruptFileError(origin + ": " + e.what());
    }
    const std::size_t payload = buf.size() - kClipHeaderBytes;
    const std::size_t expected = s.numel() * (model ? sizeof(float) : 1);
    if (payload != expected) {
        throw CorruptFileError(origin + ": header declares " + to_string(s) + " (" +
                               std::to_string(expected) + " payload bytes) but file holds " +
                               std::to_string(payload));
    }
    auto body = buf.subspan(kClipHeaderBytes);
    if (model) {
        std::vector<float> vals(s.numel());
        std::memcpy(vals.data(), body.data(), payload);
        try {
            return VideoTensor::model(s, std::move(vals));
        } catch (const DataError& e) {
            throw CorruptFileError(origin + ": " + e.what());
        }
    }
    return VideoTensor::storage(s, {body.begin(), body.end()});
}

void save_clip(const VideoTensor& v, const std::filesystem::path& path) {
    const auto buf = encode_clip(v);
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw DataError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) {
        throw DataError("write failed: " + path.string());
    }
}

VideoTensor load_clip(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open clip " + path.string());
    }
    std::vector<std::uint8_t> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return decode_clip(buf, path.string());
}

}  // namespace v2v
