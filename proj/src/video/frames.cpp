#include <png.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "v2v/errors.hpp"
#include "v2v/video.hpp"

namespace v2v {

namespace fs = std::filesystem;

namespace {

struct PngImage {
    png_image image{};
    PngImage() { image.version = PNG_IMAGE_VERSION; }
    ~PngImage() { png_image_free(&image); }
    PngImage(const PngImage&) = delete;
    PngImage& operator=(const PngImage&) = delete;
};

struct Frame {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::vector<std::uint8_t> pixels;
};

Frame read_png(const fs::path& path, std::uint32_t channels) {
    PngImage png;
    if (png_image_begin_read_from_file(&png.image, path.c_str()) == 0) {
        throw DataError("cannot decode PNG " + path.string() + ": " + png.image.message);
    }
    png.image.format = channels == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
    Frame f;
    f.h = png.image.height;
    f.w = png.image.width;
    f.pixels.resize(PNG_IMAGE_SIZE(png.image));
    if (png_image_finish_read(&png.image, nullptr, f.pixels.data(), 0, nullptr) == 0) {
        throw DataError("cannot decode PNG " + path.string() + ": " + png.image.message);
    }
    return f;
}

}  // namespace

VideoTensor import_frame_dir(const fs::path& dir, std::uint32_t expected_c, std::uint32_t stride) {
    if (expected_c != 1 && expected_c != 3) {
        throw ConfigError("expected_c must be 1 or 3");
    }
    if (stride == 0) {
        throw ConfigError("frame stride must be >= 1");
    }
    if (!fs::is_directory(dir)) {
        throw DataError("not a directory: " + dir.string());
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".png") {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw DataError("no PNG frames in " + dir.string());
    }
    std::sort(files.begin(), files.end(),
              [](const fs::path& a, const fs::path& b) { return a.filename().string() < b.filename().string(); });

    std::vector<std::uint8_t> data;
    Shape shape{0, 0, 0, expected_c};
    for (std::size_t i = 0; i < files.size(); i += stride) {
        Frame f = read_png(files[i], expected_c);
        if (shape.d == 0) {
            shape.h = f.h;
            shape.w = f.w;
        } else if (f.h != shape.h || f.w != shape.w) {
            throw DataError("frame " + files[i].string() + " is " + std::to_string(f.w) + "x" +
                            std::to_string(f.h) + ", expected " + std::to_string(shape.w) + "x" +
                            std::to_string(shape.h));
        }
        data.insert(data.end(), f.pixels.begin(), f.pixels.end());
        ++shape.d;
    }
    return VideoTensor::storage(shape, std::move(data));
}

void export_frames(const VideoTensor& v, const fs::path& dir) {
    const VideoTensor s = v.space() == Space::Storage ? v : to_storage_space(v);
    const Shape& shape = s.shape();
    fs::create_directories(dir);
    auto bytes = s.bytes();
    for (std::uint32_t t = 0; t < shape.d; ++t) {
        char name[32];
        std::snprintf(name, sizeof(name), "%03u.png", t);
        PngImage png;
        png.image.width = shape.w;
        png.image.height = shape.h;
        png.image.format = shape.c == 1 ? PNG_FORMAT_GRAY : PNG_FORMAT_RGB;
        const auto path = dir / name;
        if (png_image_write_to_file(&png.image, path.c_str(), 0, bytes.data() + t * shape.frame_numel(), 0,
                                    nullptr) == 0) {
            throw DataError("cannot write PNG " + path.string() + ": " + png.image.message);
        }
    }
}

namespace {

// Variable-width LZW over 8-bit palette indices, as GIF89a requires.
class GifLzw {
public:
    std::vector<std::uint8_t> encode(const std::vector<std::uint8_t>& indices) {
        std::vector<std::uint8_t> bytes;
        bytes_ = &bytes;
        reset();
        emit(kClear);
        int prefix = -1;
        for (std::uint8_t k : indices) {
            if (prefix < 0) {
                prefix = k;
                continue;
            }
            const std::uint32_t key = (static_cast<std::uint32_t>(prefix) << 8) | k;
            auto it = table_.find(key);
            if (it != table_.end()) {
                prefix = it->second;
                continue;
            }
            emit(prefix);
            if (next_ < 4096) {
                table_.emplace(key, next_++);
                if (next_ > (1 << width_) && width_ < 12) {
                    ++width_;
                }
            } else {
                emit(kClear);
                reset();
            }
            prefix = k;
        }
        if (prefix >= 0) {
            emit(prefix);
        }
        emit(kEnd);
        if (nbits_ > 0) {
            bytes.push_back(static_cast<std::uint8_t>(acc_));
        }
        return bytes;
    }

private:
    static constexpr int kClear = 256;
    static constexpr int kEnd = 257;

    void reset() {
        table_.clear();
        next_ = 258;
        width_ = 9;
    }

    void emit(int code) {
        acc_ |= static_cast<std::uint32_t>(code) << nbits_;
        nbits_ += width_;
        while (nbits_ >= 8) {
            bytes_->push_back(static_cast<std::uint8_t>(acc_ & 0xff));
            acc_ >>= 8;
            nbits_ -= 8;
        }
    }

    std::vector<std::uint8_t>* bytes_ = nullptr;
    std::unordered_map<std::uint32_t, int> table_;
    int next_ = 258;
    int width_ = 9;
    std::uint32_t acc_ = 0;
    int nbits_ = 0;
};

void put_u16(std::vector<std::uint8_t>& b, std::uint16_t x) {
    b.push_back(static_cast<std::uint8_t>(x & 0xff));
    b.push_back(static_cast<std::uint8_t>(x >> 8));
}

}  // namespace

void export_gif(const VideoTensor& v, const fs::path& path, int frame_delay_cs) {
    const VideoTensor s = v.space() == Space::Storage ? v : to_storage_space(v);
    const Shape& shape = s.shape();
    if (shape.w > 0xffff || shape.h > 0xffff) {
        throw DataError("clip too large for GIF preview");
    }
    std::vector<std::uint8_t> out;
    out.insert(out.end(), {'G', 'I', 'F', '8', '9', 'a'});
    put_u16(out, static_cast<std::uint16_t>(shape.w));
    put_u16(out, static_cast<std::uint16_t>(shape.h));
    out.push_back(0xF7);  // global table, 8-bit colour resolution, 256 entries
    out.push_back(0);
    out.push_back(0);
    // Gray ramp for single-channel clips, 6x7x6 cube for RGB.
    for (int i = 0; i < 256; ++i) {
        if (shape.c == 1) {
            out.insert(out.end(), {static_cast<std::uint8_t>(i), static_cast<std::uint8_t>(i),
                                   static_cast<std::uint8_t>(i)});
        } else if (i < 252) {
            const int r = i / 42, g = (i / 6) % 7, b = i % 6;
            out.insert(out.end(), {static_cast<std::uint8_t>(r * 51), static_cast<std::uint8_t>(g * 255 / 6),
                                   static_cast<std::uint8_t>(b * 51)});
        } else {
            out.insert(out.end(), {0, 0, 0});
        }
    }
    // NETSCAPE2.0 looping extension.
    out.insert(out.end(), {0x21, 0xFF, 0x0B, 'N', 'E', 'T', 'S', 'C', 'A', 'P', 'E', '2', '.', '0', 0x03, 0x01,
                           0x00, 0x00, 0x00});

    auto bytes = s.bytes();
    const std::size_t npix = static_cast<std::size_t>(shape.h) * shape.w;
    for (std::uint32_t t = 0; t < shape.d; ++t) {
        out.insert(out.end(), {0x21, 0xF9, 0x04, 0x00});
        put_u16(out, static_cast<std::uint16_t>(frame_delay_cs));
        out.insert(out.end(), {0x00, 0x00});
        out.push_back(0x2C);
        put_u16(out, 0);
        put_u16(out, 0);
        put_u16(out, static_cast<std::uint16_t>(shape.w));
        put_u16(out, static_cast<std::uint16_t>(shape.h));
        out.push_back(0);

        std::vector<std::uint8_t> indices(npix);
        const std::uint8_t* frame = bytes.data() + t * shape.frame_numel();
        for (std::size_t p = 0; p < npix; ++p) {
            if (shape.c == 1) {
                indices[p] = frame[p];
            } else {
                const int r = (frame[3 * p] * 5 + 127) / 255;
                const int g = (frame[3 * p + 1] * 6 + 127) / 255;
                const int b = (frame[3 * p + 2] * 5 + 127) / 255;
                indices[p] = static_cast<std::uint8_t>(r * 42 + g * 6 + b);
            }
        }
        out.push_back(8);
        GifLzw lzw;
        const auto code = lzw.encode(indices);
        for (std::size_t off = 0; off < code.size(); off += 255) {
            const std::size_t n = std::min<std::size_t>(255, code.size() - off);
            out.push_back(static_cast<std::uint8_t>(n));
            out.insert(out.end(), code.begin() + off, code.begin() + off + n);
        }
        out.push_back(0);
    }
    out.push_back(0x3B);

    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
    if (!f) {
        throw DataError("cannot write GIF " + path.string());
    }
}

}  // namespace v2v
