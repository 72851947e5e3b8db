#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace v2v {

/// Dimensions of a clip: d frames of h x w pixels with c interleaved channels.
struct Shape {
    std::uint32_t d = 0;
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::uint32_t c = 0;

    std::size_t numel() const noexcept {
        return static_cast<std::size_t>(d) * h * w * c;
    }
    std::size_t frame_numel() const noexcept { return static_cast<std::size_t>(h) * w * c; }

    friend bool operator==(const Shape&, const Shape&) = default;
};

std::string to_string(const Shape& s);

enum class Space { Model, Storage };

/// Dense d x h x w x c clip. Storage space holds bytes in [0, 255], model
/// space holds floats in [-1, 1]. Immutable once constructed.
class VideoTensor {
public:
    VideoTensor() = default;

    static VideoTensor storage(Shape shape, std::vector<std::uint8_t> bytes);
    static VideoTensor model(Shape shape, std::vector<float> values);
    static VideoTensor zeros(Shape shape, Space space = Space::Storage);

    const Shape& shape() const noexcept { return shape_; }
    Space space() const noexcept { return space_; }
    bool empty() const noexcept { return shape_.numel() == 0; }

    /// Storage payload; throws unless space() == Storage.
    std::span<const std::uint8_t> bytes() const;
    /// Model payload; throws unless space() == Model.
    std::span<const float> values() const;

    std::size_t index(std::size_t t, std::size_t y, std::size_t x, std::size_t ch = 0) const noexcept {
        return ((t * shape_.h + y) * shape_.w + x) * shape_.c + ch;
    }

    /// Element in native units of the tensor's space.
    double at(std::size_t t, std::size_t y, std::size_t x, std::size_t ch = 0) const;

    friend bool operator==(const VideoTensor& a, const VideoTensor& b);

private:
    Shape shape_{};
    Space space_ = Space::Storage;
    std::variant<std::vector<std::uint8_t>, std::vector<float>> data_;
};

/// Throws ConfigError when any dimension is zero or c is not 1 or 3.
void validate_shape(const Shape& shape);

/// Temporal window [t0, t0 + depth) over a source clip.
struct ClipWindow {
    std::string clip_id;
    std::uint32_t t0 = 0;
    std::uint32_t depth = 0;
};

VideoTensor slice_window(const VideoTensor& v, const ClipWindow& win);

/// m = s / 127.5 - 1
VideoTensor to_model_space(const VideoTensor& v);
/// s = round(clamp(m, -1, 1) * 127.5 + 127.5), ties rounded up.
VideoTensor to_storage_space(const VideoTensor& v);

std::uint8_t quantize(float model_value) noexcept;
float dequantize(std::uint8_t storage_value) noexcept;

// "VVT1" container: magic, then d, h, w, c as little-endian u32 (bit 31 of
// the c word flags a float32 model-space payload), then the payload.
inline constexpr std::size_t kClipHeaderBytes = 20;
inline constexpr std::uint32_t kModelSpaceFlag = 0x80000000u;

void save_clip(const VideoTensor& v, const std::filesystem::path& path);
VideoTensor load_clip(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_clip(const VideoTensor& v);
VideoTensor decode_clip(std::span<const std::uint8_t> buffer, const std::string& origin = "<buffer>");

/// Stacks the PNG frames of `dir` in lexicographic filename order.
/// `stride` keeps every stride-th frame (1 keeps all).
VideoTensor import_frame_dir(const std::filesystem::path& dir, std::uint32_t expected_c,
                             std::uint32_t stride = 1);

/// Writes frames as zero-padded 000.png, 001.png, ... (storage clips only).
void export_frames(const VideoTensor& v, const std::filesystem::path& dir);

/// Animated GIF preview. Lossy; never read back.
void export_gif(const VideoTensor& v, const std::filesystem::path& path, int frame_delay_cs = 10);

}  // namespace v2v
