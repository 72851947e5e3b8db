#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "v2v/manifest.hpp"
#include "v2v/rng.hpp"
#include "v2v/video.hpp"

namespace v2v::synth {

/// Single-channel 8-bit image, row-major.
struct GrayImage {
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::vector<std::uint8_t> px;

    GrayImage() = default;
    GrayImage(std::uint32_t h_, std::uint32_t w_, std::uint8_t fill = 0) : h(h_), w(w_), px(std::size_t{h_} * w_, fill) {}

    std::uint8_t& at(std::uint32_t y, std::uint32_t x) { return px[std::size_t{y} * w + x]; }
    std::uint8_t at(std::uint32_t y, std::uint32_t x) const { return px[std::size_t{y} * w + x]; }
    double mean() const;

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

inline constexpr std::uint32_t kDigitSize = 28;

/// 28x28 digit images with labels.
struct DigitSource {
    std::vector<GrayImage> images;
    std::vector<std::uint8_t> labels;

    std::size_t size() const noexcept { return images.size(); }
    void validate() const;
};

/// Reads an IDX image archive (magic 0x00000803) and its label archive
/// (magic 0x00000801).
DigitSource load_digit_archive(const std::filesystem::path& images_path, const std::filesystem::path& labels_path);
DigitSource parse_digit_archive(const std::vector<std::uint8_t>& images, const std::vector<std::uint8_t>& labels);

/// Handwriting-like digits rendered from stroke templates with random affine
/// jitter and stroke width. Stand-in when no IDX archive is available.
struct GlyphStyle {
    double min_stroke = 3.2;
    double max_stroke = 4.6;
    double max_rotation_deg = 12.0;
    double max_shift = 1.5;
};
DigitSource synthetic_digits(std::size_t count, std::uint64_t seed, const GlyphStyle& style = {});

// ---------------------------------------------------------------------------
// Morphology

/// Offsets (dy, dx) with dy^2 + dx^2 <= r^2.
std::vector<std::pair<int, int>> disk_offsets(std::uint32_t radius);

/// Grayscale erosion with a disk of `radius` pixels; out-of-image samples read
/// as 0. Radius 0 is the identity; radius > min(h, w) / 2 is rejected.
GrayImage erode(const GrayImage& img, std::uint32_t radius);

// ---------------------------------------------------------------------------
// Volumetric digits

enum class ErosionMode { Spherical, Sandglass };

const char* to_string(ErosionMode m);

struct ErosionSchedule {
    ErosionMode mode = ErosionMode::Spherical;
    std::uint32_t depth = 30;
    std::uint32_t max_radius = 6;

    void validate() const;
    /// Spherical: round(R * |2t - (d-1)| / (d-1)).
    /// Sandglass: round(R * (1 - |2t - (d-1)| / (d-1))).
    std::uint32_t radius(std::uint32_t t) const;
    std::vector<std::uint32_t> radii() const;
};

/// Nearest-neighbour upscale of a 28x28 digit by floor(canvas / 28), centred.
GrayImage place_on_canvas(const GrayImage& digit, std::uint32_t canvas);

VideoTensor gen_volumetric(const GrayImage& digit, const ErosionSchedule& schedule, std::uint32_t canvas = 84);

// ---------------------------------------------------------------------------
// Moving digits

struct MotionSpec {
    std::uint32_t canvas_h = 64;
    std::uint32_t canvas_w = 64;
    int row = 0;  // sprite top-left at frame 0
    int col = 0;
    int d_row = 1;  // pixels per frame, non-zero
    int d_col = 1;
    std::uint32_t depth = 20;

    void validate() const;
    /// Top-left positions for a sprite of the given size after elastic wall bounces.
    std::vector<std::pair<int, int>> trajectory(std::uint32_t sprite_h, std::uint32_t sprite_w) const;
};

/// Tight bounding box of pixels above `threshold`; empty image if none.
GrayImage ink_crop(const GrayImage& img, std::uint8_t threshold = 0);

/// Velocity components uniform in {-max_speed..max_speed} \ {0}, start uniform
/// over positions that keep the sprite inside the canvas.
MotionSpec sample_motion(Rng& rng, std::uint32_t canvas_h, std::uint32_t canvas_w, std::uint32_t sprite_h,
                         std::uint32_t sprite_w, std::uint32_t depth, int max_speed = 3);

/// White sprite on a black canvas following `motion`; d x h x w x 1 storage clip.
VideoTensor gen_moving_digit(const GrayImage& sprite, const MotionSpec& motion);

/// Intensity-scaled tint: each channel becomes round(p * colour / 255).
VideoTensor colorize_clip(const VideoTensor& white_clip, const Rgb& color);

/// n hues evenly spaced from 0 degrees at full saturation and value.
std::vector<Rgb> make_palette(std::uint32_t n);
Rgb hsv_to_rgb(double hue_deg, double saturation, double value);

// ---------------------------------------------------------------------------
// Datasets

enum class DatasetKind { Volumetric, MovingColor };

const char* to_string(DatasetKind k);
DatasetKind parse_dataset_kind(const std::string& s);

struct SynthConfig {
    DatasetKind kind = DatasetKind::Volumetric;
    std::uint32_t depth = 30;
    std::uint32_t canvas = 84;
    std::uint32_t clips_per_domain = 100;
    std::uint32_t max_radius = 6;  // volumetric
    std::uint32_t colors = 20;     // moving_color
    int max_speed = 3;             // moving_color
    double train_fraction = 0.7;

    void validate() const;
};

struct DatasetPair {
    DatasetManifest a;
    DatasetManifest b;
    std::filesystem::path manifest_a;
    std::filesystem::path manifest_b;
};

/// Writes <out>/A and <out>/B, each holding clips/, gt/ (test-clip
/// counterparts in the other domain) and manifest.json. The two domains use
/// disjoint digit subsets and independent 70/30 splits.
DatasetPair build_dataset(const SynthConfig& config, const DigitSource& digits, const std::filesystem::path& out_dir,
                          std::uint64_t seed, unsigned jobs = 1);

/// Indices [0, n) split into train/test by a seeded shuffle; train gets
/// round(fraction * n) entries.
std::vector<Split> assign_splits(std::size_t n, double train_fraction, std::uint64_t seed);

}  // namespace v2v::synth
