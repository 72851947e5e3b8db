#include <algorithm>
#include <cmath>
#include <map>

#include "v2v/errors.hpp"
#include "v2v/synth.hpp"

namespace v2v::synth {

const char* to_string(ErosionMode m) {
    return m == ErosionMode::Spherical ? "spherical" : "sandglass";
}

void ErosionSchedule::validate() const {
    if (depth < 2) {
        throw ConfigError("erosion schedule needs at least 2 frames, got " + std::to_string(depth));
    }
}

std::uint32_t ErosionSchedule::radius(std::uint32_t t) const {
    validate();
    if (t >= depth) {
        throw ConfigError("frame index out of range");
    }
    const double span = static_cast<double>(depth - 1);
    const double ramp = std::abs(2.0 * t - span) / span;  // 1 at the ends, 0 in the middle
    const double r = mode == ErosionMode::Spherical ? max_radius * ramp : max_radius * (1.0 - ramp);
    return static_cast<std::uint32_t>(std::floor(r + 0.5));
}

std::vector<std::uint32_t> ErosionSchedule::radii() const {
    std::vector<std::uint32_t> out(depth);
    for (std::uint32_t t = 0; t < depth; ++t) {
        out[t] = radius(t);
    }
    return out;
}

GrayImage place_on_canvas(const GrayImage& digit, std::uint32_t canvas) {
    if (digit.h != kDigitSize || digit.w != kDigitSize) {
        throw ConfigError("digit must be 28x28");
    }
    const std::uint32_t k = canvas / kDigitSize;
    if (k == 0) {
        throw ConfigError("canvas " + std::to_string(canvas) + " is smaller than a 28x28 digit");
    }
    const std::uint32_t off = (canvas - k * kDigitSize) / 2;
    GrayImage out(canvas, canvas);
    for (std::uint32_t y = 0; y < kDigitSize * k; ++y) {
        for (std::uint32_t x = 0; x < kDigitSize * k; ++x) {
            out.at(off + y, off + x) = digit.at(y / k, x / k);
        }
    }
    return out;
}

VideoTensor gen_volumetric(const GrayImage& digit, const ErosionSchedule& schedule, std::uint32_t canvas) {
    schedule.validate();
    const GrayImage base = place_on_canvas(digit, canvas);
    if (schedule.max_radius > canvas / 2) {
        throw ConfigError("max erosion radius exceeds half the canvas");
    }
    std::map<std::uint32_t, GrayImage> by_radius;
    std::vector<std::uint8_t> data;
    data.reserve(std::size_t{schedule.depth} * canvas * canvas);
    for (std::uint32_t t = 0; t < schedule.depth; ++t) {
        const std::uint32_t r = schedule.radius(t);
        auto it = by_radius.find(r);
        if (it == by_radius.end()) {
            it = by_radius.emplace(r, erode(base, r)).first;
        }
        data.insert(data.end(), it->second.px.begin(), it->second.px.end());
    }
    return VideoTensor::storage({schedule.depth, canvas, canvas, 1}, std::move(data));
}

void MotionSpec::validate() const {
    if (d_row == 0 || d_col == 0) {
        throw ConfigError("motion velocity components must be non-zero");
    }
    if (depth == 0 || canvas_h == 0 || canvas_w == 0) {
        throw ConfigError("motion canvas and depth must be positive");
    }
}

namespace {

// Reflects p into [0, hi] as an elastic bounce, flipping v on each wall hit.
void bounce(int& p, int& v, int hi) {
    if (hi <= 0) {
        p = 0;
        return;
    }
    while (p < 0 || p > hi) {
        if (p < 0) {
            p = -p;
        } else {
            p = 2 * hi - p;
        }
        v = -v;
    }
}

}  // namespace

std::vector<std::pair<int, int>> MotionSpec::trajectory(std::uint32_t sprite_h, std::uint32_t sprite_w) const {
    validate();
    if (sprite_h > canvas_h || sprite_w > canvas_w) {
        throw ConfigError("sprite is larger than the canvas");
    }
    const int max_r = static_cast<int>(canvas_h - sprite_h);
    const int max_c = static_cast<int>(canvas_w - sprite_w);
    if (row < 0 || row > max_r || col < 0 || col > max_c) {
        throw ConfigError("initial sprite position leaves the canvas");
    }
    std::vector<std::pair<int, int>> out;
    int r = row, c = col, vr = d_row, vc = d_col;
    for (std::uint32_t t = 0; t < depth; ++t) {
        out.emplace_back(r, c);
        r += vr;
        c += vc;
        bounce(r, vr, max_r);
        bounce(c, vc, max_c);
    }
    return out;
}

GrayImage ink_crop(const GrayImage& img, std::uint8_t threshold) {
    std::uint32_t y0 = img.h, y1 = 0, x0 = img.w, x1 = 0;
    for (std::uint32_t y = 0; y < img.h; ++y) {
        for (std::uint32_t x = 0; x < img.w; ++x) {
            if (img.at(y, x) > threshold) {
                y0 = std::min(y0, y);
                y1 = std::max(y1, y);
                x0 = std::min(x0, x);
                x1 = std::max(x1, x);
            }
        }
    }
    if (y0 > y1) {
        return {};
    }
    GrayImage out(y1 - y0 + 1, x1 - x0 + 1);
    for (std::uint32_t y = y0; y <= y1; ++y) {
        for (std::uint32_t x = x0; x <= x1; ++x) {
            out.at(y - y0, x - x0) = img.at(y, x);
        }
    }
    return out;
}

MotionSpec sample_motion(Rng& rng, std::uint32_t canvas_h, std::uint32_t canvas_w, std::uint32_t sprite_h,
                         std::uint32_t sprite_w, std::uint32_t depth, int max_speed) {
    if (max_speed < 1) {
        throw ConfigError("max_speed must be >= 1");
    }
    if (sprite_h > canvas_h || sprite_w > canvas_w) {
        throw ConfigError("sprite is larger than the canvas");
    }
    auto velocity = [&] {
        // {-max..max} without 0
        int v = static_cast<int>(uniform_int(rng, -max_speed, max_speed - 1));
        return v >= 0 ? v + 1 : v;
    };
    MotionSpec m;
    m.canvas_h = canvas_h;
    m.canvas_w = canvas_w;
    m.depth = depth;
    m.row = static_cast<int>(uniform_int(rng, 0, canvas_h - sprite_h));
    m.col = static_cast<int>(uniform_int(rng, 0, canvas_w - sprite_w));
    m.d_row = velocity();
    m.d_col = velocity();
    return m;
}

VideoTensor gen_moving_digit(const GrayImage& sprite, const MotionSpec& motion) {
    if (sprite.px.empty()) {
        throw ConfigError("empty sprite");
    }
    const auto path = motion.trajectory(sprite.h, sprite.w);
    const Shape shape{motion.depth, motion.canvas_h, motion.canvas_w, 1};
    std::vector<std::uint8_t> data(shape.numel(), 0);
    for (std::uint32_t t = 0; t < motion.depth; ++t) {
        const auto [r0, c0] = path[t];
        std::uint8_t* frame = data.data() + t * shape.frame_numel();
        for (std::uint32_t y = 0; y < sprite.h; ++y) {
            for (std::uint32_t x = 0; x < sprite.w; ++x) {
                frame[(r0 + y) * motion.canvas_w + (c0 + x)] = sprite.at(y, x);
            }
        }
    }
    return VideoTensor::storage(shape, std::move(data));
}

VideoTensor colorize_clip(const VideoTensor& white_clip, const Rgb& color) {
    if (white_clip.shape().c != 1) {
        throw DataError("colorize_clip needs a single-channel clip");
    }
    const VideoTensor src = white_clip.space() == Space::Storage ? white_clip : to_storage_space(white_clip);
    auto in = src.bytes();
    Shape shape = src.shape();
    shape.c = 3;
    std::vector<std::uint8_t> out(shape.numel());
    const unsigned rgb[3] = {color.r, color.g, color.b};
    for (std::size_t i = 0; i < in.size(); ++i) {
        for (int ch = 0; ch < 3; ++ch) {
            out[3 * i + ch] = static_cast<std::uint8_t>((in[i] * rgb[ch] + 127) / 255);
        }
    }
    return VideoTensor::storage(shape, std::move(out));
}

Rgb hsv_to_rgb(double hue_deg, double s, double v) {
    const double h = std::fmod(std::fmod(hue_deg, 360.0) + 360.0, 360.0) / 60.0;
    const double c = v * s;
    const double x = c * (1.0 - std::abs(std::fmod(h, 2.0) - 1.0));
    const double m = v - c;
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
        case 0: r = c, g = x; break;
        case 1: r = x, g = c; break;
        case 2: g = c, b = x; break;
        case 3: g = x, b = c; break;
        case 4: r = x, b = c; break;
        default: r = c, b = x; break;
    }
    auto q = [&](double u) { return static_cast<std::uint8_t>(std::floor((u + m) * 255.0 + 0.5)); };
    return {q(r), q(g), q(b)};
}

std::vector<Rgb> make_palette(std::uint32_t n) {
    if (n < 1 || n > 256) {
        throw ConfigError("palette size must be in [1, 256], got " + std::to_string(n));
    }
    std::vector<Rgb> out;
    out.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        out.push_back(hsv_to_rgb(360.0 * i / n, 1.0, 1.0));
    }
    return out;
}

}  // namespace v2v::synth
