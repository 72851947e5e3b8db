#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "v2v/errors.hpp"
#include "v2v/synth.hpp"

namespace v2v::synth {

double GrayImage::mean() const {
    if (px.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (auto p : px) {
        s += p;
    }
    return s / static_cast<double>(px.size());
}

void DigitSource::validate() const {
    if (images.empty()) {
        throw DataError("digit source is empty");
    }
    if (images.size() != labels.size()) {
        throw DataError("digit source has " + std::to_string(images.size()) + " images but " +
                        std::to_string(labels.size()) + " labels");
    }
    for (const auto& img : images) {
        if (img.h != kDigitSize || img.w != kDigitSize || img.px.size() != kDigitSize * kDigitSize) {
            throw DataError("digit images must be 28x28");
        }
    }
}

namespace {

std::uint32_t be32(const std::vector<std::uint8_t>& b, std::size_t off) {
    return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
           std::uint32_t{b[off + 3]};
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) {
        throw DataError("cannot open " + p.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

DigitSource parse_digit_archive(const std::vector<std::uint8_t>& images, const std::vector<std::uint8_t>& labels) {
    if (images.size() < 16 || be32(images, 0) != 0x00000803u) {
        throw FormatError("image archive: bad IDX magic (expected 0x00000803)");
    }
    if (labels.size() < 8 || be32(labels, 0) != 0x00000801u) {
        throw FormatError("label archive: bad IDX magic (expected 0x00000801)");
    }
    const std::uint32_t n = be32(images, 4);
    const std::uint32_t rows = be32(images, 8);
    const std::uint32_t cols = be32(images, 12);
    const std::uint32_t n_labels = be32(labels, 4);
    if (rows != kDigitSize || cols != kDigitSize) {
        throw DataError("digit images must be 28x28, archive holds " + std::to_string(rows) + "x" +
                        std::to_string(cols));
    }
    if (n != n_labels) {
        throw DataError("archive holds " + std::to_string(n) + " images but " + std::to_string(n_labels) +
                        " labels");
    }
    const std::size_t px = std::size_t{rows} * cols;
    if (images.size() != 16 + px * n) {
        throw CorruptFileError("image archive payload is " + std::to_string(images.size() - 16) + " bytes, expected " +
                               std::to_string(px * n));
    }
    if (labels.size() != 8 + std::size_t{n}) {
        throw CorruptFileError("label archive payload is " + std::to_string(labels.size() - 8) + " bytes, expected " +
                               std::to_string(n));
    }
    DigitSource src;
    src.images.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        GrayImage img(rows, cols);
        std::copy_n(images.begin() + 16 + static_cast<std::ptrdiff_t>(i * px), px, img.px.begin());
        src.images.push_back(std::move(img));
    }
    src.labels.assign(labels.begin() + 8, labels.end());
    src.validate();
    return src;
}

DigitSource load_digit_archive(const std::filesystem::path& images_path, const std::filesystem::path& labels_path) {
    return parse_digit_archive(read_file(images_path), read_file(labels_path));
}

namespace {

struct Pt {
    double x;
    double y;
};
using Stroke = std::vector<Pt>;

Stroke ellipse(double cx, double cy, double rx, double ry, double a0 = 0.0, double a1 = 2 * std::numbers::pi,
               int n = 20) {
    Stroke s;
    for (int i = 0; i <= n; ++i) {
        const double a = a0 + (a1 - a0) * i / n;
        s.push_back({cx + rx * std::cos(a), cy + ry * std::sin(a)});
    }
    return s;
}

// Stroke templates in a unit box, x to the right and y downwards.
std::vector<Stroke> glyph(int digit) {
    switch (digit) {
        case 0:
            return {ellipse(0.5, 0.5, 0.42, 0.5)};
        case 1:
            return {{{0.3, 0.2}, {0.55, 0.0}, {0.55, 1.0}}};
        case 2:
            return {{{0.1, 0.25}, {0.25, 0.05}, {0.5, 0.0}, {0.75, 0.05}, {0.9, 0.25}, {0.85, 0.45}, {0.1, 1.0},
                     {0.95, 1.0}}};
        case 3:
            return {{{0.1, 0.1}, {0.4, 0.0}, {0.8, 0.05}, {0.9, 0.25}, {0.7, 0.45}, {0.4, 0.5}},
                    {{0.4, 0.5}, {0.75, 0.55}, {0.92, 0.75}, {0.8, 0.95}, {0.5, 1.0}, {0.1, 0.9}}};
        case 4:
            return {{{0.72, 1.0}, {0.72, 0.0}, {0.05, 0.68}, {0.95, 0.68}}};
        case 5:
            return {{{0.9, 0.0}, {0.2, 0.0}, {0.15, 0.45}, {0.55, 0.4}, {0.85, 0.55}, {0.9, 0.8}, {0.6, 1.0},
                     {0.1, 0.9}}};
        case 6:
            return {{{0.8, 0.05}, {0.45, 0.1}, {0.18, 0.45}, {0.15, 0.8}, {0.4, 1.0}, {0.75, 0.95}, {0.88, 0.75},
                     {0.7, 0.55}, {0.35, 0.55}, {0.15, 0.72}}};
        case 7:
            return {{{0.05, 0.0}, {0.95, 0.0}, {0.4, 1.0}}};
        case 8:
            return {ellipse(0.5, 0.25, 0.33, 0.25), ellipse(0.5, 0.72, 0.4, 0.28)};
        case 9: {
            Stroke loop = ellipse(0.48, 0.3, 0.36, 0.3);
            return {loop, {{0.84, 0.3}, {0.75, 1.0}}};
        }
        default:
            break;
    }
    throw ConfigError("digit must be in 0..9");
}

double segment_distance(Pt p, Pt a, Pt b) {
    const double vx = b.x - a.x, vy = b.y - a.y;
    const double len2 = vx * vx + vy * vy;
    double t = len2 > 0 ? ((p.x - a.x) * vx + (p.y - a.y) * vy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const double dx = p.x - (a.x + t * vx), dy = p.y - (a.y + t * vy);
    return std::sqrt(dx * dx + dy * dy);
}

double jitter(Rng& rng, double amplitude) {
    return (2.0 * uniform01(rng) - 1.0) * amplitude;
}

GrayImage render_digit(int digit, Rng& rng, const GlyphStyle& style) {
    const double stroke = style.min_stroke + uniform01(rng) * (style.max_stroke - style.min_stroke);
    const double angle = jitter(rng, style.max_rotation_deg) * std::numbers::pi / 180.0;
    const double shear = jitter(rng, 0.15);
    const double sx = 12.0 * (1.0 + jitter(rng, 0.1));
    const double sy = 19.0 * (1.0 + jitter(rng, 0.08));
    const double tx = 14.0 + jitter(rng, style.max_shift);
    const double ty = 14.0 + jitter(rng, style.max_shift);
    const double ca = std::cos(angle), sa = std::sin(angle);

    std::vector<std::pair<Pt, Pt>> segments;
    for (const auto& s : glyph(digit)) {
        std::vector<Pt> mapped;
        for (const auto& p : s) {
            const double u = (p.x - 0.5) * sx + shear * (p.y - 0.5) * sy;
            const double v = (p.y - 0.5) * sy;
            mapped.push_back({tx + ca * u - sa * v, ty + sa * u + ca * v});
        }
        for (std::size_t i = 1; i < mapped.size(); ++i) {
            segments.emplace_back(mapped[i - 1], mapped[i]);
        }
    }

    GrayImage img(kDigitSize, kDigitSize);
    for (std::uint32_t y = 0; y < kDigitSize; ++y) {
        for (std::uint32_t x = 0; x < kDigitSize; ++x) {
            const Pt p{x + 0.5, y + 0.5};
            double dist = 1e9;
            for (const auto& [a, b] : segments) {
                dist = std::min(dist, segment_distance(p, a, b));
            }
            // Anti-aliased edge one pixel wide.
            const double cover = std::clamp(stroke / 2.0 + 0.5 - dist, 0.0, 1.0);
            img.at(y, x) = static_cast<std::uint8_t>(std::lround(255.0 * cover));
        }
    }
    return img;
}

}  // namespace

DigitSource synthetic_digits(std::size_t count, std::uint64_t seed, const GlyphStyle& style) {
    if (count == 0) {
        throw ConfigError("synthetic digit count must be positive");
    }
    DigitSource src;
    src.images.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng(derive_seed(seed, i, 0xd191));
        const int label = static_cast<int>(i % 10);
        src.images.push_back(render_digit(label, rng, style));
        src.labels.push_back(static_cast<std::uint8_t>(label));
    }
    return src;
}

}  // namespace v2v::synth
