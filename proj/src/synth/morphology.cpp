#include <algorithm>

#include "v2v/errors.hpp"
#include "v2v/synth.hpp"

namespace v2v::synth {

std::vector<std::pair<int, int>> disk_offsets(std::uint32_t radius) {
    const int r = static_cast<int>(radius);
    std::vector<std::pair<int, int>> out;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            if (dy * dy + dx * dx <= r * r) {
                out.emplace_back(dy, dx);
            }
        }
    }
    return out;
}

GrayImage erode(const GrayImage& img, std::uint32_t radius) {
    if (radius == 0) {
        return img;
    }
    if (radius > std::min(img.h, img.w) / 2) {
        throw ConfigError("erosion radius " + std::to_string(radius) + " exceeds half the image size");
    }
    const auto disk = disk_offsets(radius);
    const int h = static_cast<int>(img.h), w = static_cast<int>(img.w);
    GrayImage out(img.h, img.w);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            std::uint8_t m = 255;
            for (const auto& [dy, dx] : disk) {
                const int yy = y + dy, xx = x + dx;
                if (yy < 0 || yy >= h || xx < 0 || xx >= w) {
                    m = 0;
                    break;
                }
                m = std::min(m, img.px[static_cast<std::size_t>(yy * w + xx)]);
                if (m == 0) {
                    break;
                }
            }
            out.px[static_cast<std::size_t>(y * w + x)] = m;
        }
    }
    return out;
}

}  // namespace v2v::synth
