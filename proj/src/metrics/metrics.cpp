#include "v2v/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "v2v/errors.hpp"

namespace v2v::metrics {

SegmentationVideo::SegmentationVideo(std::uint32_t d_, std::uint32_t h_, std::uint32_t w_, std::uint32_t k,
                                     std::vector<std::uint16_t> l)
    : d(d_), h(h_), w(w_), classes(k), labels(std::move(l)) {
    if (labels.empty()) {
        labels.assign(std::size_t{d} * h * w, 0);
    }
    validate();
}

void SegmentationVideo::validate() const {
    if (d == 0 || h == 0 || w == 0) {
        throw DataError("segmentation video dimensions must be positive");
    }
    if (classes == 0) {
        throw DataError("segmentation video needs at least one class");
    }
    if (labels.size() != std::size_t{d} * h * w) {
        throw DataError("segmentation label count does not match d*h*w");
    }
    for (auto l : labels) {
        if (l >= classes) {
            throw DataError("label " + std::to_string(l) + " >= class count " + std::to_string(classes));
        }
    }
}

namespace {

void require_same_shape(const VideoTensor& a, const VideoTensor& b, const char* what) {
    if (a.shape() != b.shape()) {
        throw DataError(std::string(what) + ": shape mismatch " + to_string(a.shape()) + " vs " + to_string(b.shape()));
    }
}

VideoTensor as_storage(const VideoTensor& v) {
    return v.space() == Space::Storage ? v : to_storage_space(v);
}

std::vector<std::uint8_t> mask_of(const VideoTensor& v, int threshold) {
    const VideoTensor s = as_storage(v);
    const Shape& sh = s.shape();
    auto bytes = s.bytes();
    std::vector<std::uint8_t> mask(sh.numel() / sh.c);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        int m = 0;
        for (std::uint32_t ch = 0; ch < sh.c; ++ch) {
            m = std::max<int>(m, bytes[i * sh.c + ch]);
        }
        mask[i] = m > threshold ? 1 : 0;
    }
    return mask;
}

}  // namespace

double shape_l2(const VideoTensor& reference, const VideoTensor& translated, int threshold) {
    const Shape& a = reference.shape();
    const Shape& b = translated.shape();
    if (a.d != b.d || a.h != b.h || a.w != b.w) {
        throw DataError("shape_l2: spatial/temporal shape mismatch " + to_string(a) + " vs " + to_string(b));
    }
    const auto ma = mask_of(reference, threshold);
    const auto mb = mask_of(translated, threshold);
    std::size_t diff = 0;
    for (std::size_t i = 0; i < ma.size(); ++i) {
        diff += ma[i] != mb[i];
    }
    return 100.0 * static_cast<double>(diff) / static_cast<double>(ma.size());
}

ColorStats color_stats(const VideoTensor& clip, int bg_threshold) {
    if (clip.shape().c != 3) {
        throw DataError("color_stats needs a 3-channel clip");
    }
    const VideoTensor s = as_storage(clip);
    const Shape& sh = s.shape();
    auto bytes = s.bytes();
    ColorStats out;
    double mean_sum = 0.0, sigma_sum = 0.0;
    const std::size_t npix = std::size_t{sh.h} * sh.w;
    for (std::uint32_t t = 0; t < sh.d; ++t) {
        const std::uint8_t* f = bytes.data() + t * sh.frame_numel();
        double sum = 0.0, sum2 = 0.0;
        std::size_t count = 0;
        for (std::size_t p = 0; p < npix; ++p) {
            const std::uint8_t* px = f + 3 * p;
            if (std::max({px[0], px[1], px[2]}) > bg_threshold) {
                for (int ch = 0; ch < 3; ++ch) {
                    sum += px[ch];
                    sum2 += static_cast<double>(px[ch]) * px[ch];
                }
                count += 3;
            }
        }
        if (count == 0) {
            continue;
        }
        const double mu = sum / static_cast<double>(count);
        const double var = std::max(0.0, sum2 / static_cast<double>(count) - mu * mu);
        mean_sum += mu;
        sigma_sum += std::sqrt(var);
        ++out.frames_used;
    }
    if (out.frames_used == 0) {
        throw DataError("color_stats: clip has no foreground pixels");
    }
    out.intensity_mean = mean_sum / out.frames_used;
    out.color_sigma = sigma_sum / out.frames_used;
    return out;
}

double temporal_color_sigma(const VideoTensor& clip, int bg_threshold) {
    if (clip.shape().c != 3) {
        throw DataError("temporal_color_sigma needs a 3-channel clip");
    }
    const VideoTensor s = as_storage(clip);
    const Shape& sh = s.shape();
    auto bytes = s.bytes();
    const std::size_t npix = std::size_t{sh.h} * sh.w;
    std::vector<std::array<double, 3>> means;
    for (std::uint32_t t = 0; t < sh.d; ++t) {
        const std::uint8_t* f = bytes.data() + t * sh.frame_numel();
        std::array<double, 3> sum{};
        std::size_t count = 0;
        for (std::size_t p = 0; p < npix; ++p) {
            const std::uint8_t* px = f + 3 * p;
            if (std::max({px[0], px[1], px[2]}) > bg_threshold) {
                for (int ch = 0; ch < 3; ++ch) {
                    sum[ch] += px[ch];
                }
                ++count;
            }
        }
        if (count > 0) {
            for (auto& x : sum) {
                x /= static_cast<double>(count);
            }
            means.push_back(sum);
        }
    }
    if (means.empty()) {
        throw DataError("temporal_color_sigma: clip has no foreground pixels");
    }
    double total = 0.0;
    for (int ch = 0; ch < 3; ++ch) {
        double mu = 0.0;
        for (const auto& m : means) {
            mu += m[ch];
        }
        mu /= static_cast<double>(means.size());
        double var = 0.0;
        for (const auto& m : means) {
            var += (m[ch] - mu) * (m[ch] - mu);
        }
        total += std::sqrt(var / static_cast<double>(means.size()));
    }
    return total / 3.0;
}

double volume_l2(const VideoTensor& a, const VideoTensor& b) {
    require_same_shape(a, b, "volume_l2");
    const VideoTensor sa = as_storage(a), sb = as_storage(b);
    auto x = sa.bytes();
    auto y = sb.bytes();
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = static_cast<double>(x[i]) - static_cast<double>(y[i]);
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(x.size()));
}

SegmentationVideo rgb_to_labels(const VideoTensor& clip, const std::vector<Rgb>& palette) {
    if (palette.empty()) {
        throw DataError("rgb_to_labels: empty palette");
    }
    if (palette.size() > 65535) {
        throw DataError("rgb_to_labels: palette too large");
    }
    if (clip.shape().c != 3) {
        throw DataError("rgb_to_labels needs a 3-channel clip");
    }
    const VideoTensor s = as_storage(clip);
    const Shape& sh = s.shape();
    auto bytes = s.bytes();
    SegmentationVideo seg(sh.d, sh.h, sh.w, static_cast<std::uint32_t>(palette.size()));
    for (std::size_t i = 0; i < seg.labels.size(); ++i) {
        const std::uint8_t* px = bytes.data() + 3 * i;
        int best = 0;
        int best_d = std::numeric_limits<int>::max();
        for (std::size_t k = 0; k < palette.size(); ++k) {
            const int dr = px[0] - palette[k].r, dg = px[1] - palette[k].g, db = px[2] - palette[k].b;
            const int dist = dr * dr + dg * dg + db * db;
            if (dist < best_d) {
                best_d = dist;
                best = static_cast<int>(k);
            }
        }
        seg.labels[i] = static_cast<std::uint16_t>(best);
    }
    return seg;
}

VideoTensor labels_to_rgb(const SegmentationVideo& seg, const std::vector<Rgb>& palette) {
    if (palette.size() < seg.classes) {
        throw DataError("labels_to_rgb: palette smaller than class count");
    }
    std::vector<std::uint8_t> out(seg.labels.size() * 3);
    for (std::size_t i = 0; i < seg.labels.size(); ++i) {
        const Rgb& c = palette[seg.labels[i]];
        out[3 * i] = c.r;
        out[3 * i + 1] = c.g;
        out[3 * i + 2] = c.b;
    }
    return VideoTensor::storage({seg.d, seg.h, seg.w, 3}, std::move(out));
}

double pixel_accuracy(const SegmentationVideo& pred, const SegmentationVideo& gt) {
    if (pred.d != gt.d || pred.h != gt.h || pred.w != gt.w) {
        throw DataError("pixel_accuracy: shape mismatch");
    }
    if (pred.classes != gt.classes) {
        throw DataError("pixel_accuracy: class count mismatch");
    }
    const std::size_t fs = pred.frame_size();
    double acc = 0.0;
    for (std::uint32_t t = 0; t < pred.d; ++t) {
        std::size_t agree = 0;
        for (std::size_t i = t * fs; i < (t + 1) * fs; ++i) {
            agree += pred.labels[i] == gt.labels[i];
        }
        acc += static_cast<double>(agree) / static_cast<double>(fs);
    }
    return acc / pred.d;
}

TransitionMatrix transition_matrix(const SegmentationVideo& seg) {
    if (seg.d < 2) {
        throw DataError("transition_matrix needs at least 2 frames");
    }
    const std::uint32_t k = seg.classes;
    std::vector<std::uint64_t> counts(std::size_t{k} * k, 0);
    const std::size_t fs = seg.frame_size();
    for (std::uint32_t t = 0; t + 1 < seg.d; ++t) {
        const std::uint16_t* cur = seg.labels.data() + t * fs;
        const std::uint16_t* nxt = cur + fs;
        for (std::size_t i = 0; i < fs; ++i) {
            ++counts[std::size_t{cur[i]} * k + nxt[i]];
        }
    }
    TransitionMatrix m{k, std::vector<double>(std::size_t{k} * k, 0.0)};
    for (std::uint32_t i = 0; i < k; ++i) {
        std::uint64_t row = 0;
        for (std::uint32_t j = 0; j < k; ++j) {
            row += counts[std::size_t{i} * k + j];
        }
        if (row == 0) {
            m.p[std::size_t{i} * k + i] = 1.0;
            continue;
        }
        for (std::uint32_t j = 0; j < k; ++j) {
            m.p[std::size_t{i} * k + j] = static_cast<double>(counts[std::size_t{i} * k + j]) / static_cast<double>(row);
        }
    }
    return m;
}

double transition_distance(const TransitionMatrix& a, const TransitionMatrix& b) {
    if (a.classes != b.classes || a.p.size() != b.p.size()) {
        throw DataError("transition_distance: class count mismatch");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < a.p.size(); ++i) {
        const double d = a.p[i] - b.p[i];
        acc += d * d;
    }
    return std::sqrt(acc);
}

SegmentationVideo denoise_labels(const SegmentationVideo& seg, std::uint32_t level) {
    SegmentationVideo cur = seg;
    const int h = static_cast<int>(seg.h), w = static_cast<int>(seg.w);
    std::vector<std::uint32_t> votes(seg.classes, 0);
    for (std::uint32_t pass = 0; pass < level; ++pass) {
        SegmentationVideo next = cur;
        bool changed = false;
        for (std::uint32_t t = 0; t < seg.d; ++t) {
            const std::size_t base = t * seg.frame_size();
            for (int y = 0; y < h; ++y) {
                for (int x = 0; x < w; ++x) {
                    std::fill(votes.begin(), votes.end(), 0u);
                    for (int dy = -1; dy <= 1; ++dy) {
                        for (int dx = -1; dx <= 1; ++dx) {
                            const int yy = y + dy, xx = x + dx;
                            if (yy >= 0 && yy < h && xx >= 0 && xx < w) {
                                ++votes[cur.labels[base + static_cast<std::size_t>(yy * w + xx)]];
                            }
                        }
                    }
                    const std::size_t idx = base + static_cast<std::size_t>(y * w + x);
                    std::uint32_t best = 0;
                    std::uint16_t winner = cur.labels[idx];
                    bool tie = false;
                    for (std::uint32_t k = 0; k < seg.classes; ++k) {
                        if (votes[k] > best) {
                            best = votes[k];
                            winner = static_cast<std::uint16_t>(k);
                            tie = false;
                        } else if (votes[k] == best && best > 0) {
                            tie = true;
                        }
                    }
                    if (!tie && winner != cur.labels[idx]) {
                        next.labels[idx] = winner;
                        changed = true;
                    }
                }
            }
        }
        cur = std::move(next);
        if (!changed) {
            break;
        }
    }
    return cur;
}

}  // namespace v2v::metrics
