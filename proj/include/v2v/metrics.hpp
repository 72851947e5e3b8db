#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "v2v/manifest.hpp"
#include "v2v/rng.hpp"
#include "v2v/video.hpp"

namespace v2v::metrics {

/// d x h x w integer class labels over K classes.
struct SegmentationVideo {
    std::uint32_t d = 0;
    std::uint32_t h = 0;
    std::uint32_t w = 0;
    std::uint32_t classes = 0;
    std::vector<std::uint16_t> labels;

    SegmentationVideo() = default;
    SegmentationVideo(std::uint32_t d_, std::uint32_t h_, std::uint32_t w_, std::uint32_t k,
                      std::vector<std::uint16_t> l = {});

    std::size_t frame_size() const noexcept { return std::size_t{h} * w; }
    std::uint16_t at(std::uint32_t t, std::uint32_t y, std::uint32_t x) const {
        return labels[(std::size_t{t} * h + y) * w + x];
    }
    void validate() const;

    friend bool operator==(const SegmentationVideo&, const SegmentationVideo&) = default;
};

/// Row-stochastic K x K matrix; entry (i, j) is the probability that a pixel
/// of class i at frame t has class j at frame t + 1.
struct TransitionMatrix {
    std::uint32_t classes = 0;
    std::vector<double> p;  // row-major

    double at(std::uint32_t i, std::uint32_t j) const { return p[std::size_t{i} * classes + j]; }
};

/// Mean squared difference of foreground masks (max channel > threshold),
/// scaled by 100.
double shape_l2(const VideoTensor& reference, const VideoTensor& translated, int threshold = kBackgroundThreshold);

struct ColorStats {
    double intensity_mean = 0.0;
    double color_sigma = 0.0;
    std::uint32_t frames_used = 0;
};

/// Per frame, over pixels whose max channel exceeds bg_threshold: the mean
/// channel value and the population standard deviation of all their channel
/// values; both averaged over frames with any foreground.
ColorStats color_stats(const VideoTensor& clip, int bg_threshold = kBackgroundThreshold);

/// Standard deviation across frames of the mean foreground colour, averaged
/// over the three channels. Zero for a clip whose digit keeps one colour.
double temporal_color_sigma(const VideoTensor& clip, int bg_threshold = kBackgroundThreshold);

/// Root-mean-square difference over all elements, in storage units.
double volume_l2(const VideoTensor& a, const VideoTensor& b);

/// Nearest palette colour in squared RGB distance; ties go to the lower index.
SegmentationVideo rgb_to_labels(const VideoTensor& clip, const std::vector<Rgb>& palette);
VideoTensor labels_to_rgb(const SegmentationVideo& seg, const std::vector<Rgb>& palette);

/// Per-frame agreement fraction averaged over frames.
double pixel_accuracy(const SegmentationVideo& pred, const SegmentationVideo& gt);

TransitionMatrix transition_matrix(const SegmentationVideo& seg);

/// Frobenius norm of a - b.
double transition_distance(const TransitionMatrix& a, const TransitionMatrix& b);

/// `level` passes of a per-frame 3x3 majority filter; ties keep the centre.
SegmentationVideo denoise_labels(const SegmentationVideo& seg, std::uint32_t level);

}  // namespace v2v::metrics
