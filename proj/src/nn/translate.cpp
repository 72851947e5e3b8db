#include "v2v/errors.hpp"
#include "v2v/training.hpp"

namespace v2v::train {

namespace fs = std::filesystem;

const char* to_string(Direction d) {
    return d == Direction::AToB ? "a2b" : "b2a";
}

Direction parse_direction(const std::string& s) {
    if (s == "a2b" || s == "AtoB" || s == "A->B" || s == "ab") {
        return Direction::AToB;
    }
    if (s == "b2a" || s == "BtoA" || s == "B->A" || s == "ba") {
        return Direction::BToA;
    }
    throw ConfigError("unknown direction '" + s + "' (a2b | b2a)");
}

std::vector<WindowPlacement> plan_windows(std::uint32_t total, std::uint32_t window) {
    if (window == 0) {
        throw ConfigError("window depth must be positive");
    }
    if (total < window) {
        throw DataError("clip has " + std::to_string(total) + " frames, fewer than the model depth " +
                        std::to_string(window));
    }
    const std::uint32_t n = (total + window - 1) / window;
    std::vector<WindowPlacement> out;
    for (std::uint32_t k = 0; k + 1 < n; ++k) {
        const std::uint32_t start = k * window;
        out.push_back({start, start, std::min(start + window, total - window)});
    }
    out.push_back({total - window, total - window, total});
    return out;
}

Translator Translator::load(const fs::path& checkpoint) {
    Translator t;
    t.meta_ = read_checkpoint_meta(checkpoint);
    if (!fs::exists(checkpoint)) {
        throw DataError("missing checkpoint blob " + checkpoint.string());
    }
    t.g_ab_ = nn::build_generator(t.meta_.setup.generator_ab());
    t.g_ba_ = nn::build_generator(t.meta_.setup.generator_ba());
    try {
        torch::serialize::InputArchive root;
        root.load_from(checkpoint.string());
        torch::serialize::InputArchive sub_ab, sub_ba;
        root.read("G_AB", sub_ab);
        root.read("G_BA", sub_ba);
        t.g_ab_.load_from(sub_ab);
        t.g_ba_.load_from(sub_ba);
    } catch (const c10::Error& e) {
        throw CorruptFileError("cannot load checkpoint " + checkpoint.string() + ": " + e.what_without_backtrace());
    }
    t.g_ab_.train(false);
    t.g_ba_.train(false);
    return t;
}

VideoTensor Translator::translate(const VideoTensor& clip, Direction dir) const {
    const auto& setup = meta_.setup;
    const std::uint32_t want_c = dir == Direction::AToB ? setup.channels_a : setup.channels_b;
    if (clip.shape().c != want_c) {
        throw DataError("input has " + std::to_string(clip.shape().c) + " channels, model expects " +
                        std::to_string(want_c));
    }
    const nn::ModelHandle& g = dir == Direction::AToB ? g_ab_ : g_ba_;
    torch::NoGradGuard guard;
    const torch::Tensor frames = nn::frames_tensor(clip);  // [d, c, h, w]
    std::vector<torch::Tensor> out;

    if (rank() == nn::Rank::Two) {
        for (std::int64_t t = 0; t < frames.size(0); ++t) {
            out.push_back(g.forward(frames[t].unsqueeze(0)).squeeze(0));
        }
    } else {
        const std::uint32_t depth = setup.strategy.depth;
        using torch::indexing::Slice;
        for (const auto& w : plan_windows(clip.shape().d, depth)) {
            const auto vol = frames.index({Slice(w.start, w.start + depth)}).permute({1, 0, 2, 3}).unsqueeze(0);
            const auto res = g.forward(vol.contiguous()).squeeze(0).permute({1, 0, 2, 3});  // [depth, c, h, w]
            for (std::uint32_t t = w.keep_from; t < w.keep_to; ++t) {
                out.push_back(res[t - w.start]);
            }
        }
    }
    return to_storage_space(nn::from_frames_tensor(torch::stack(out)));
}

}  // namespace v2v::train
