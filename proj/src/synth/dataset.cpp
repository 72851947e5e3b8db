#include <cmath>
#include <cstdio>
#include <functional>
#include <thread>

#include "v2v/errors.hpp"
#include "v2v/synth.hpp"

namespace v2v::synth {

namespace fs = std::filesystem;

const char* to_string(DatasetKind k) {
    return k == DatasetKind::Volumetric ? "volumetric" : "moving_color";
}

DatasetKind parse_dataset_kind(const std::string& s) {
    if (s == "volumetric") {
        return DatasetKind::Volumetric;
    }
    if (s == "moving_color" || s == "moving-color") {
        return DatasetKind::MovingColor;
    }
    throw ConfigError("unknown dataset kind '" + s + "' (volumetric | moving-color)");
}

void SynthConfig::validate() const {
    if (clips_per_domain == 0) {
        throw ConfigError("clips_per_domain must be positive");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must lie in (0, 1)");
    }
    if (canvas < kDigitSize) {
        throw ConfigError("canvas must be at least 28 pixels");
    }
    if (kind == DatasetKind::Volumetric) {
        ErosionSchedule{ErosionMode::Spherical, depth, max_radius}.validate();
        if (max_radius > canvas / 2) {
            throw ConfigError("max_radius exceeds half the canvas");
        }
    } else {
        if (depth == 0) {
            throw ConfigError("depth must be positive");
        }
        make_palette(colors);
        if (max_speed < 1) {
            throw ConfigError("max_speed must be >= 1");
        }
    }
}

std::vector<Split> assign_splits(std::size_t n, double train_fraction, std::uint64_t seed) {
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) {
        order[i] = i;
    }
    Rng rng(seed);
    shuffle(order.begin(), order.end(), rng);
    const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n) + 0.5));
    std::vector<Split> out(n, Split::Test);
    for (std::size_t i = 0; i < n_train && i < n; ++i) {
        out[order[i]] = Split::Train;
    }
    return out;
}

namespace {

struct ClipJob {
    std::string id;
    std::size_t digit_index;
    Split split;
};

struct ClipResult {
    VideoTensor clip;
    std::optional<VideoTensor> gt;
    std::optional<Rgb> color;
};

void run_parallel(std::size_t n, unsigned jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(jobs);
    std::vector<std::jthread> workers;
    for (unsigned w = 0; w < jobs; ++w) {
        workers.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < n; i += jobs) {
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    workers.clear();
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::string clip_id(char domain, std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%c%05zu", domain, i);
    return buf;
}

}  // namespace

DatasetPair build_dataset(const SynthConfig& config, const DigitSource& digits, const fs::path& out_dir,
                          std::uint64_t seed, unsigned jobs) {
    config.validate();
    digits.validate();
    const std::size_t n = config.clips_per_domain;
    if (digits.size() < 2 * n) {
        throw DataError("need " + std::to_string(2 * n) + " source digits for " + std::to_string(n) +
                        " clips per domain, have " + std::to_string(digits.size()));
    }

    // Disjoint digit subsets per domain keep training pairs unaligned.
    std::vector<std::size_t> pick(digits.size());
    for (std::size_t i = 0; i < pick.size(); ++i) {
        pick[i] = i;
    }
    Rng pick_rng(derive_seed(seed, "digit-pick"));
    shuffle(pick.begin(), pick.end(), pick_rng);

    const auto palette = config.kind == DatasetKind::MovingColor ? make_palette(config.colors) : std::vector<Rgb>{};
    const std::uint32_t canvas = config.canvas;
    const std::uint32_t c_b = config.kind == DatasetKind::MovingColor ? 3 : 1;

    DatasetPair pair;
    for (int side = 0; side < 2; ++side) {
        const char letter = side == 0 ? 'A' : 'B';
        const fs::path dir = out_dir / std::string(1, letter);
        fs::create_directories(dir / "clips");

        const auto splits = assign_splits(n, config.train_fraction, derive_seed(seed, std::string("split-") + letter));
        std::vector<ClipJob> jobs_list;
        for (std::size_t i = 0; i < n; ++i) {
            jobs_list.push_back({clip_id(letter, i), pick[side * n + i], splits[i]});
        }

        std::vector<ClipResult> results(n);
        run_parallel(n, jobs, [&](std::size_t i) {
            const ClipJob& job = jobs_list[i];
            Rng rng(derive_seed(seed, job.id));
            const GrayImage& digit = digits.images[job.digit_index];
            ClipResult r;
            if (config.kind == DatasetKind::Volumetric) {
                const ErosionMode own = side == 0 ? ErosionMode::Spherical : ErosionMode::Sandglass;
                const ErosionMode other = side == 0 ? ErosionMode::Sandglass : ErosionMode::Spherical;
                r.clip = gen_volumetric(digit, {own, config.depth, config.max_radius}, canvas);
                if (job.split == Split::Test) {
                    r.gt = gen_volumetric(digit, {other, config.depth, config.max_radius}, canvas);
                }
            } else {
                const GrayImage sprite = ink_crop(digit);
                const MotionSpec motion =
                    sample_motion(rng, canvas, canvas, sprite.h, sprite.w, config.depth, config.max_speed);
                const VideoTensor white = gen_moving_digit(sprite, motion);
                const Rgb color = palette[uniform_below(rng, palette.size())];
                if (side == 0) {
                    r.clip = white;
                    if (job.split == Split::Test) {
                        r.gt = colorize_clip(white, color);
                        r.color = color;
                    }
                } else {
                    r.clip = colorize_clip(white, color);
                    r.color = color;
                    if (job.split == Split::Test) {
                        r.gt = white;
                    }
                }
            }
            save_clip(r.clip, dir / "clips" / (job.id + ".vvt"));
            if (r.gt) {
                save_clip(*r.gt, dir / "gt" / (job.id + ".vvt"));
            }
            results[i] = std::move(r);
        });

        DatasetManifest m;
        m.domain_name = config.kind == DatasetKind::Volumetric
                            ? std::string(side == 0 ? "spherical" : "sandglass")
                            : std::string(side == 0 ? "white" : "color");
        m.kind = to_string(config.kind);
        m.rng_seed = seed;
        m.shape = {config.depth, canvas, canvas, side == 0 ? 1u : c_b};
        m.palette = palette;
        m.root = dir;
        for (std::size_t i = 0; i < n; ++i) {
            ClipEntry e;
            e.id = jobs_list[i].id;
            e.path = "clips/" + e.id + ".vvt";
            e.shape = results[i].clip.shape();
            e.split = jobs_list[i].split;
            e.label = digits.labels[jobs_list[i].digit_index];
            e.color = results[i].color;
            if (results[i].gt) {
                e.gt_path = "gt/" + e.id + ".vvt";
            }
            m.clips.push_back(std::move(e));
        }
        validate_manifest(m, true);
        save_manifest(m, dir / "manifest.json");
        (side == 0 ? pair.a : pair.b) = std::move(m);
        (side == 0 ? pair.manifest_a : pair.manifest_b) = dir / "manifest.json";
    }
    return pair;
}

}  // namespace v2v::synth
