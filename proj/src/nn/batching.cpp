#include <algorithm>
#include <unordered_set>

#include "v2v/errors.hpp"
#include "v2v/training.hpp"

namespace v2v::train {

using nlohmann::json;

const char* to_string(StrategyKind k) {
    switch (k) {
        case StrategyKind::RandomFrames: return "random";
        case StrategyKind::SequentialFrames: return "sequential";
        case StrategyKind::SequentialConst: return "seq_const";
        case StrategyKind::Volumetric3D: return "3d";
    }
    return "?";
}

StrategyKind parse_strategy(const std::string& s) {
    if (s == "random" || s == "random_frames") {
        return StrategyKind::RandomFrames;
    }
    if (s == "sequential" || s == "seq" || s == "sequential_frames") {
        return StrategyKind::SequentialFrames;
    }
    if (s == "seq_const" || s == "seq-const" || s == "sequential_const") {
        return StrategyKind::SequentialConst;
    }
    if (s == "3d" || s == "3D" || s == "volumetric") {
        return StrategyKind::Volumetric3D;
    }
    throw ConfigError("unknown batch strategy '" + s + "' (random | sequential | seq_const | 3d)");
}

void BatchStrategy::validate() const {
    if (is_3d()) {
        if (depth < 1) {
            throw ConfigError("3D window depth must be positive");
        }
    } else if (frames < 1) {
        throw ConfigError("frames per batch must be positive");
    }
    if (uses_const() && frames < 2) {
        throw ConfigError("seq_const needs at least 2 frames per batch");
    }
}

BatchSampler::BatchSampler(std::vector<std::uint32_t> depths_a, std::vector<std::uint32_t> depths_b,
                           BatchStrategy strategy, std::uint64_t seed)
    : depths_a_(std::move(depths_a)), depths_b_(std::move(depths_b)), strategy_(strategy), seed_(seed) {
    strategy_.validate();
    for (auto* side : {&depths_a_, &depths_b_}) {
        if (side->empty()) {
            throw DataError("batch sampler needs at least one training clip per domain");
        }
    }
    auto prefix = [](const std::vector<std::uint32_t>& d) {
        std::vector<std::uint64_t> out{0};
        for (auto x : d) {
            out.push_back(out.back() + x);
        }
        return out;
    };
    offsets_a_ = prefix(depths_a_);
    offsets_b_ = prefix(depths_b_);
    const std::uint32_t len = strategy_.length();
    if (strategy_.kind == StrategyKind::RandomFrames) {
        for (const auto* off : {&offsets_a_, &offsets_b_}) {
            if (off->back() < len) {
                throw DataError("random batches of " + std::to_string(len) + " frames need at least that many frames, have " +
                                std::to_string(off->back()));
            }
        }
    } else {
        for (const auto* side : {&depths_a_, &depths_b_}) {
            for (auto d : *side) {
                if (d < len) {
                    throw DataError("clip with " + std::to_string(d) + " frames is shorter than the batch length " +
                                    std::to_string(len));
                }
            }
        }
    }
}

std::vector<FrameRef> BatchSampler::draw(const std::vector<std::uint32_t>& depths,
                                         const std::vector<std::uint64_t>& offsets, Rng& rng) const {
    const std::uint32_t len = strategy_.length();
    std::vector<FrameRef> out;
    out.reserve(len);
    if (strategy_.kind == StrategyKind::RandomFrames) {
        const std::uint64_t total = offsets.back();
        std::unordered_set<std::uint64_t> seen;
        while (out.size() < len) {
            const std::uint64_t g = uniform_below(rng, total);
            if (!seen.insert(g).second) {
                continue;
            }
            const auto it = std::upper_bound(offsets.begin(), offsets.end(), g);
            const auto clip = static_cast<std::uint32_t>(it - offsets.begin() - 1);
            out.push_back({clip, static_cast<std::uint32_t>(g - offsets[clip])});
        }
        return out;
    }
    const auto clip = static_cast<std::uint32_t>(uniform_below(rng, depths.size()));
    const auto start = static_cast<std::uint32_t>(uniform_below(rng, depths[clip] - len + 1));
    for (std::uint32_t i = 0; i < len; ++i) {
        out.push_back({clip, start + i});
    }
    return out;
}

BatchSpec BatchSampler::batch(std::uint64_t epoch, std::uint64_t step) const {
    Rng rng(derive_seed(seed_, epoch, step));
    BatchSpec spec;
    spec.a = draw(depths_a_, offsets_a_, rng);
    spec.b = draw(depths_b_, offsets_b_, rng);
    return spec;
}

std::vector<BatchSpec> make_batches(const BatchSampler& sampler, std::uint64_t epoch, std::uint64_t count) {
    std::vector<BatchSpec> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        out.push_back(sampler.batch(epoch, i));
    }
    return out;
}

torch::Tensor ImagePool::query(const torch::Tensor& batch, Rng& rng) {
    if (capacity_ == 0) {
        return batch;
    }
    std::vector<torch::Tensor> out;
    out.reserve(batch.size(0));
    for (std::int64_t i = 0; i < batch.size(0); ++i) {
        torch::Tensor s = batch[i].detach().clone();
        if (items_.size() < capacity_) {
            items_.push_back(s);
            out.push_back(s);
        } else if (uniform01(rng) < 0.5) {
            const auto j = uniform_below(rng, items_.size());
            out.push_back(items_[j]);
            items_.pop_front();
            items_.push_back(s);
        } else {
            out.push_back(s);
            items_.pop_front();
            items_.push_back(s);
        }
    }
    return torch::stack(out);
}

void ImagePool::restore(std::vector<torch::Tensor> items) {
    if (items.size() > capacity_) {
        throw DataError("image pool holds more samples than its capacity");
    }
    items_.assign(items.begin(), items.end());
}

void TrainConfig::validate() const {
    if (!(gamma > 0.0)) {
        throw ConfigError("gamma must be positive");
    }
    if (!(lambda_const >= 0.0)) {
        throw ConfigError("lambda_const must be non-negative");
    }
    if (steps < 1) {
        throw ConfigError("steps must be >= 1");
    }
    if (!(learning_rate > 0.0)) {
        throw ConfigError("learning_rate must be positive");
    }
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("Adam moments must lie in [0, 1)");
    }
    if (checkpoint_every < 0) {
        throw ConfigError("checkpoint_every must be >= 0");
    }
    if (log_every < 1) {
        throw ConfigError("log_every must be >= 1");
    }
}

json to_json(const TrainConfig& c) {
    return {{"gamma", c.gamma},
            {"lambda_const", c.lambda_const},
            {"const_unnormalized", c.const_unnormalized},
            {"adversarial_form", to_string(c.form)},
            {"learning_rate", c.learning_rate},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"steps", c.steps},
            {"pool_size", c.pool_size},
            {"seed", c.seed},
            {"checkpoint_every", c.checkpoint_every},
            {"log_every", c.log_every}};
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const char* where) {
    if (!j.is_object()) {
        throw ConfigError(std::string(where) + " must be an object");
    }
    for (const auto& item : j.items()) {
        if (std::find_if(known.begin(), known.end(), [&](const char* k) { return item.key() == k; }) ==
            known.end()) {
            throw ConfigError(std::string("unknown ") + where + " field '" + item.key() + "'");
        }
    }
}

}  // namespace

TrainConfig train_config_from_json(const json& j) {
    reject_unknown(j,
                   {"gamma", "lambda_const", "const_unnormalized", "adversarial_form", "learning_rate", "beta1",
                    "beta2", "steps", "pool_size", "seed", "checkpoint_every", "log_every"},
                   "train");
    try {
        TrainConfig c;
        c.gamma = j.value("gamma", c.gamma);
        c.lambda_const = j.value("lambda_const", c.lambda_const);
        c.const_unnormalized = j.value("const_unnormalized", c.const_unnormalized);
        c.form = parse_adversarial_form(j.value("adversarial_form", std::string(to_string(c.form))));
        c.learning_rate = j.value("learning_rate", c.learning_rate);
        c.beta1 = j.value("beta1", c.beta1);
        c.beta2 = j.value("beta2", c.beta2);
        c.steps = j.value("steps", c.steps);
        c.pool_size = j.value("pool_size", c.pool_size);
        c.seed = j.value("seed", c.seed);
        c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
        c.log_every = j.value("log_every", c.log_every);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad train config: ") + e.what());
    }
}

nn::GeneratorConfig TrainSetup::generator_ab() const {
    nn::GeneratorConfig g = generator;
    g.in_channels = static_cast<int>(channels_a);
    g.out_channels = static_cast<int>(channels_b);
    return g;
}

nn::GeneratorConfig TrainSetup::generator_ba() const {
    nn::GeneratorConfig g = generator;
    g.in_channels = static_cast<int>(channels_b);
    g.out_channels = static_cast<int>(channels_a);
    return g;
}

nn::DiscriminatorConfig TrainSetup::discriminator_a() const {
    nn::DiscriminatorConfig d = discriminator;
    d.in_channels = static_cast<int>(channels_a);
    return d;
}

nn::DiscriminatorConfig TrainSetup::discriminator_b() const {
    nn::DiscriminatorConfig d = discriminator;
    d.in_channels = static_cast<int>(channels_b);
    return d;
}

void TrainSetup::validate() const {
    train.validate();
    strategy.validate();
    generator_ab().validate();
    discriminator_a().validate();
    if (channels_a < 1 || channels_b < 1) {
        throw ConfigError("domain channel counts must be positive");
    }
    const bool rank3 = generator.rank == nn::Rank::Three;
    if (strategy.is_3d() != rank3) {
        throw ConfigError(std::string("strategy '") + to_string(strategy.kind) + "' does not match a " +
                          nn::to_string(generator.rank) + " generator");
    }
    if (discriminator.rank != generator.rank) {
        throw ConfigError("generator and discriminator ranks differ");
    }
}

json to_json(const TrainSetup& s) {
    return {{"train", to_json(s.train)},
            {"strategy", {{"kind", to_string(s.strategy.kind)}, {"frames", s.strategy.frames}, {"depth", s.strategy.depth}}},
            {"generator", nn::to_json(s.generator)},
            {"discriminator", nn::to_json(s.discriminator)},
            {"channels_a", s.channels_a},
            {"channels_b", s.channels_b}};
}

TrainSetup train_setup_from_json(const json& j) {
    reject_unknown(j, {"train", "strategy", "generator", "discriminator", "channels_a", "channels_b"}, "setup");
    try {
        TrainSetup s;
        if (j.contains("train")) {
            s.train = train_config_from_json(j.at("train"));
        }
        if (j.contains("strategy")) {
            const json& st = j.at("strategy");
            reject_unknown(st, {"kind", "frames", "depth"}, "strategy");
            s.strategy.kind = parse_strategy(st.value("kind", std::string(to_string(s.strategy.kind))));
            s.strategy.frames = st.value("frames", s.strategy.frames);
            s.strategy.depth = st.value("depth", s.strategy.depth);
        }
        if (j.contains("generator")) {
            reject_unknown(j.at("generator"),
                           {"rank", "in_channels", "out_channels", "nf", "n_res_blocks", "depth_downsample",
                            "upsampling"},
                           "generator");
            s.generator = nn::generator_config_from_json(j.at("generator"));
        }
        if (j.contains("discriminator")) {
            reject_unknown(j.at("discriminator"), {"rank", "in_channels", "n_layers", "nf", "depth_downsample"},
                           "discriminator");
            s.discriminator = nn::discriminator_config_from_json(j.at("discriminator"));
        }
        s.channels_a = j.value("channels_a", s.channels_a);
        s.channels_b = j.value("channels_b", s.channels_b);
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad training setup: ") + e.what());
    }
}

}  // namespace v2v::train
