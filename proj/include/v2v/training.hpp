#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "v2v/manifest.hpp"
#include "v2v/nn.hpp"
#include "v2v/rng.hpp"

namespace v2v::train {

enum class AdversarialForm { Log, LeastSquares };

const char* to_string(AdversarialForm f);
AdversarialForm parse_adversarial_form(const std::string& s);

/// The quantity the discriminator maximises, averaged over score maps.
///   Log:          E[log sigmoid(D(y))] + E[log(1 - sigmoid(D(G(x))))]
///   LeastSquares: -E[(D(y) - 1)^2] - E[D(G(x))^2]
torch::Tensor adversarial_loss(const torch::Tensor& real_scores, const torch::Tensor& fake_scores,
                               AdversarialForm form);

/// What the generator minimises: mean (D - 1)^2, or -log sigmoid(D).
torch::Tensor generator_adversarial_loss(const torch::Tensor& fake_scores, AdversarialForm form);

/// mean |F(G(x)) - x| + mean |G(F(y)) - y|.
torch::Tensor cycle_loss(const torch::Tensor& x, const torch::Tensor& x_cycled, const torch::Tensor& y,
                         const torch::Tensor& y_cycled);

/// Squared differences of consecutive frames of an [m, c, h, w] sequence.
/// Normalised: divided by (m - 1) * h * w * c. Otherwise the per-pixel
/// channel mean is summed over pixels and frame pairs.
torch::Tensor const_loss(const torch::Tensor& frames, bool normalized = true);

struct ObjectiveTerms {
    double gan_ab = 0.0;  // adversarial_loss for G: A -> B against D_B
    double gan_ba = 0.0;  // adversarial_loss for F: B -> A against D_A
    double cycle = 0.0;
    std::optional<double> constancy;
};

/// gan_ab + gan_ba + gamma * cycle (+ lambda * constancy when present).
double total_objective(const ObjectiveTerms& t, double gamma, double lambda);

enum class StrategyKind { RandomFrames, SequentialFrames, SequentialConst, Volumetric3D };

const char* to_string(StrategyKind k);
StrategyKind parse_strategy(const std::string& s);

struct BatchStrategy {
    StrategyKind kind = StrategyKind::Volumetric3D;
    std::uint32_t frames = 8;  // m for the framewise strategies
    std::uint32_t depth = 8;   // window length for the 3D strategy

    bool is_3d() const noexcept { return kind == StrategyKind::Volumetric3D; }
    bool uses_const() const noexcept { return kind == StrategyKind::SequentialConst; }
    std::uint32_t length() const noexcept { return is_3d() ? depth : frames; }
    void validate() const;
};

struct FrameRef {
    std::uint32_t clip = 0;
    std::uint32_t frame = 0;

    friend bool operator==(const FrameRef&, const FrameRef&) = default;
};

/// One unpaired step: frames drawn from each domain independently.
struct BatchSpec {
    std::vector<FrameRef> a;
    std::vector<FrameRef> b;

    friend bool operator==(const BatchSpec&, const BatchSpec&) = default;
};

/// Deterministic batch schedule: batch(epoch, step) depends only on the seed,
/// the strategy and the per-domain clip depths.
class BatchSampler {
public:
    BatchSampler(std::vector<std::uint32_t> depths_a, std::vector<std::uint32_t> depths_b, BatchStrategy strategy,
                 std::uint64_t seed);

    BatchSpec batch(std::uint64_t epoch, std::uint64_t step) const;
    const BatchStrategy& strategy() const noexcept { return strategy_; }

private:
    std::vector<FrameRef> draw(const std::vector<std::uint32_t>& depths, const std::vector<std::uint64_t>& offsets,
                               Rng& rng) const;

    std::vector<std::uint32_t> depths_a_, depths_b_;
    std::vector<std::uint64_t> offsets_a_, offsets_b_;  // prefix sums of depths
    BatchStrategy strategy_;
    std::uint64_t seed_;
};

std::vector<BatchSpec> make_batches(const BatchSampler& sampler, std::uint64_t epoch, std::uint64_t count);

/// History of generated samples. Until full every query returns the fresh
/// sample; afterwards each sample is swapped with a random stored one with
/// probability 0.5. Capacity 0 disables the pool.
class ImagePool {
public:
    explicit ImagePool(std::size_t capacity = 50) : capacity_(capacity) {}

    /// `batch` is [n, ...]; samples are pooled along dim 0.
    torch::Tensor query(const torch::Tensor& batch, Rng& rng);

    std::size_t size() const noexcept { return items_.size(); }
    std::size_t capacity() const noexcept { return capacity_; }
    const std::deque<torch::Tensor>& items() const noexcept { return items_; }
    void restore(std::vector<torch::Tensor> items);

private:
    std::size_t capacity_;
    std::deque<torch::Tensor> items_;
};

struct TrainConfig {
    double gamma = 10.0;
    double lambda_const = 1.0;
    bool const_unnormalized = false;
    AdversarialForm form = AdversarialForm::LeastSquares;
    double learning_rate = 2e-4;
    double beta1 = 0.5;
    double beta2 = 0.999;
    std::int64_t steps = 1000;
    std::size_t pool_size = 50;
    std::uint64_t seed = 0;
    std::int64_t checkpoint_every = 0;  // 0: final checkpoint only
    std::int64_t log_every = 1;

    void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// Everything needed to build a trainer; serialised into checkpoint sidecars.
struct TrainSetup {
    TrainConfig train;
    BatchStrategy strategy;
    nn::GeneratorConfig generator;      // in/out channels are set per direction
    nn::DiscriminatorConfig discriminator;
    std::uint32_t channels_a = 1;
    std::uint32_t channels_b = 1;

    nn::GeneratorConfig generator_ab() const;
    nn::GeneratorConfig generator_ba() const;
    nn::DiscriminatorConfig discriminator_a() const;
    nn::DiscriminatorConfig discriminator_b() const;
    void validate() const;
};

nlohmann::json to_json(const TrainSetup& s);
TrainSetup train_setup_from_json(const nlohmann::json& j);

struct LossReport {
    std::int64_t step = 0;
    double gen_adv_ab = 0.0;  // generator surrogate losses
    double gen_adv_ba = 0.0;
    ObjectiveTerms terms;
    double d_a = 0.0;  // discriminator losses (negated adversarial_loss)
    double d_b = 0.0;
    double objective = 0.0;
    double wall_seconds = 0.0;
    BatchSpec batch;

    nlohmann::json to_json() const;
};

/// In-memory training clips of one domain, model space, [d, c, h, w] each.
struct DomainData {
    std::vector<std::string> ids;
    std::vector<torch::Tensor> clips;
    std::uint32_t channels = 0;

    std::vector<std::uint32_t> depths() const;
};

DomainData load_domain(const DatasetManifest& m, Split split = Split::Train);

/// Four networks, their optimisers and pools, stepped in lockstep.
class CycleTrainer {
public:
    CycleTrainer(TrainSetup setup, DomainData a, DomainData b);

    const TrainSetup& setup() const noexcept { return setup_; }
    std::int64_t step() const noexcept { return step_; }
    std::uint64_t init_checksum() const noexcept { return init_checksum_; }

    /// Runs step() + 1 and returns its losses. Throws NumericError on a
    /// non-finite loss.
    LossReport advance();

    nn::ModelHandle& g_ab() noexcept { return g_ab_; }
    nn::ModelHandle& g_ba() noexcept { return g_ba_; }
    nn::ModelHandle& d_a() noexcept { return d_a_; }
    nn::ModelHandle& d_b() noexcept { return d_b_; }

    /// Writes <path> (tensor archive) and <path>.meta.json atomically.
    void save_checkpoint(const std::filesystem::path& path) const;
    /// Restores state saved by save_checkpoint into this trainer.
    void load_checkpoint(const std::filesystem::path& path);

    /// Clip tensors for a batch, shaped for the networks.
    std::pair<torch::Tensor, torch::Tensor> assemble(const BatchSpec& spec) const;

private:
    TrainSetup setup_;
    DomainData a_, b_;
    BatchSampler sampler_;
    nn::ModelHandle g_ab_, g_ba_, d_a_, d_b_;
    std::unique_ptr<torch::optim::Adam> opt_g_, opt_d_a_, opt_d_b_;
    ImagePool pool_a_, pool_b_;
    Rng pool_rng_;
    std::int64_t step_ = 0;
    std::uint64_t init_checksum_ = 0;
};

struct CheckpointMeta {
    TrainSetup setup;
    std::int64_t step = 0;
    std::vector<std::string> train_ids_a;
    std::vector<std::string> train_ids_b;
    std::string domain_a;
    std::string domain_b;
    nlohmann::json raw;
};

CheckpointMeta read_checkpoint_meta(const std::filesystem::path& checkpoint);

struct TrainResult {
    std::filesystem::path final_checkpoint;
    std::vector<LossReport> reports;
    std::uint64_t init_checksum = 0;
};

using ProgressFn = std::function<void(const LossReport&)>;

/// Trains from scratch (or from `resume`) to setup.train.steps, writing
/// log.jsonl and checkpoints/ckpt_XXXXXX.pt under out_dir.
TrainResult train(const TrainSetup& setup, const DatasetManifest& a, const DatasetManifest& b,
                  const std::filesystem::path& out_dir, const std::optional<std::filesystem::path>& resume = {},
                  const ProgressFn& progress = {});

std::filesystem::path checkpoint_path(const std::filesystem::path& out_dir, std::int64_t step);

enum class Direction { AToB, BToA };

const char* to_string(Direction d);
Direction parse_direction(const std::string& s);

/// A placement of one network window over a longer clip: the window starts
/// at `start`, and output frames [keep_from, keep_to) are taken from it.
struct WindowPlacement {
    std::uint32_t start = 0;
    std::uint32_t keep_from = 0;
    std::uint32_t keep_to = 0;

    friend bool operator==(const WindowPlacement&, const WindowPlacement&) = default;
};

/// Non-overlapping windows of length `window`, the last one aligned to the
/// clip end; overlapping frames come from the later window.
std::vector<WindowPlacement> plan_windows(std::uint32_t total, std::uint32_t window);

/// Trained generators loaded from a checkpoint, ready for inference.
class Translator {
public:
    static Translator load(const std::filesystem::path& checkpoint);

    /// 2D: every frame independently. 3D: windows from plan_windows.
    /// Output is in storage space.
    VideoTensor translate(const VideoTensor& clip, Direction dir) const;

    const CheckpointMeta& meta() const noexcept { return meta_; }
    nn::Rank rank() const noexcept { return meta_.setup.generator.rank; }

private:
    CheckpointMeta meta_;
    nn::ModelHandle g_ab_, g_ba_;
};

}  // namespace v2v::train
