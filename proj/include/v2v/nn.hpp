#pragma once

#include <torch/torch.h>

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "v2v/video.hpp"

namespace v2v::nn {

enum class Rank { Two, Three };

const char* to_string(Rank r);
Rank parse_rank(const std::string& s);

enum class Upsampling { Transposed, ResizeConv };

/// ResNet-style translator: 7-wide stem, two stride-2 downsampling stages,
/// residual blocks, two stride-1/2 upsampling stages, 7-wide head and tanh.
struct GeneratorConfig {
    Rank rank = Rank::Three;
    int in_channels = 1;
    int out_channels = 1;
    int nf = 64;
    int n_res_blocks = 9;
    bool depth_downsample = false;  // 3D only: temporal stride 2 in the down/up stages
    Upsampling upsampling = Upsampling::Transposed;

    void validate() const;
    /// Throws ConfigError if a (d, h, w) input cannot pass through the network.
    void validate_input(std::int64_t d, std::int64_t h, std::int64_t w) const;

    friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

/// PatchGAN: stride-2 kernel-4 convolutions, instance norm after all but the
/// first, LeakyReLU(0.2), then a stride-1 stage and a 1-channel score map.
struct DiscriminatorConfig {
    Rank rank = Rank::Three;
    int in_channels = 1;
    int n_layers = 3;
    int nf = 64;
    bool depth_downsample = false;  // 3D only: temporal stride 2 in the strided layers

    void validate() const;

    friend bool operator==(const DiscriminatorConfig&, const DiscriminatorConfig&) = default;
};

nlohmann::json to_json(const GeneratorConfig& c);
nlohmann::json to_json(const DiscriminatorConfig& c);
GeneratorConfig generator_config_from_json(const nlohmann::json& j);
DiscriminatorConfig discriminator_config_from_json(const nlohmann::json& j);

/// A built network plus the recipe that produced it.
class ModelHandle {
public:
    enum class Kind { Generator, Discriminator };

    ModelHandle() = default;
    ModelHandle(Kind kind, nlohmann::json config, torch::nn::Sequential net);

    Kind kind() const noexcept { return kind_; }
    const nlohmann::json& config() const noexcept { return config_; }
    Rank rank() const;

    /// 2D networks take [N, C, H, W], 3D networks [N, C, D, H, W].
    torch::Tensor forward(const torch::Tensor& x) const;
    std::int64_t parameter_count() const;

    torch::nn::Sequential& net() noexcept { return net_; }
    const torch::nn::Sequential& net() const noexcept { return net_; }

    void train(bool on = true) { net_->train(on); }
    void to(torch::Dtype dtype) { net_->to(dtype); }

    /// Parameter blob at `path` plus `<path>.meta.json` sidecar.
    void save(const std::filesystem::path& path, std::int64_t step = 0) const;
    static ModelHandle restore(const std::filesystem::path& path);

    void save_to(torch::serialize::OutputArchive& archive) const;
    void load_from(torch::serialize::InputArchive& archive);

private:
    Kind kind_ = Kind::Generator;
    nlohmann::json config_;
    torch::nn::Sequential net_{nullptr};
};

ModelHandle build_generator(const GeneratorConfig& cfg);
ModelHandle build_discriminator(const DiscriminatorConfig& cfg);

/// Zero-mean Gaussian weights with standard deviation 0.02, zero biases,
/// drawn from a generator seeded with `seed`.
void init_weights(ModelHandle& m, std::uint64_t seed);

std::int64_t count_params(const ModelHandle& m);

/// Scalar learnable parameters implied by the recipe, without building it.
std::int64_t generator_param_count(const GeneratorConfig& cfg);
std::int64_t discriminator_param_count(const DiscriminatorConfig& cfg);

/// Patch-map spatial size after the discriminator for an input extent `n`
/// along a strided axis; <= 0 means the input is too small.
std::int64_t patch_extent(std::int64_t n, int n_layers, bool strided = true);
/// Receptive field of an n-layer PatchGAN along a strided axis.
std::int64_t patch_receptive_field(int n_layers);

struct ParityResult {
    GeneratorConfig config2d;
    std::int64_t count2d = 0;
    std::int64_t count3d = 0;
    double ratio = 1.0;  // count2d / count3d
};

/// 2D config whose width best matches the 3D parameter count (ties go to the
/// smaller width). Throws ConfigError if no width in [1, 1024] lands within 25%.
ParityResult calibrate_parity(const GeneratorConfig& cfg3d);

// VideoTensor <-> network layouts. Inputs are converted to model space.
torch::Tensor frames_tensor(const VideoTensor& v);  // [d, c, h, w]
torch::Tensor volume_tensor(const VideoTensor& v);  // [1, c, d, h, w]
VideoTensor from_frames_tensor(const torch::Tensor& t);  // [d, c, h, w] -> model space
VideoTensor from_volume_tensor(const torch::Tensor& t);  // [1, c, d, h, w] -> model space

/// Order-sensitive FNV-1a hash over every parameter's float bytes.
std::uint64_t parameter_checksum(const ModelHandle& m);

}  // namespace v2v::nn
