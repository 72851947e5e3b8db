#include <ATen/CPUGeneratorImpl.h>

#include <array>
#include <cmath>
#include <fstream>

#include "v2v/errors.hpp"
#include "v2v/nn.hpp"
#include "v2v/rng.hpp"

namespace v2v::nn {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(Rank r) {
    return r == Rank::Two ? "2d" : "3d";
}

Rank parse_rank(const std::string& s) {
    if (s == "2d" || s == "2D" || s == "2") {
        return Rank::Two;
    }
    if (s == "3d" || s == "3D" || s == "3") {
        return Rank::Three;
    }
    throw ConfigError("unknown rank '" + s + "' (2d | 3d)");
}

namespace {

const char* upsampling_name(Upsampling u) {
    return u == Upsampling::Transposed ? "transposed" : "resize_conv";
}

Upsampling parse_upsampling(const std::string& s) {
    if (s == "transposed") {
        return Upsampling::Transposed;
    }
    if (s == "resize_conv" || s == "resize-conv") {
        return Upsampling::ResizeConv;
    }
    throw ConfigError("unknown upsampling '" + s + "' (transposed | resize_conv)");
}

std::int64_t kvol(Rank r, std::int64_t k) {
    return r == Rank::Two ? k * k : k * k * k;
}

using Triple = std::array<std::int64_t, 3>;  // (t, y, x); 2D uses the last two

torch::ExpandingArray<2> e2(const Triple& v) {
    return torch::ExpandingArray<2>({v[1], v[2]});
}

torch::ExpandingArray<3> e3(const Triple& v) {
    return torch::ExpandingArray<3>({v[0], v[1], v[2]});
}

void add_conv(torch::nn::Sequential& seq, Rank r, std::int64_t in, std::int64_t out, Triple k, Triple stride,
              Triple pad) {
    if (r == Rank::Two) {
        seq->push_back(torch::nn::Conv2d(
            torch::nn::Conv2dOptions(in, out, e2(k)).stride(e2(stride)).padding(e2(pad)).bias(true)));
    } else {
        seq->push_back(torch::nn::Conv3d(
            torch::nn::Conv3dOptions(in, out, e3(k)).stride(e3(stride)).padding(e3(pad)).bias(true)));
    }
}

void add_conv_transpose(torch::nn::Sequential& seq, Rank r, std::int64_t in, std::int64_t out, Triple stride) {
    const Triple k{3, 3, 3}, pad{1, 1, 1};
    const Triple out_pad{stride[0] - 1, stride[1] - 1, stride[2] - 1};
    if (r == Rank::Two) {
        seq->push_back(torch::nn::ConvTranspose2d(torch::nn::ConvTranspose2dOptions(in, out, e2(k))
                                                      .stride(e2(stride))
                                                      .padding(e2(pad))
                                                      .output_padding(e2(out_pad))));
    } else {
        seq->push_back(torch::nn::ConvTranspose3d(torch::nn::ConvTranspose3dOptions(in, out, e3(k))
                                                      .stride(e3(stride))
                                                      .padding(e3(pad))
                                                      .output_padding(e3(out_pad))));
    }
}

void add_reflect(torch::nn::Sequential& seq, Rank r, std::int64_t p) {
    if (r == Rank::Two) {
        seq->push_back(torch::nn::ReflectionPad2d(p));
    } else {
        seq->push_back(torch::nn::ReflectionPad3d(p));
    }
}

void add_norm(torch::nn::Sequential& seq, Rank r, std::int64_t ch) {
    if (r == Rank::Two) {
        seq->push_back(torch::nn::InstanceNorm2d(torch::nn::InstanceNorm2dOptions(ch)));
    } else {
        seq->push_back(torch::nn::InstanceNorm3d(torch::nn::InstanceNorm3dOptions(ch)));
    }
}

class ResBlockImpl : public torch::nn::Module {
public:
    ResBlockImpl(Rank r, std::int64_t ch) {
        torch::nn::Sequential b;
        add_reflect(b, r, 1);
        add_conv(b, r, ch, ch, {3, 3, 3}, {1, 1, 1}, {0, 0, 0});
        add_norm(b, r, ch);
        b->push_back(torch::nn::ReLU());
        add_reflect(b, r, 1);
        add_conv(b, r, ch, ch, {3, 3, 3}, {1, 1, 1}, {0, 0, 0});
        add_norm(b, r, ch);
        body_ = register_module("body", b);
    }

    torch::Tensor forward(const torch::Tensor& x) { return x + body_->forward(x); }

private:
    torch::nn::Sequential body_{nullptr};
};
TORCH_MODULE(ResBlock);

std::int64_t temporal_stride(Rank r, bool depth_downsample) {
    return r == Rank::Three && depth_downsample ? 2 : 1;
}

}  // namespace

void GeneratorConfig::validate() const {
    if (in_channels < 1 || out_channels < 1) {
        throw ConfigError("generator channel counts must be positive");
    }
    if (nf < 1) {
        throw ConfigError("generator width nf must be positive");
    }
    if (n_res_blocks < 0) {
        throw ConfigError("n_res_blocks must be >= 0");
    }
    if (rank == Rank::Two && depth_downsample) {
        throw ConfigError("depth_downsample applies to 3D generators only");
    }
}

void GeneratorConfig::validate_input(std::int64_t d, std::int64_t h, std::int64_t w) const {
    validate();
    auto check = [](std::int64_t n, const char* axis) {
        if (n % 4 != 0 || n < 8) {
            throw ConfigError(std::string("generator input ") + axis + "=" + std::to_string(n) +
                              " must be a multiple of 4 and at least 8");
        }
    };
    check(h, "height");
    check(w, "width");
    if (rank == Rank::Three) {
        if (depth_downsample) {
            check(d, "depth");
        } else if (d < 4) {
            throw ConfigError("3D generator input depth must be at least 4, got " + std::to_string(d));
        }
    }
}

void DiscriminatorConfig::validate() const {
    if (in_channels < 1 || nf < 1) {
        throw ConfigError("discriminator channels and width must be positive");
    }
    if (n_layers < 1) {
        throw ConfigError("discriminator needs at least one strided layer");
    }
    if (rank == Rank::Two && depth_downsample) {
        throw ConfigError("depth_downsample applies to 3D discriminators only");
    }
}

json to_json(const GeneratorConfig& c) {
    return {{"rank", to_string(c.rank)},
            {"in_channels", c.in_channels},
            {"out_channels", c.out_channels},
            {"nf", c.nf},
            {"n_res_blocks", c.n_res_blocks},
            {"depth_downsample", c.depth_downsample},
            {"upsampling", upsampling_name(c.upsampling)}};
}

json to_json(const DiscriminatorConfig& c) {
    return {{"rank", to_string(c.rank)},
            {"in_channels", c.in_channels},
            {"n_layers", c.n_layers},
            {"nf", c.nf},
            {"depth_downsample", c.depth_downsample}};
}

GeneratorConfig generator_config_from_json(const json& j) {
    try {
        GeneratorConfig c;
        c.rank = parse_rank(j.value("rank", std::string(to_string(c.rank))));
        c.in_channels = j.value("in_channels", c.in_channels);
        c.out_channels = j.value("out_channels", c.out_channels);
        c.nf = j.value("nf", c.nf);
        c.n_res_blocks = j.value("n_res_blocks", c.n_res_blocks);
        c.depth_downsample = j.value("depth_downsample", c.depth_downsample);
        c.upsampling = parse_upsampling(j.value("upsampling", std::string(upsampling_name(c.upsampling))));
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad generator config: ") + e.what());
    }
}

DiscriminatorConfig discriminator_config_from_json(const json& j) {
    try {
        DiscriminatorConfig c;
        c.rank = parse_rank(j.value("rank", std::string(to_string(c.rank))));
        c.in_channels = j.value("in_channels", c.in_channels);
        c.n_layers = j.value("n_layers", c.n_layers);
        c.nf = j.value("nf", c.nf);
        c.depth_downsample = j.value("depth_downsample", c.depth_downsample);
        c.validate();
        return c;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("bad discriminator config: ") + e.what());
    }
}

ModelHandle build_generator(const GeneratorConfig& cfg) {
    cfg.validate();
    const Rank r = cfg.rank;
    const std::int64_t ts = temporal_stride(r, cfg.depth_downsample);
    torch::nn::Sequential seq;

    add_reflect(seq, r, 3);
    add_conv(seq, r, cfg.in_channels, cfg.nf, {7, 7, 7}, {1, 1, 1}, {0, 0, 0});
    add_norm(seq, r, cfg.nf);
    seq->push_back(torch::nn::ReLU());

    std::int64_t ch = cfg.nf;
    for (int i = 0; i < 2; ++i) {
        add_conv(seq, r, ch, ch * 2, {3, 3, 3}, {ts, 2, 2}, {1, 1, 1});
        add_norm(seq, r, ch * 2);
        seq->push_back(torch::nn::ReLU());
        ch *= 2;
    }
    for (int i = 0; i < cfg.n_res_blocks; ++i) {
        seq->push_back(ResBlock(r, ch));
    }
    for (int i = 0; i < 2; ++i) {
        if (cfg.upsampling == Upsampling::Transposed) {
            add_conv_transpose(seq, r, ch, ch / 2, {ts, 2, 2});
        } else {
            auto opts = torch::nn::UpsampleOptions().mode(torch::kNearest);
            if (r == Rank::Two) {
                opts.scale_factor(std::vector<double>{2.0, 2.0});
            } else {
                opts.scale_factor(std::vector<double>{static_cast<double>(ts), 2.0, 2.0});
            }
            seq->push_back(torch::nn::Upsample(opts));
            add_reflect(seq, r, 1);
            add_conv(seq, r, ch, ch / 2, {3, 3, 3}, {1, 1, 1}, {0, 0, 0});
        }
        add_norm(seq, r, ch / 2);
        seq->push_back(torch::nn::ReLU());
        ch /= 2;
    }
    add_reflect(seq, r, 3);
    add_conv(seq, r, ch, cfg.out_channels, {7, 7, 7}, {1, 1, 1}, {0, 0, 0});
    seq->push_back(torch::nn::Tanh());

    return ModelHandle(ModelHandle::Kind::Generator, to_json(cfg), seq);
}

ModelHandle build_discriminator(const DiscriminatorConfig& cfg) {
    cfg.validate();
    const Rank r = cfg.rank;
    const std::int64_t ts = temporal_stride(r, cfg.depth_downsample);
    torch::nn::Sequential seq;
    auto lrelu = [] { return torch::nn::LeakyReLU(torch::nn::LeakyReLUOptions().negative_slope(0.2)); };

    add_conv(seq, r, cfg.in_channels, cfg.nf, {4, 4, 4}, {ts, 2, 2}, {1, 1, 1});
    seq->push_back(lrelu());
    std::int64_t ch = cfg.nf;
    for (int i = 1; i < cfg.n_layers; ++i) {
        const std::int64_t next = cfg.nf * std::min<std::int64_t>(std::int64_t{1} << i, 8);
        add_conv(seq, r, ch, next, {4, 4, 4}, {ts, 2, 2}, {1, 1, 1});
        add_norm(seq, r, next);
        seq->push_back(lrelu());
        ch = next;
    }
    const std::int64_t last = cfg.nf * std::min<std::int64_t>(std::int64_t{1} << std::min(cfg.n_layers, 3), 8);
    add_conv(seq, r, ch, last, {4, 4, 4}, {1, 1, 1}, {1, 1, 1});
    add_norm(seq, r, last);
    seq->push_back(lrelu());
    add_conv(seq, r, last, 1, {4, 4, 4}, {1, 1, 1}, {1, 1, 1});

    return ModelHandle(ModelHandle::Kind::Discriminator, to_json(cfg), seq);
}

std::int64_t generator_param_count(const GeneratorConfig& cfg) {
    cfg.validate();
    const std::int64_t k7 = kvol(cfg.rank, 7), k3 = kvol(cfg.rank, 3);
    const std::int64_t nf = cfg.nf;
    auto conv = [](std::int64_t in, std::int64_t out, std::int64_t kv) { return out * (in * kv + 1); };
    std::int64_t total = conv(cfg.in_channels, nf, k7);
    total += conv(nf, 2 * nf, k3) + conv(2 * nf, 4 * nf, k3);
    total += 2 * cfg.n_res_blocks * conv(4 * nf, 4 * nf, k3);
    // A transposed conv and a resize-conv of the same kernel hold equal counts.
    total += conv(4 * nf, 2 * nf, k3) + conv(2 * nf, nf, k3);
    total += conv(nf, cfg.out_channels, k7);
    return total;
}

std::int64_t discriminator_param_count(const DiscriminatorConfig& cfg) {
    cfg.validate();
    const std::int64_t k4 = kvol(cfg.rank, 4);
    auto conv = [&](std::int64_t in, std::int64_t out) { return out * (in * k4 + 1); };
    std::int64_t total = conv(cfg.in_channels, cfg.nf);
    std::int64_t ch = cfg.nf;
    for (int i = 1; i < cfg.n_layers; ++i) {
        const std::int64_t next = cfg.nf * std::min<std::int64_t>(std::int64_t{1} << i, 8);
        total += conv(ch, next);
        ch = next;
    }
    const std::int64_t last = cfg.nf * std::min<std::int64_t>(std::int64_t{1} << std::min(cfg.n_layers, 3), 8);
    total += conv(ch, last) + conv(last, 1);
    return total;
}

std::int64_t patch_extent(std::int64_t n, int n_layers, bool strided) {
    // Every layer is kernel 4, padding 1; it needs at least 2 input positions.
    for (int i = 0; i < n_layers; ++i) {
        if (n < 2) {
            return 0;
        }
        n = strided ? (n - 2) / 2 + 1 : n - 1;
    }
    for (int i = 0; i < 2; ++i) {
        if (n < 2) {
            return 0;
        }
        n -= 1;
    }
    return n;
}

std::int64_t patch_receptive_field(int n_layers) {
    std::int64_t rf = 1;
    rf = (rf - 1) + 4;  // score layer
    rf = (rf - 1) + 4;  // stride-1 stage
    for (int i = 0; i < n_layers; ++i) {
        rf = (rf - 1) * 2 + 4;
    }
    return rf;
}

ParityResult calibrate_parity(const GeneratorConfig& cfg3d) {
    cfg3d.validate();
    ParityResult out;
    out.count3d = generator_param_count(cfg3d);
    if (cfg3d.rank == Rank::Two) {
        out.config2d = cfg3d;
        out.count2d = out.count3d;
        return out;
    }
    double best = std::numeric_limits<double>::infinity();
    for (int nf = 1; nf <= 1024; ++nf) {
        GeneratorConfig c = cfg3d;
        c.rank = Rank::Two;
        c.depth_downsample = false;
        c.nf = nf;
        const std::int64_t n = generator_param_count(c);
        const double rel = std::abs(static_cast<double>(n - out.count3d)) / static_cast<double>(out.count3d);
        if (rel < best) {
            best = rel;
            out.config2d = c;
            out.count2d = n;
        }
        if (n > 2 * out.count3d) {
            break;
        }
    }
    if (best > 0.25) {
        throw ConfigError("no 2D width in [1, 1024] matches " + std::to_string(out.count3d) +
                          " parameters within 25%");
    }
    out.ratio = static_cast<double>(out.count2d) / static_cast<double>(out.count3d);
    return out;
}

ModelHandle::ModelHandle(Kind kind, json config, torch::nn::Sequential net)
    : kind_(kind), config_(std::move(config)), net_(std::move(net)) {}

Rank ModelHandle::rank() const {
    return parse_rank(config_.at("rank").get<std::string>());
}

torch::Tensor ModelHandle::forward(const torch::Tensor& x) const {
    if (net_.is_empty()) {
        throw ConfigError("forward on an empty model handle");
    }
    const Rank r = rank();
    const std::int64_t want_dim = r == Rank::Two ? 4 : 5;
    if (x.dim() != want_dim) {
        throw ConfigError(std::string(to_string(r)) + " network expects a " + std::to_string(want_dim) +
                          "-d tensor, got " + std::to_string(x.dim()) + "-d");
    }
    const std::int64_t c = config_.at("in_channels").get<int>();
    if (x.size(1) != c) {
        throw ConfigError("network expects " + std::to_string(c) + " input channels, got " +
                          std::to_string(x.size(1)));
    }
    const std::int64_t d = r == Rank::Three ? x.size(2) : 1;
    const std::int64_t h = x.size(want_dim - 2), w = x.size(want_dim - 1);
    if (kind_ == Kind::Generator) {
        generator_config_from_json(config_).validate_input(d, h, w);
    } else {
        const auto dc = discriminator_config_from_json(config_);
        const bool t_strided = dc.depth_downsample;
        if (patch_extent(h, dc.n_layers) <= 0 || patch_extent(w, dc.n_layers) <= 0 ||
            (r == Rank::Three && patch_extent(d, dc.n_layers, t_strided) <= 0)) {
            throw ConfigError("discriminator input " + std::to_string(d) + "x" + std::to_string(h) + "x" +
                              std::to_string(w) + " is too small for " + std::to_string(dc.n_layers) +
                              " strided layers");
        }
    }
    auto net = net_;
    return net->forward(x);
}

std::int64_t count_params(const ModelHandle& m) {
    std::int64_t n = 0;
    for (const auto& p : m.net()->parameters()) {
        n += p.numel();
    }
    return n;
}

std::int64_t ModelHandle::parameter_count() const {
    return count_params(*this);
}

void init_weights(ModelHandle& m, std::uint64_t seed) {
    torch::NoGradGuard guard;
    auto gen = at::detail::createCPUGenerator(seed);
    for (auto& item : m.net()->named_parameters()) {
        const std::string& name = item.key();
        auto& p = item.value();
        if (name.size() >= 4 && name.compare(name.size() - 4, 4, "bias") == 0) {
            p.zero_();
        } else {
            p.normal_(0.0, 0.02, gen);
        }
    }
}

std::uint64_t parameter_checksum(const ModelHandle& m) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const auto& p : m.net()->parameters()) {
        const auto c = p.detach().to(torch::kFloat32).contiguous();
        const auto* bytes = reinterpret_cast<const unsigned char*>(c.data_ptr<float>());
        const std::size_t n = static_cast<std::size_t>(c.numel()) * sizeof(float);
        for (std::size_t i = 0; i < n; ++i) {
            h ^= bytes[i];
            h *= 0x100000001b3ull;
        }
    }
    return h;
}

void ModelHandle::save_to(torch::serialize::OutputArchive& archive) const {
    net_->save(archive);
}

void ModelHandle::load_from(torch::serialize::InputArchive& archive) {
    net_->load(archive);
}

namespace {

const char* kind_name(ModelHandle::Kind k) {
    return k == ModelHandle::Kind::Generator ? "generator" : "discriminator";
}

void write_text_atomic(const fs::path& path, const std::string& text) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw DataError("cannot write " + tmp.string());
        }
        out << text;
        if (!out) {
            throw DataError("write failed: " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

}  // namespace

void ModelHandle::save(const fs::path& path, std::int64_t step) const {
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    torch::serialize::OutputArchive archive;
    save_to(archive);
    const fs::path tmp = path.string() + ".tmp";
    archive.save_to(tmp.string());
    fs::rename(tmp, path);
    const json meta = {{"format", "v2v-model"},
                       {"version", 1},
                       {"kind", kind_name(kind_)},
                       {"config", config_},
                       {"param_count", parameter_count()},
                       {"step", step}};
    write_text_atomic(path.string() + ".meta.json", meta.dump(2) + "\n");
}

ModelHandle ModelHandle::restore(const fs::path& path) {
    const fs::path meta_path = path.string() + ".meta.json";
    std::ifstream in(meta_path);
    if (!in) {
        throw DataError("missing model sidecar " + meta_path.string());
    }
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw CorruptFileError("bad model sidecar " + meta_path.string() + ": " + e.what());
    }
    if (meta.value("format", "") != "v2v-model") {
        throw FormatError(meta_path.string() + " is not a model sidecar");
    }
    const std::string kind = meta.at("kind").get<std::string>();
    ModelHandle m = kind == "generator" ? build_generator(generator_config_from_json(meta.at("config")))
                                        : build_discriminator(discriminator_config_from_json(meta.at("config")));
    if (!fs::exists(path)) {
        throw DataError("missing model blob " + path.string());
    }
    try {
        torch::serialize::InputArchive archive;
        archive.load_from(path.string());
        m.load_from(archive);
    } catch (const c10::Error& e) {
        throw CorruptFileError("cannot load model blob " + path.string() + ": " + e.what_without_backtrace());
    }
    return m;
}

torch::Tensor frames_tensor(const VideoTensor& v) {
    const VideoTensor m = v.space() == Space::Model ? v : to_model_space(v);
    const Shape& s = m.shape();
    auto vals = m.values();
    auto t = torch::from_blob(const_cast<float*>(vals.data()),
                              {static_cast<std::int64_t>(s.d), static_cast<std::int64_t>(s.h),
                               static_cast<std::int64_t>(s.w), static_cast<std::int64_t>(s.c)},
                              torch::kFloat32)
                 .clone();
    return t.permute({0, 3, 1, 2}).contiguous();
}

torch::Tensor volume_tensor(const VideoTensor& v) {
    return frames_tensor(v).permute({1, 0, 2, 3}).unsqueeze(0).contiguous();
}

VideoTensor from_frames_tensor(const torch::Tensor& t) {
    if (t.dim() != 4) {
        throw DataError("expected a [d, c, h, w] tensor");
    }
    auto x = t.detach().to(torch::kFloat32).permute({0, 2, 3, 1}).contiguous();
    if (!torch::isfinite(x).all().item<bool>()) {
        throw NumericError("network produced non-finite values", -1);
    }
    x = x.clamp(-1.0, 1.0);
    const Shape s{static_cast<std::uint32_t>(t.size(0)), static_cast<std::uint32_t>(t.size(2)),
                  static_cast<std::uint32_t>(t.size(3)), static_cast<std::uint32_t>(t.size(1))};
    const float* p = x.data_ptr<float>();
    return VideoTensor::model(s, std::vector<float>(p, p + x.numel()));
}

VideoTensor from_volume_tensor(const torch::Tensor& t) {
    if (t.dim() != 5 || t.size(0) != 1) {
        throw DataError("expected a [1, c, d, h, w] tensor");
    }
    return from_frames_tensor(t.squeeze(0).permute({1, 0, 2, 3}));
}

}  // namespace v2v::nn
