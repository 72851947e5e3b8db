#include <gtest/gtest.h>

#include <cmath>
#include <fstream>

#include "oracles.hpp"
#include "test_util.hpp"
#include "v2v/errors.hpp"
#include "v2v/nn.hpp"

using namespace v2v;
using namespace v2v::nn;

namespace {

std::int64_t oracle_generator(int rank, std::int64_t c, std::int64_t o, std::int64_t nf, std::int64_t blocks) {
    return oracle::generator_params(rank, c, o, nf, blocks);
}

std::int64_t oracle_discriminator(int rank, std::int64_t c, std::int64_t nf, int n) {
    return oracle::discriminator_params(rank, c, nf, n);
}

// Output length of a k=4, p=1 convolution with the given stride.
std::int64_t conv_out(std::int64_t n, std::int64_t s) { return (n + 2 - 4) / s + 1; }

std::int64_t oracle_extent(std::int64_t n, int layers, bool strided) {
    for (int i = 0; i < layers; ++i) {
        n = conv_out(n, strided ? 2 : 1);
    }
    return conv_out(conv_out(n, 1), 1);
}

GeneratorConfig small_gen(Rank r, int c = 1, int o = 1) {
    GeneratorConfig g;
    g.rank = r;
    g.in_channels = c;
    g.out_channels = o;
    g.nf = 4;
    g.n_res_blocks = 2;
    return g;
}

}  // namespace

TEST(ParamCount, StandardTwoDGenerator) {
    GeneratorConfig g;
    g.rank = Rank::Two;
    g.in_channels = 3;
    g.out_channels = 3;
    EXPECT_EQ(oracle_generator(2, 3, 3, 64, 9), 11378179);
    EXPECT_EQ(generator_param_count(g), 11378179);
    EXPECT_EQ(count_params(build_generator(g)), 11378179);
}

TEST(ParamCount, StandardPatchDiscriminator) {
    DiscriminatorConfig d;
    d.rank = Rank::Two;
    d.in_channels = 3;
    EXPECT_EQ(oracle_discriminator(2, 3, 64, 3), 2764737);
    EXPECT_EQ(discriminator_param_count(d), 2764737);
    EXPECT_EQ(count_params(build_discriminator(d)), 2764737);
}

TEST(ParamCount, AnalyticMatchesBackendAcrossConfigs) {
    for (Rank r : {Rank::Two, Rank::Three}) {
        const int rk = r == Rank::Two ? 2 : 3;
        for (int nf : {2, 5, 8}) {
            for (int blocks : {0, 1, 3}) {
                for (auto up : {Upsampling::Transposed, Upsampling::ResizeConv}) {
                    GeneratorConfig g{r, 1, 3, nf, blocks, false, up};
                    const auto m = build_generator(g);
                    EXPECT_EQ(count_params(m), generator_param_count(g));
                    EXPECT_EQ(count_params(m), oracle_generator(rk, 1, 3, nf, blocks));
                    EXPECT_EQ(m.parameter_count(), count_params(m));
                }
            }
            for (int layers : {1, 2, 3, 4}) {
                DiscriminatorConfig d{r, 3, layers, nf, false};
                EXPECT_EQ(count_params(build_discriminator(d)), discriminator_param_count(d));
                EXPECT_EQ(discriminator_param_count(d), oracle_discriminator(rk, 3, nf, layers));
            }
        }
    }
}

TEST(Generator, ShapeAndRangeContract) {
    torch::manual_seed(0);
    auto g2 = build_generator(small_gen(Rank::Two, 1, 3));
    init_weights(g2, 1);
    const auto x2 = torch::rand({3, 1, 12, 16}) * 2 - 1;
    const auto y2 = g2.forward(x2);
    EXPECT_EQ(y2.sizes(), (std::vector<std::int64_t>{3, 3, 12, 16}));
    EXPECT_LE(y2.abs().max().item<float>(), 1.0f);

    auto cfg3 = small_gen(Rank::Three);
    for (bool dd : {false, true}) {
        for (auto up : {Upsampling::Transposed, Upsampling::ResizeConv}) {
            cfg3.depth_downsample = dd;
            cfg3.upsampling = up;
            auto g3 = build_generator(cfg3);
            init_weights(g3, 2);
            const auto x3 = torch::rand({1, 1, 8, 8, 12}) * 2 - 1;
            const auto y3 = g3.forward(x3);
            EXPECT_EQ(y3.sizes(), x3.sizes());
            EXPECT_LE(y3.abs().max().item<float>(), 1.0f);
        }
    }
}

TEST(Generator, RejectsBadInput) {
    auto g2 = build_generator(small_gen(Rank::Two));
    EXPECT_THROW(g2.forward(torch::zeros({1, 1, 10, 16})), ConfigError);
    EXPECT_THROW(g2.forward(torch::zeros({1, 1, 4, 4})), ConfigError);
    EXPECT_THROW(g2.forward(torch::zeros({1, 2, 8, 8})), ConfigError);
    EXPECT_THROW(g2.forward(torch::zeros({1, 1, 8, 8, 8})), ConfigError);
    auto cfg3 = small_gen(Rank::Three);
    auto g3 = build_generator(cfg3);
    EXPECT_THROW(g3.forward(torch::zeros({1, 1, 3, 8, 8})), ConfigError);
    EXPECT_NO_THROW(g3.forward(torch::zeros({1, 1, 5, 8, 8})));
    cfg3.depth_downsample = true;
    EXPECT_THROW(build_generator(cfg3).forward(torch::zeros({1, 1, 6, 8, 8})), ConfigError);
    EXPECT_THROW((GeneratorConfig{Rank::Two, 1, 1, 0, 9, false, Upsampling::Transposed}.validate()), ConfigError);
    EXPECT_THROW((GeneratorConfig{Rank::Two, 1, 1, 4, 2, true, Upsampling::Transposed}.validate()), ConfigError);
}

TEST(Discriminator, PatchExtentMatchesConvArithmetic) {
    for (int layers = 1; layers <= 4; ++layers) {
        for (std::int64_t n = 1; n <= 80; ++n) {
            // Every intermediate length must stay positive for the oracle to apply.
            std::int64_t probe = n;
            bool ok = true;
            for (int i = 0; i < layers && ok; ++i) {
                ok = probe >= 2;
                probe = conv_out(probe, 2);
            }
            ok = ok && probe >= 3;
            if (ok) {
                EXPECT_EQ(patch_extent(n, layers), oracle_extent(n, layers, true)) << n << " " << layers;
            } else {
                EXPECT_LE(patch_extent(n, layers), 0) << n << " " << layers;
            }
        }
    }
    EXPECT_EQ(patch_extent(8, 3, false), oracle_extent(8, 3, false));
}

TEST(Discriminator, ReceptiveField) {
    // Walk back from one output unit: r <- (r - 1) * stride + kernel.
    for (int n : {1, 2, 3, 4}) {
        std::int64_t r = 1;
        r = (r - 1) + 4;
        r = (r - 1) + 4;
        for (int i = 0; i < n; ++i) {
            r = (r - 1) * 2 + 4;
        }
        EXPECT_EQ(patch_receptive_field(n), r);
    }
    EXPECT_EQ(patch_receptive_field(3), 70);
}

TEST(Discriminator, OutputShapeAndTooSmallInput) {
    DiscriminatorConfig d2{Rank::Two, 3, 3, 4, false};
    auto m2 = build_discriminator(d2);
    const auto y2 = m2.forward(torch::zeros({2, 3, 64, 40}));
    EXPECT_EQ(y2.sizes(), (std::vector<std::int64_t>{2, 1, oracle_extent(64, 3, true), oracle_extent(40, 3, true)}));
    EXPECT_THROW(m2.forward(torch::zeros({1, 3, 16, 16})), ConfigError);

    DiscriminatorConfig d3{Rank::Three, 1, 2, 4, false};
    auto m3 = build_discriminator(d3);
    const auto y3 = m3.forward(torch::zeros({1, 1, 8, 28, 28}));
    EXPECT_EQ(y3.sizes(), (std::vector<std::int64_t>{1, 1, oracle_extent(8, 2, false), oracle_extent(28, 2, true),
                                                     oracle_extent(28, 2, true)}));
    EXPECT_THROW(m3.forward(torch::zeros({1, 1, 2, 28, 28})), ConfigError);
    d3.depth_downsample = true;
    EXPECT_THROW(build_discriminator(d3).forward(torch::zeros({1, 1, 4, 28, 28})), ConfigError);
}

TEST(Init, SeededAndNormal) {
    GeneratorConfig g;
    g.rank = Rank::Two;
    g.nf = 16;
    g.n_res_blocks = 2;
    auto a = build_generator(g);
    auto b = build_generator(g);
    init_weights(a, 42);
    init_weights(b, 42);
    EXPECT_EQ(parameter_checksum(a), parameter_checksum(b));
    init_weights(b, 43);
    EXPECT_NE(parameter_checksum(a), parameter_checksum(b));
    std::vector<torch::Tensor> weights;
    for (const auto& p : a.net()->named_parameters()) {
        if (p.key().ends_with("bias")) {
            EXPECT_EQ(p.value().abs().sum().item<float>(), 0.0f);
        } else {
            weights.push_back(p.value().flatten());
        }
    }
    const auto all = torch::cat(weights);
    EXPECT_NEAR(all.mean().item<float>(), 0.0, 1e-3);
    EXPECT_NEAR(all.std().item<float>(), 0.02, 1e-3);
}

TEST(Checkpoint, SaveRestoreIsExact) {
    test::TempDir dir;
    for (Rank r : {Rank::Two, Rank::Three}) {
        auto g = build_generator(small_gen(r, 1, 3));
        init_weights(g, 5);
        const auto path = dir.path() / (std::string("g") + to_string(r) + ".pt");
        g.save(path, 17);
        auto back = ModelHandle::restore(path);
        EXPECT_EQ(back.config(), g.config());
        EXPECT_EQ(parameter_checksum(back), parameter_checksum(g));
        g.train(false);
        back.train(false);
        const auto x = r == Rank::Two ? torch::rand({2, 1, 8, 8}) : torch::rand({1, 1, 4, 8, 8});
        EXPECT_TRUE(torch::equal(g.forward(x), back.forward(x)));
    }
    auto d = build_discriminator({Rank::Two, 3, 2, 4, false});
    init_weights(d, 9);
    d.save(dir.path() / "d.pt");
    EXPECT_EQ(ModelHandle::restore(dir.path() / "d.pt").kind(), ModelHandle::Kind::Discriminator);
    {
        std::ofstream(dir.path() / "junk.pt") << "not an archive";
    }
    EXPECT_THROW(ModelHandle::restore(dir.path() / "junk.pt"), DataError);
    EXPECT_THROW(ModelHandle::restore(dir.path() / "missing.pt"), DataError);
}

TEST(Parity, PicksClosestTwoDWidth) {
    GeneratorConfig g3;
    g3.rank = Rank::Three;
    g3.nf = 16;
    g3.n_res_blocks = 3;
    const auto p = calibrate_parity(g3);
    EXPECT_EQ(p.count3d, oracle_generator(3, 1, 1, 16, 3));
    EXPECT_EQ(p.count2d, oracle_generator(2, 1, 1, p.config2d.nf, 3));
    EXPECT_EQ(p.config2d.rank, Rank::Two);
    EXPECT_FALSE(p.config2d.depth_downsample);
    EXPECT_NEAR(p.ratio, static_cast<double>(p.count2d) / p.count3d, 1e-12);
    // No other width is closer.
    const double err = std::abs(p.ratio - 1.0);
    for (int nf = 1; nf <= 200; ++nf) {
        const double e = std::abs(static_cast<double>(oracle_generator(2, 1, 1, nf, 3)) / p.count3d - 1.0);
        EXPECT_GE(e, err) << nf;
    }
    EXPECT_LE(err, 0.10);
}

TEST(Layout, FramesAndVolumeTensors) {
    const auto v = test::random_clip({4, 8, 6, 3}, 2);
    const auto f = frames_tensor(v);
    EXPECT_EQ(f.sizes(), (std::vector<std::int64_t>{4, 3, 8, 6}));
    EXPECT_FLOAT_EQ(f[2][1][5][3].item<float>(), dequantize(static_cast<std::uint8_t>(v.at(2, 5, 3, 1))));
    const auto vol = volume_tensor(v);
    EXPECT_EQ(vol.sizes(), (std::vector<std::int64_t>{1, 3, 4, 8, 6}));
    EXPECT_FLOAT_EQ(vol[0][2][3][7][0].item<float>(), dequantize(static_cast<std::uint8_t>(v.at(3, 7, 0, 2))));
    EXPECT_EQ(to_storage_space(from_frames_tensor(f)), v);
    EXPECT_EQ(to_storage_space(from_volume_tensor(vol)), v);
    EXPECT_THROW(from_frames_tensor(f / 0.0f), NumericError);
    const auto clamped = from_volume_tensor(vol * 3);
    for (float x : clamped.values()) {
        ASSERT_LE(std::abs(x), 1.0f);
    }
}

TEST(Rank, Names) {
    EXPECT_EQ(parse_rank("2d"), Rank::Two);
    EXPECT_EQ(parse_rank("3d"), Rank::Three);
    EXPECT_THROW(parse_rank("4d"), ConfigError);
    const GeneratorConfig g = small_gen(Rank::Three, 1, 3);
    EXPECT_EQ(generator_config_from_json(to_json(g)), g);
    const DiscriminatorConfig d{Rank::Two, 3, 2, 7, false};
    EXPECT_EQ(discriminator_config_from_json(to_json(d)), d);
}
