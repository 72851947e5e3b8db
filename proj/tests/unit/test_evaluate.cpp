#include <gtest/gtest.h>

#include <algorithm>

#include "test_util.hpp"
#include "v2v/errors.hpp"
#include "v2v/evaluate.hpp"
#include "v2v/synth.hpp"

using namespace v2v;
using namespace v2v::metrics;

namespace {

struct Fixture {
    test::TempDir dir;
    synth::DatasetPair pair;

    explicit Fixture(synth::DatasetKind kind) {
        synth::SynthConfig cfg;
        cfg.kind = kind;
        cfg.depth = 6;
        cfg.canvas = 28;
        cfg.clips_per_domain = 10;
        cfg.max_radius = 2;
        cfg.colors = 3;
        pair = synth::build_dataset(cfg, synth::synthetic_digits(40, 5), dir.path(), 21);
    }

    ModelVariant oracle() const {
        const DatasetManifest* m = &pair.a;
        return {"oracle", [m](const VideoTensor&, const ClipEntry& e) { return m->load_gt(e); }, {}};
    }
};

ModelVariant identity() {
    return {"identity", [](const VideoTensor& in, const ClipEntry&) { return in; }, {}};
}

}  // namespace

TEST(Evaluate, GroundTruthScoresPerfectVolumetric) {
    Fixture f(synth::DatasetKind::Volumetric);
    EvalSpec spec;
    spec.task = TaskKind::Volumetric;
    const auto r = evaluate(f.pair.a, spec, {f.oracle(), identity()});
    EXPECT_EQ(r.test_clips, 3u);
    EXPECT_EQ(r.columns, std::vector<std::string>{"volume_l2"});
    EXPECT_EQ(r.rows[0].metrics.at("volume_l2").mean, 0.0);
    EXPECT_EQ(r.rows[0].metrics.at("volume_l2").n, 3u);
    EXPECT_GT(r.rows[1].metrics.at("volume_l2").mean, 1.0);
    EXPECT_NE(r.dataset_id.find("volumetric"), std::string::npos);
}

TEST(Evaluate, GroundTruthScoresPerfectSegmentation) {
    Fixture f(synth::DatasetKind::MovingColor);
    EvalSpec spec;
    spec.task = TaskKind::Segmentation;
    spec.palette = {{0, 0, 0}, {255, 0, 0}, {0, 255, 0}, {0, 0, 255}};
    const auto r = evaluate(f.pair.a, spec, {f.oracle()});
    const auto& m = r.rows[0].metrics;
    EXPECT_DOUBLE_EQ(m.at("accuracy").mean, 1.0);
    EXPECT_DOUBLE_EQ(m.at("accuracy").std, 0.0);
    for (const char* c : {"trans_l0", "trans_l1", "trans_l2"}) {
        EXPECT_DOUBLE_EQ(m.at(c).mean, 0.0) << c;
    }
    EXPECT_EQ(r.columns, (std::vector<std::string>{"accuracy", "trans_l0", "trans_l1", "trans_l2"}));
    spec.palette.clear();
    EXPECT_THROW(evaluate(f.pair.a, spec, {f.oracle()}), ConfigError);
}

TEST(Evaluate, ColorizationOracleMatchesShape) {
    Fixture f(synth::DatasetKind::MovingColor);
    EvalSpec spec;
    spec.task = TaskKind::Colorization;
    const auto r = evaluate(f.pair.a, spec, {f.oracle()});
    const auto& m = r.rows[0].metrics;
    EXPECT_DOUBLE_EQ(m.at("shape_l2").mean, 0.0);
    EXPECT_NEAR(m.at("temporal_color_sigma").mean, 0.0, 1.0);
    EXPECT_GT(m.at("color_sigma").mean, 10.0);
}

TEST(Evaluate, ClipOrderDoesNotChangeReport) {
    Fixture f(synth::DatasetKind::Volumetric);
    EvalSpec spec;
    spec.task = TaskKind::Volumetric;
    const auto base = report_csv(evaluate(f.pair.a, spec, {identity()}));
    auto shuffled = f.pair.a;
    std::reverse(shuffled.clips.begin(), shuffled.clips.end());
    std::rotate(shuffled.clips.begin(), shuffled.clips.begin() + 3, shuffled.clips.end());
    spec.jobs = 3;
    EXPECT_EQ(report_csv(evaluate(shuffled, spec, {identity()})), base);
}

TEST(Evaluate, RejectsContaminatedModels) {
    Fixture f(synth::DatasetKind::Volumetric);
    EvalSpec spec;
    auto bad = identity();
    bad.train_ids = {f.pair.a.split(Split::Test)[0]->id};
    EXPECT_THROW(evaluate(f.pair.a, spec, {bad}), ContaminationError);
    auto ok = identity();
    for (const auto* e : f.pair.a.split(Split::Train)) {
        ok.train_ids.push_back(e->id);
    }
    EXPECT_NO_THROW(check_contamination(f.pair.a, {ok}));
    auto dup = f.pair.a;
    dup.clips[0].id = dup.split(Split::Test)[0]->id;
    EXPECT_THROW(check_contamination(dup, {ok}), ContaminationError);
}

TEST(Report, JsonRoundTripAndStableCsv) {
    Fixture f(synth::DatasetKind::Volumetric);
    EvalSpec spec;
    const auto r = evaluate(f.pair.a, spec, {f.oracle(), identity()});
    const auto csv = report_csv(r);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "model,volume_l2,volume_l2_std");
    write_report_json(r, f.dir.path() / "r.json");
    const auto back = read_report_json(f.dir.path() / "r.json");
    EXPECT_EQ(report_csv(back), csv);
    EXPECT_EQ(to_json(back), to_json(r));
    EXPECT_EQ(report_csv(evaluate(f.pair.a, spec, {f.oracle(), identity()})), csv);
}

TEST(Report, CollateUnionsColumns) {
    MetricReport a, b;
    a.dataset_id = "x";
    a.task = "volumetric";
    a.columns = {"volume_l2"};
    a.rows = {{"m1", {{"volume_l2", {1.5, 0.5, 3}}}}};
    b.dataset_id = "y";
    b.task = "volumetric";
    b.columns = {"volume_l2", "extra"};
    b.rows = {{"m2", {{"extra", {2, 0, 3}}, {"volume_l2", {4, 0, 3}}}}};
    const auto c = collate({a, b});
    EXPECT_EQ(c.columns, (std::vector<std::string>{"volume_l2", "extra"}));
    EXPECT_EQ(c.rows.size(), 2u);
    EXPECT_EQ(c.dataset_id, "x;y");
    EXPECT_EQ(report_csv(c),
              "model,volume_l2,volume_l2_std,extra,extra_std\n"
              "m1,1.500000,0.500000,,\n"
              "m2,4.000000,0.000000,2.000000,0.000000\n");
}

TEST(Task, Parsing) {
    EXPECT_EQ(parse_task("segmentation"), TaskKind::Segmentation);
    EXPECT_STREQ(to_string(TaskKind::Colorization), "colorization");
    EXPECT_THROW(parse_task("depth"), ConfigError);
}
