// v2v: generate datasets, train translators, translate clips, evaluate and
// collate reports. Exit codes: 0 ok, 2 config, 3 data, 4 numeric abort.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "cli_support.hpp"
#include "v2v/errors.hpp"
#include "v2v/evaluate.hpp"
#include "v2v/synth.hpp"
#include "v2v/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace v2v;

namespace {

struct Common {
    bool force = false;
    unsigned jobs = 1;
};

// ---------------------------------------------------------------- gen

struct GenArgs {
    std::string kind;
    fs::path out;
    std::uint64_t seed = 0;
    synth::SynthConfig cfg;
    std::string images, labels;
    std::size_t digits = 0;
};

int cmd_gen(const GenArgs& a, const Common& c) {
    synth::SynthConfig cfg = a.cfg;
    cfg.kind = synth::parse_dataset_kind(a.kind);
    cfg.validate();
    if (a.images.empty() != a.labels.empty()) {
        throw ConfigError("--images and --labels go together");
    }
    cli::prepare_out_dir(a.out, c.force);

    synth::DigitSource digits;
    std::vector<fs::path> inputs;
    if (!a.images.empty()) {
        digits = synth::load_digit_archive(a.images, a.labels);
        inputs = {a.images, a.labels};
    } else {
        const std::size_t n = a.digits > 0 ? a.digits : 2 * std::size_t{cfg.clips_per_domain};
        digits = synth::synthetic_digits(n, derive_seed(a.seed, "digits"));
    }

    const json config = {{"kind", synth::to_string(cfg.kind)},
                         {"depth", cfg.depth},
                         {"canvas", cfg.canvas},
                         {"clips_per_domain", cfg.clips_per_domain},
                         {"max_radius", cfg.max_radius},
                         {"colors", cfg.colors},
                         {"max_speed", cfg.max_speed},
                         {"train_fraction", cfg.train_fraction},
                         {"digit_source", a.images.empty() ? "synthetic" : "idx"}};
    cli::RunRecord rec{"gen", config, a.seed, cli::inputs_hash(inputs)};
    rec.write(a.out);

    const auto pair = synth::build_dataset(cfg, digits, a.out, a.seed, c.jobs);
    rec.completed = true;
    rec.extra = {{"manifests", {pair.manifest_a.generic_string(), pair.manifest_b.generic_string()}}};
    rec.write(a.out);
    std::cout << pair.manifest_a.generic_string() << "\n" << pair.manifest_b.generic_string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- import

struct ImportArgs {
    fs::path frames, gt, out, palette;
    std::uint32_t channels = 3;
    std::uint32_t gt_channels = 3;
    std::uint32_t stride = 1;
    std::string domain = "imported";
    double train_fraction = 0.7;
    std::uint64_t seed = 0;
};

std::vector<Rgb> read_palette(const fs::path& p) {
    std::ifstream in(p);
    if (!in) {
        throw ConfigError("cannot read palette " + p.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError(p.string() + ": " + e.what());
    }
    if (!j.is_array() || j.empty()) {
        throw ConfigError("palette must be a non-empty JSON list");
    }
    std::vector<Rgb> out;
    for (const auto& c : j) {
        if (!c.is_array() || c.size() != 3) {
            throw ConfigError("palette entries must be [r, g, b]");
        }
        out.push_back({c[0].get<std::uint8_t>(), c[1].get<std::uint8_t>(), c[2].get<std::uint8_t>()});
    }
    return out;
}

int cmd_import(const ImportArgs& a, const Common& c) {
    if (!fs::is_directory(a.frames)) {
        throw DataError("frame root " + a.frames.string() + " is not a directory");
    }
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(a.frames)) {
        if (e.is_directory()) {
            dirs.push_back(e.path());
        }
    }
    std::sort(dirs.begin(), dirs.end());
    if (dirs.empty()) {
        throw DataError("no clip directories under " + a.frames.string());
    }
    cli::prepare_out_dir(a.out, c.force);

    DatasetManifest m;
    m.domain_name = a.domain;
    m.kind = "frames";
    m.rng_seed = a.seed;
    m.root = a.out;
    if (!a.palette.empty()) {
        m.palette = read_palette(a.palette);
    }
    const auto splits = synth::assign_splits(dirs.size(), a.train_fraction, derive_seed(a.seed, "split"));
    for (std::size_t i = 0; i < dirs.size(); ++i) {
        ClipEntry e;
        e.id = dirs[i].filename().string();
        const VideoTensor v = import_frame_dir(dirs[i], a.channels, a.stride);
        if (i == 0) {
            m.shape = v.shape();
        }
        e.shape = v.shape();
        e.split = splits[i];
        e.path = "clips/" + e.id + ".vvt";
        save_clip(v, a.out / e.path);
        if (!a.gt.empty() && fs::is_directory(a.gt / e.id)) {
            const VideoTensor g = import_frame_dir(a.gt / e.id, a.gt_channels, a.stride);
            e.gt_path = "gt/" + e.id + ".vvt";
            save_clip(g, a.out / *e.gt_path);
        }
        m.clips.push_back(std::move(e));
    }
    validate_manifest(m, true);
    save_manifest(m, a.out / "manifest.json");
    std::cout << (a.out / "manifest.json").generic_string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string config;
    std::vector<std::string> overrides;
    std::string data_a, data_b;
    fs::path out;
    std::string strategy, adversarial, resume;
    std::optional<std::int64_t> steps, checkpoint_every, nf, pool;
    std::optional<std::uint32_t> frames, depth;
    std::optional<double> gamma, lambda_const;
    std::optional<std::uint64_t> seed;
    bool no_parity = false;
};

int cmd_train(const TrainArgs& a, const Common& c) {
    json cfg = a.config.empty() ? json::object() : cli::load_config(a.config);
    for (const auto& o : a.overrides) {
        cli::apply_override(cfg, o);
    }
    auto set = [&](const char* section, const char* key, const json& v) { cfg[section][key] = v; };
    if (a.steps) set("train", "steps", *a.steps);
    if (a.seed) set("train", "seed", *a.seed);
    if (a.gamma) set("train", "gamma", *a.gamma);
    if (a.lambda_const) set("train", "lambda_const", *a.lambda_const);
    if (a.pool) set("train", "pool_size", *a.pool);
    if (a.checkpoint_every) set("train", "checkpoint_every", *a.checkpoint_every);
    if (!a.adversarial.empty()) set("train", "adversarial_form", a.adversarial);
    if (!a.strategy.empty()) set("strategy", "kind", a.strategy);
    if (a.frames) set("strategy", "frames", *a.frames);
    if (a.depth) set("strategy", "depth", *a.depth);
    if (a.nf) set("generator", "nf", *a.nf);

    std::string path_a = a.data_a, path_b = a.data_b;
    if (cfg.contains("data")) {
        if (path_a.empty()) path_a = cfg["data"].value("a", "");
        if (path_b.empty()) path_b = cfg["data"].value("b", "");
        cfg.erase("data");
    }
    const bool parity = cfg.value("parity", true) && !a.no_parity;
    cfg.erase("parity");
    if (path_a.empty() || path_b.empty()) {
        throw ConfigError("both domain manifests are required (--data-a/--data-b or data.a/data.b)");
    }

    const auto kind = train::parse_strategy(cfg.value("strategy", json::object()).value("kind", std::string("3d")));
    const std::string rank = kind == train::StrategyKind::Volumetric3D ? "3d" : "2d";
    cfg["generator"]["rank"] = "3d";
    cfg["discriminator"]["rank"] = "3d";
    cfg["strategy"]["kind"] = train::to_string(kind);

    const DatasetManifest ma = load_manifest(path_a);
    const DatasetManifest mb = load_manifest(path_b);
    cfg["channels_a"] = ma.shape.c;
    cfg["channels_b"] = mb.shape.c;

    // Configs describe the 3D generator; 2D runs get the width with matching
    // parameter count unless parity is switched off.
    if (rank == "2d") {
        json g3 = cfg["generator"];
        cfg["generator"]["rank"] = "2d";
        cfg["generator"]["depth_downsample"] = false;
        cfg["discriminator"]["rank"] = "2d";
        cfg["discriminator"]["depth_downsample"] = false;
        if (parity) {
            auto gen3 = nn::generator_config_from_json(g3);
            gen3.in_channels = static_cast<int>(ma.shape.c);
            gen3.out_channels = static_cast<int>(mb.shape.c);
            const auto pr = nn::calibrate_parity(gen3);
            cfg["generator"]["nf"] = pr.config2d.nf;
            std::cerr << "parity: 3D " << pr.count3d << " params, 2D nf=" << pr.config2d.nf << " -> "
                      << pr.count2d << " params (ratio " << pr.ratio << ")\n";
        }
    }
    const train::TrainSetup setup = train::train_setup_from_json(cfg);

    std::optional<fs::path> resume;
    if (!a.resume.empty()) {
        resume = fs::path(a.resume);
        if (!fs::exists(*resume)) {
            throw DataError("resume checkpoint not found: " + a.resume);
        }
        fs::create_directories(a.out);
    } else {
        cli::prepare_out_dir(a.out, c.force);
    }
    torch::set_num_threads(static_cast<int>(std::max(1u, c.jobs)));

    std::vector<fs::path> inputs{path_a, path_b};
    if (!a.config.empty()) {
        inputs.insert(inputs.begin(), a.config);
    }
    cli::RunRecord rec{"train", train::to_json(setup), setup.train.seed, cli::inputs_hash(inputs)};
    rec.extra = {{"data", {{"a", path_a}, {"b", path_b}}}};
    if (resume) {
        rec.extra["resumed_from"] = resume->generic_string();
    }
    rec.write(a.out);
    {
        std::ofstream frozen(a.out / "config.resolved.json");
        frozen << train::to_json(setup).dump(2) << "\n";
    }

    const std::int64_t every = std::max<std::int64_t>(1, setup.train.steps / 20);
    try {
        const auto result = train::train(setup, ma, mb, a.out, resume, [&](const train::LossReport& r) {
            if (r.step % every == 0 || r.step == setup.train.steps) {
                std::cerr << "step " << r.step << "/" << setup.train.steps << " cycle " << r.terms.cycle
                          << " objective " << r.objective << "\n";
            }
        });
        rec.completed = true;
        rec.extra["final_checkpoint"] = result.final_checkpoint.generic_string();
        rec.extra["init_checksum"] = result.init_checksum;
        rec.write(a.out);
        std::cout << result.final_checkpoint.generic_string() << "\n";
    } catch (const NumericError& e) {
        rec.extra["aborted_at_step"] = e.step();
        rec.extra["error"] = e.what();
        rec.write(a.out);
        throw;
    }
    return 0;
}

// ---------------------------------------------------------------- translate

struct TranslateArgs {
    fs::path checkpoint, input, out;
    std::string direction = "a2b";
    std::string split = "test";
    bool no_gif = false;
    bool no_cycle = false;
};

int cmd_translate(const TranslateArgs& a, const Common& c) {
    // Validate everything before the first byte is written.
    if (!fs::exists(a.checkpoint)) {
        throw DataError("checkpoint not found: " + a.checkpoint.string());
    }
    if (!fs::exists(a.input)) {
        throw DataError("input not found: " + a.input.string());
    }
    if (fs::exists(a.out) && !fs::is_empty(a.out) && !c.force) {
        throw ConfigError(a.out.string() + " is not empty; pass --force to overwrite");
    }
    const auto dir = train::parse_direction(a.direction);
    const auto back = dir == train::Direction::AToB ? train::Direction::BToA : train::Direction::AToB;
    const auto tr = train::Translator::load(a.checkpoint);

    std::vector<std::pair<std::string, VideoTensor>> clips;
    std::vector<fs::path> inputs{a.checkpoint.string() + ".meta.json"};
    if (a.input.extension() == ".json") {
        const DatasetManifest m = load_manifest(a.input);
        inputs.push_back(a.input);
        for (const auto& e : m.clips) {
            if (a.split == "all" || parse_split(a.split) == e.split) {
                clips.emplace_back(e.id, m.load(e));
            }
        }
    } else {
        clips.emplace_back(a.input.stem().string(), load_clip(a.input));
        inputs.push_back(a.input);
    }
    if (clips.empty()) {
        throw DataError("no clips selected from " + a.input.string());
    }

    const fs::path staging = a.out.string() + ".partial";
    fs::remove_all(staging);
    fs::create_directories(staging);
    try {
        json listing = json::array();
        for (const auto& [id, clip] : clips) {
            const VideoTensor y = tr.translate(clip, dir);
            save_clip(y, staging / (id + ".vvt"));
            json entry = {{"id", id}, {"output", id + ".vvt"}};
            if (!a.no_gif) {
                export_gif(y, staging / (id + ".gif"));
            }
            if (!a.no_cycle) {
                const VideoTensor z = tr.translate(y, back);
                save_clip(z, staging / (id + ".cycle.vvt"));
                entry["cycle"] = id + ".cycle.vvt";
                if (!a.no_gif) {
                    export_gif(z, staging / (id + ".cycle.gif"));
                }
            }
            listing.push_back(entry);
        }
        {
            std::ofstream out(staging / "translations.json");
            out << json{{"checkpoint", a.checkpoint.generic_string()},
                        {"direction", train::to_string(dir)},
                        {"clips", listing}}
                       .dump(2)
                << "\n";
        }
        cli::RunRecord rec{"translate",
                           {{"checkpoint", a.checkpoint.generic_string()},
                            {"input", a.input.generic_string()},
                            {"direction", train::to_string(dir)},
                            {"split", a.split}},
                           0,
                           cli::inputs_hash(inputs)};
        rec.completed = true;
        rec.write(staging);
    } catch (...) {
        fs::remove_all(staging);
        throw;
    }
    fs::remove_all(a.out);
    if (a.out.has_parent_path()) {
        fs::create_directories(a.out.parent_path());
    }
    fs::rename(staging, a.out);
    std::cout << a.out.generic_string() << "\n";
    return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string task;
    fs::path manifest, out;
    std::vector<std::string> models;
    std::string direction = "a2b";
    std::string denoise = "0,1,2";
};

std::vector<std::uint32_t> parse_levels(const std::string& s) {
    std::vector<std::uint32_t> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const auto comma = s.find(',', start);
        const std::string part = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        try {
            std::size_t used = 0;
            const long v = std::stol(part, &used);
            if (used != part.size() || v < 0) {
                throw std::invalid_argument(part);
            }
            out.push_back(static_cast<std::uint32_t>(v));
        } catch (const std::exception&) {
            throw ConfigError("bad denoise level '" + part + "'");
        }
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

int cmd_eval(const EvalArgs& a, const Common& c) {
    metrics::EvalSpec spec;
    spec.task = metrics::parse_task(a.task);
    spec.direction = train::to_string(train::parse_direction(a.direction));
    spec.denoise_levels = parse_levels(a.denoise);
    spec.jobs = c.jobs;
    if (a.models.empty()) {
        throw ConfigError("at least one --model is required");
    }
    const DatasetManifest m = load_manifest(a.manifest);
    spec.palette = m.palette;
    const auto dir = train::parse_direction(a.direction);

    std::vector<metrics::ModelVariant> variants;
    std::vector<fs::path> inputs{a.manifest};
    json model_cfg = json::object();
    for (const auto& spec_str : a.models) {
        const auto eq = spec_str.find('=');
        const std::string name = eq == std::string::npos ? fs::path(spec_str).stem().string() : spec_str.substr(0, eq);
        const std::string target = eq == std::string::npos ? spec_str : spec_str.substr(eq + 1);
        metrics::ModelVariant v;
        v.name = name;
        if (target == "oracle") {
            v.run = [&m](const VideoTensor&, const ClipEntry& e) { return m.load_gt(e); };
        } else {
            if (!fs::exists(target)) {
                throw DataError("checkpoint not found: " + target);
            }
            auto tr = std::make_shared<train::Translator>(train::Translator::load(target));
            v.train_ids = dir == train::Direction::AToB ? tr->meta().train_ids_a : tr->meta().train_ids_b;
            v.run = [tr, dir](const VideoTensor& x, const ClipEntry&) { return tr->translate(x, dir); };
            inputs.push_back(target + ".meta.json");
        }
        model_cfg[name] = target;
        variants.push_back(std::move(v));
    }
    // Contamination is a hard error before any output exists.
    metrics::check_contamination(m, variants);
    cli::prepare_out_dir(a.out, c.force);
    torch::set_num_threads(1);

    const auto report = metrics::evaluate(m, spec, variants);
    metrics::write_report_json(report, a.out / "report.json");
    metrics::write_report_csv(report, a.out / "report.csv");
    cli::RunRecord rec{"eval",
                       {{"task", metrics::to_string(spec.task)},
                        {"manifest", a.manifest.generic_string()},
                        {"direction", spec.direction},
                        {"denoise_levels", spec.denoise_levels},
                        {"models", model_cfg}},
                       0,
                       cli::inputs_hash(inputs)};
    rec.completed = true;
    rec.write(a.out);
    std::cout << metrics::report_csv(report);
    return 0;
}

// ---------------------------------------------------------------- report

int cmd_report(const std::vector<std::string>& files, const fs::path& out, const Common& c) {
    if (files.empty()) {
        throw ConfigError("report needs at least one report.json");
    }
    std::vector<metrics::MetricReport> reports;
    std::vector<fs::path> inputs;
    for (const auto& f : files) {
        reports.push_back(metrics::read_report_json(f));
        inputs.push_back(f);
    }
    const auto merged = metrics::collate(reports);
    cli::prepare_out_dir(out, c.force);
    metrics::write_report_json(merged, out / "report.json");
    metrics::write_report_csv(merged, out / "report.csv");
    cli::RunRecord rec{"report", {{"inputs", files}}, 0, cli::inputs_hash(inputs)};
    rec.completed = true;
    rec.write(out);
    std::cout << metrics::report_csv(merged);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Translate clips between two unpaired video domains"};
    app.require_subcommand(1);
    Common common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_flag("--force", common.force, "Overwrite a non-empty output directory");
        sub->add_option("--jobs", common.jobs, "Worker threads")->check(CLI::PositiveNumber);
    };

    GenArgs gen;
    auto* g = app.add_subcommand("gen", "Generate a synthetic two-domain dataset");
    g->add_option("kind", gen.kind, "volumetric | moving-color")->required();
    g->add_option("--out", gen.out, "Output directory")->required();
    g->add_option("--seed", gen.seed, "Master seed");
    g->add_option("--d", gen.cfg.depth, "Frames per clip");
    g->add_option("--canvas", gen.cfg.canvas, "Frame side in pixels");
    g->add_option("--clips", gen.cfg.clips_per_domain, "Clips per domain");
    g->add_option("--radius", gen.cfg.max_radius, "Maximum erosion radius (volumetric)");
    g->add_option("--colors", gen.cfg.colors, "Palette size (moving-color)");
    g->add_option("--max-speed", gen.cfg.max_speed, "Maximum speed in pixels per frame (moving-color)");
    g->add_option("--train-fraction", gen.cfg.train_fraction, "Share of clips in the train split");
    g->add_option("--images", gen.images, "IDX image archive (default: procedural digits)");
    g->add_option("--labels", gen.labels, "IDX label archive");
    g->add_option("--digits", gen.digits, "Procedural digits to render (default 2 x clips)");
    add_common(g);

    ImportArgs imp;
    auto* im = app.add_subcommand("import", "Import directories of PNG frames as one domain");
    im->add_option("--frames", imp.frames, "Root with one sub-directory of frames per clip")->required();
    im->add_option("--gt", imp.gt, "Root with ground-truth frame directories named like the clips");
    im->add_option("--out", imp.out, "Output directory")->required();
    im->add_option("--channels", imp.channels, "1 or 3");
    im->add_option("--gt-channels", imp.gt_channels, "Ground-truth channels, 1 or 3");
    im->add_option("--stride", imp.stride, "Keep every n-th frame");
    im->add_option("--domain", imp.domain, "Domain name");
    im->add_option("--palette", imp.palette, "JSON list of [r, g, b] class colours");
    im->add_option("--train-fraction", imp.train_fraction, "Share of clips in the train split");
    im->add_option("--seed", imp.seed, "Split seed");
    add_common(im);

    TrainArgs tr;
    auto* t = app.add_subcommand("train", "Train a cycle-consistent translator pair");
    t->add_option("--config", tr.config, "JSON or YAML config");
    t->add_option("--set", tr.overrides, "Dotted override, e.g. train.steps=100");
    t->add_option("--data-a", tr.data_a, "Domain A manifest");
    t->add_option("--data-b", tr.data_b, "Domain B manifest");
    t->add_option("--out", tr.out, "Run directory")->required();
    t->add_option("--strategy", tr.strategy, "random | sequential | seq-const | 3d");
    t->add_option("--steps", tr.steps, "Training steps");
    t->add_option("--frames", tr.frames, "Frames per batch (2D strategies)");
    t->add_option("--depth", tr.depth, "Window depth (3D strategy)");
    t->add_option("--gamma", tr.gamma, "Cycle loss weight");
    t->add_option("--lambda-const", tr.lambda_const, "Const loss weight");
    t->add_option("--adversarial", tr.adversarial, "log | least_squares");
    t->add_option("--pool", tr.pool, "Image pool size");
    t->add_option("--nf", tr.nf, "Generator base width (3D reference)");
    t->add_option("--seed", tr.seed, "Seed");
    t->add_option("--checkpoint-every", tr.checkpoint_every, "Checkpoint cadence in steps (0: final only)");
    t->add_option("--resume", tr.resume, "Checkpoint to resume from");
    t->add_flag("--no-parity", tr.no_parity, "Keep the configured 2D width");
    add_common(t);

    TranslateArgs tl;
    auto* l = app.add_subcommand("translate", "Translate clips with a trained checkpoint");
    l->add_option("--checkpoint", tl.checkpoint, "ckpt_XXXXXX.pt")->required();
    l->add_option("--input", tl.input, "Clip (.vvt) or manifest (.json)")->required();
    l->add_option("--out", tl.out, "Output directory")->required();
    l->add_option("--direction", tl.direction, "a2b | b2a");
    l->add_option("--split", tl.split, "train | test | all (manifest input)");
    l->add_flag("--no-gif", tl.no_gif, "Skip GIF previews");
    l->add_flag("--no-cycle", tl.no_cycle, "Skip the round-trip preview");
    add_common(l);

    EvalArgs ev;
    auto* e = app.add_subcommand("eval", "Evaluate models on a test split");
    e->add_option("--task", ev.task, "colorization | volumetric | segmentation")->required();
    e->add_option("--manifest", ev.manifest, "Input-domain manifest")->required();
    e->add_option("--model", ev.models, "name=checkpoint, or name=oracle for ground truth")->required();
    e->add_option("--direction", ev.direction, "a2b | b2a");
    e->add_option("--denoise-levels", ev.denoise, "Comma-separated label denoising levels");
    e->add_option("--out", ev.out, "Output directory")->required();
    add_common(e);

    std::vector<std::string> report_files;
    fs::path report_out;
    auto* r = app.add_subcommand("report", "Collate metric reports into one table");
    r->add_option("reports", report_files, "report.json files")->required();
    r->add_option("--out", report_out, "Output directory")->required();
    add_common(r);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& err) {
        const int rc = app.exit(err);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*g) return cmd_gen(gen, common);
        if (*im) return cmd_import(imp, common);
        if (*t) return cmd_train(tr, common);
        if (*l) return cmd_translate(tl, common);
        if (*e) return cmd_eval(ev, common);
        if (*r) return cmd_report(report_files, report_out, common);
    } catch (const ConfigError& err) {
        std::cerr << "config error: " << err.what() << "\n";
        return 2;
    } catch (const NumericError& err) {
        std::cerr << "numeric error: " << err.what() << "\n";
        return 4;
    } catch (const DataError& err) {
        std::cerr << "data error: " << err.what() << "\n";
        return 3;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
