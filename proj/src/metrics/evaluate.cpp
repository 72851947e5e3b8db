#include "v2v/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <thread>

#include "v2v/errors.hpp"
#include "v2v/metrics.hpp"

namespace v2v::metrics {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(TaskKind t) {
    switch (t) {
        case TaskKind::Colorization: return "colorization";
        case TaskKind::Volumetric: return "volumetric";
        case TaskKind::Segmentation: return "segmentation";
    }
    return "?";
}

TaskKind parse_task(const std::string& s) {
    if (s == "colorization" || s == "color") {
        return TaskKind::Colorization;
    }
    if (s == "volumetric" || s == "volume") {
        return TaskKind::Volumetric;
    }
    if (s == "segmentation" || s == "seg") {
        return TaskKind::Segmentation;
    }
    throw ConfigError("unknown task '" + s + "' (colorization | volumetric | segmentation)");
}

std::vector<std::string> task_columns(TaskKind task, const std::vector<std::uint32_t>& levels) {
    switch (task) {
        case TaskKind::Colorization:
            return {"shape_l2", "intensity_mean", "color_sigma", "temporal_color_sigma"};
        case TaskKind::Volumetric:
            return {"volume_l2"};
        case TaskKind::Segmentation: {
            std::vector<std::string> cols{"accuracy"};
            for (auto l : levels) {
                cols.push_back("trans_l" + std::to_string(l));
            }
            return cols;
        }
    }
    return {};
}

void check_contamination(const DatasetManifest& test, const std::vector<ModelVariant>& models) {
    check_splits_disjoint(test);
    std::set<std::string> test_ids;
    for (const auto* e : test.split(Split::Test)) {
        test_ids.insert(e->id);
    }
    for (const auto& m : models) {
        for (const auto& id : m.train_ids) {
            if (test_ids.count(id)) {
                throw ContaminationError("model '" + m.name + "' was trained on test clip '" + id + "'");
            }
        }
    }
}

namespace {

using ClipScores = std::map<std::string, double>;

ClipScores score_clip(const EvalSpec& spec, const VideoTensor& out, const VideoTensor& gt) {
    const Shape& a = out.shape();
    const Shape& b = gt.shape();
    if (a.d != b.d || a.h != b.h || a.w != b.w) {
        throw DataError("translation shape " + to_string(a) + " does not match ground truth " + to_string(b));
    }
    ClipScores s;
    switch (spec.task) {
        case TaskKind::Colorization: {
            s["shape_l2"] = shape_l2(gt, out);
            if (a.c == 3) {
                try {
                    const ColorStats cs = color_stats(out);
                    s["intensity_mean"] = cs.intensity_mean;
                    s["color_sigma"] = cs.color_sigma;
                    s["temporal_color_sigma"] = temporal_color_sigma(out);
                } catch (const DataError&) {
                    // All-background output: no colour statistics for this clip.
                }
            }
            break;
        }
        case TaskKind::Volumetric:
            s["volume_l2"] = volume_l2(out, gt);
            break;
        case TaskKind::Segmentation: {
            const SegmentationVideo g = rgb_to_labels(gt, spec.palette);
            const SegmentationVideo p = rgb_to_labels(out, spec.palette);
            s["accuracy"] = pixel_accuracy(p, g);
            // Both label videos get the same number of denoising passes.
            for (auto l : spec.denoise_levels) {
                s["trans_l" + std::to_string(l)] = transition_distance(transition_matrix(denoise_labels(p, l)),
                                                                       transition_matrix(denoise_labels(g, l)));
            }
            break;
        }
    }
    return s;
}

template <class Fn>
void for_each_parallel(std::size_t n, unsigned jobs, Fn&& fn) {
    if (jobs <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::vector<std::exception_ptr> errors(jobs);
    {
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
    }
    for (auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

std::string dataset_id(const DatasetManifest& m) {
    return m.kind + "/" + m.domain_name + "/seed" + std::to_string(m.rng_seed);
}

}  // namespace

MetricReport evaluate(const DatasetManifest& test, const EvalSpec& spec, const std::vector<ModelVariant>& models) {
    if (models.empty()) {
        throw ConfigError("evaluate needs at least one model");
    }
    std::set<std::string> names;
    for (const auto& m : models) {
        if (!names.insert(m.name).second) {
            throw ConfigError("duplicate model name '" + m.name + "'");
        }
        if (!m.run) {
            throw ConfigError("model '" + m.name + "' has no translator");
        }
    }
    if (spec.task == TaskKind::Segmentation && spec.palette.empty()) {
        throw ConfigError("segmentation evaluation needs a class palette");
    }
    check_contamination(test, models);

    std::vector<const ClipEntry*> clips = test.split(Split::Test);
    std::sort(clips.begin(), clips.end(), [](const ClipEntry* x, const ClipEntry* y) { return x->id < y->id; });
    if (clips.empty()) {
        throw DataError("manifest has no test clips");
    }
    for (const auto* e : clips) {
        if (!e->gt_path) {
            throw DataError("test clip '" + e->id + "' has no ground truth");
        }
    }

    MetricReport report;
    report.dataset_id = dataset_id(test);
    report.task = to_string(spec.task);
    report.direction = spec.direction;
    report.denoise_levels = spec.task == TaskKind::Segmentation ? spec.denoise_levels : std::vector<std::uint32_t>{};
    report.columns = task_columns(spec.task, spec.denoise_levels);
    report.test_clips = clips.size();

    for (const auto& model : models) {
        std::vector<ClipScores> scores(clips.size());
        for_each_parallel(clips.size(), spec.jobs, [&](std::size_t i) {
            const ClipEntry& e = *clips[i];
            const VideoTensor input = test.load(e);
            const VideoTensor out = model.run(input, e);
            scores[i] = score_clip(spec, out, test.load_gt(e));
        });
        MetricRow row;
        row.model = model.name;
        for (const auto& col : report.columns) {
            MetricSummary s;
            double sum = 0.0;
            for (const auto& cs : scores) {
                if (auto it = cs.find(col); it != cs.end()) {
                    sum += it->second;
                    ++s.n;
                }
            }
            if (s.n > 0) {
                s.mean = sum / static_cast<double>(s.n);
                double var = 0.0;
                for (const auto& cs : scores) {
                    if (auto it = cs.find(col); it != cs.end()) {
                        var += (it->second - s.mean) * (it->second - s.mean);
                    }
                }
                s.std = std::sqrt(var / static_cast<double>(s.n));
            }
            row.metrics[col] = s;
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

json to_json(const MetricReport& r) {
    json rows = json::array();
    for (const auto& row : r.rows) {
        json metrics = json::object();
        for (const auto& [k, s] : row.metrics) {
            metrics[k] = {{"mean", s.mean}, {"std", s.std}, {"n", s.n}};
        }
        rows.push_back({{"model", row.model}, {"metrics", metrics}});
    }
    return {{"schema_version", r.schema_version},
            {"dataset_id", r.dataset_id},
            {"task", r.task},
            {"direction", r.direction},
            {"denoise_levels", r.denoise_levels},
            {"columns", r.columns},
            {"test_clips", r.test_clips},
            {"rows", rows}};
}

MetricReport report_from_json(const json& j) {
    try {
        MetricReport r;
        r.schema_version = j.at("schema_version").get<int>();
        if (r.schema_version != MetricReport::kSchemaVersion) {
            throw FormatError("unsupported metric report schema version " + std::to_string(r.schema_version));
        }
        r.dataset_id = j.at("dataset_id").get<std::string>();
        r.task = j.at("task").get<std::string>();
        r.direction = j.value("direction", "");
        r.denoise_levels = j.value("denoise_levels", std::vector<std::uint32_t>{});
        r.columns = j.at("columns").get<std::vector<std::string>>();
        r.test_clips = j.value("test_clips", std::size_t{0});
        for (const auto& row : j.at("rows")) {
            MetricRow mr;
            mr.model = row.at("model").get<std::string>();
            for (const auto& [k, v] : row.at("metrics").items()) {
                mr.metrics[k] = {v.at("mean").get<double>(), v.at("std").get<double>(), v.at("n").get<std::size_t>()};
            }
            r.rows.push_back(std::move(mr));
        }
        return r;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed metric report: ") + e.what());
    }
}

void write_report_json(const MetricReport& r, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << to_json(r).dump(2) << "\n";
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
}

MetricReport read_report_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open metric report " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return report_from_json(j);
}

std::string report_csv(const MetricReport& r) {
    std::string out = "model";
    for (const auto& c : r.columns) {
        out += "," + c + "," + c + "_std";
    }
    out += "\n";
    char buf[64];
    for (const auto& row : r.rows) {
        out += row.model;
        for (const auto& c : r.columns) {
            const auto it = row.metrics.find(c);
            if (it == row.metrics.end() || it->second.n == 0) {
                out += ",,";
                continue;
            }
            std::snprintf(buf, sizeof(buf), ",%.6f,%.6f", it->second.mean, it->second.std);
            out += buf;
        }
        out += "\n";
    }
    return out;
}

void write_report_csv(const MetricReport& r, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << report_csv(r);
    if (!out) {
        throw DataError("cannot write " + path.string());
    }
}

MetricReport collate(const std::vector<MetricReport>& reports) {
    if (reports.empty()) {
        throw ConfigError("nothing to collate");
    }
    MetricReport out;
    auto join_unique = [&](auto field) {
        std::vector<std::string> seen;
        for (const auto& r : reports) {
            const std::string& v = r.*field;
            if (std::find(seen.begin(), seen.end(), v) == seen.end()) {
                seen.push_back(v);
            }
        }
        std::string s;
        for (std::size_t i = 0; i < seen.size(); ++i) {
            s += (i ? ";" : "") + seen[i];
        }
        return s;
    };
    out.dataset_id = join_unique(&MetricReport::dataset_id);
    out.task = join_unique(&MetricReport::task);
    out.direction = join_unique(&MetricReport::direction);
    for (const auto& r : reports) {
        for (const auto& c : r.columns) {
            if (std::find(out.columns.begin(), out.columns.end(), c) == out.columns.end()) {
                out.columns.push_back(c);
            }
        }
        for (auto l : r.denoise_levels) {
            if (std::find(out.denoise_levels.begin(), out.denoise_levels.end(), l) == out.denoise_levels.end()) {
                out.denoise_levels.push_back(l);
            }
        }
        out.test_clips = std::max(out.test_clips, r.test_clips);
        for (const auto& row : r.rows) {
            out.rows.push_back(row);
        }
    }
    return out;
}

}  // namespace v2v::metrics
