#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "v2v/manifest.hpp"
#include "v2v/video.hpp"

namespace v2v::metrics {

enum class TaskKind { Colorization, Volumetric, Segmentation };

const char* to_string(TaskKind t);
TaskKind parse_task(const std::string& s);

/// A model under evaluation: maps a test clip to its translation.
struct ModelVariant {
    std::string name;
    std::function<VideoTensor(const VideoTensor& input, const ClipEntry& entry)> run;
    std::vector<std::string> train_ids;  // checked against the test split
};

struct EvalSpec {
    TaskKind task = TaskKind::Volumetric;
    std::string direction = "a2b";
    std::vector<std::uint32_t> denoise_levels{0, 1, 2};
    std::vector<Rgb> palette;  // segmentation classes
    unsigned jobs = 1;
};

struct MetricSummary {
    double mean = 0.0;
    double std = 0.0;  // population
    std::size_t n = 0;
};

struct MetricRow {
    std::string model;
    std::map<std::string, MetricSummary> metrics;
};

struct MetricReport {
    static constexpr int kSchemaVersion = 1;

    int schema_version = kSchemaVersion;
    std::string dataset_id;
    std::string task;
    std::string direction;
    std::vector<std::uint32_t> denoise_levels;
    std::vector<std::string> columns;
    std::vector<MetricRow> rows;
    std::size_t test_clips = 0;
};

/// Metric columns for a task, in table order.
std::vector<std::string> task_columns(TaskKind task, const std::vector<std::uint32_t>& denoise_levels);

/// Throws ContaminationError if the manifest reuses an id across splits or
/// a model's training ids overlap the test split.
void check_contamination(const DatasetManifest& test, const std::vector<ModelVariant>& models);

/// Translates every test clip with every model and aggregates per column.
/// Aggregation follows clip-id order, so input order does not matter.
MetricReport evaluate(const DatasetManifest& test, const EvalSpec& spec, const std::vector<ModelVariant>& models);

nlohmann::json to_json(const MetricReport& r);
MetricReport report_from_json(const nlohmann::json& j);

void write_report_json(const MetricReport& r, const std::filesystem::path& path);
MetricReport read_report_json(const std::filesystem::path& path);

/// model, then `<col>` and `<col>_std` per column; fixed six-decimal cells.
std::string report_csv(const MetricReport& r);
void write_report_csv(const MetricReport& r, const std::filesystem::path& path);

/// Stacks the rows of several reports into one table over the union of
/// their columns; cells a report lacks are left empty in the CSV.
MetricReport collate(const std::vector<MetricReport>& reports);

}  // namespace v2v::metrics
