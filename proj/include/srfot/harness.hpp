#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "srfot/core.hpp"
#include "srfot/data.hpp"
#include "srfot/provider.hpp"

namespace srfot {

enum class Aggregation { None, SelfConsistency, ComplexityTopK };

std::string_view to_string(Aggregation a);
Aggregation aggregation_from_string(std::string_view s);

// Named sampling presets from the experimental setup: single-round
// {top_p 0.3, temperature 0.2, n 1}, multi-round {0.7, 0.9, n 10}, and the
// DeepSeek pair that pins temperature 1 and sends no top_p.
struct SamplingPreset {
    SamplingParams params;
    bool temperature_only = false;
};
SamplingPreset sampling_preset(const std::string& name);

struct RunConfig {
    DatasetDescriptor dataset;            // id + optional expected count
    std::filesystem::path data_path;      // normalized JSONL
    VariantId variant = VariantId::SRFoT;
    Aggregation aggregation = Aggregation::None;
    int top_k = 5;                        // ComplexityTopK ballot size
    SamplingParams params;
    std::optional<ProviderConfig> provider;        // live endpoint
    std::optional<std::filesystem::path> replay;   // or scripted provider
    int worker_count = 4;
    std::optional<std::size_t> limit;     // seeded subset size
    std::uint64_t seed = 0;
    std::filesystem::path out_dir;        // run directory
    std::filesystem::path prompt_root = "prompts";
    bool freeze_shared_stages = false;
    bool strict_exemplars = false;
    double failure_threshold = 0.05;      // stage-failure fraction before exit 3
};

void validate(const RunConfig& cfg);  // throws ConfigError

// Deterministic seeded subset: indices into [0, n), ascending.
std::vector<std::size_t> seeded_subset(std::size_t n, std::size_t limit, std::uint64_t seed);

struct InstanceVerdict {
    std::string instance_id;
    std::string gold;
    std::optional<std::string> predicted;
    bool correct = false;
    bool extraction_failed = false;  // no sample yielded a parseable answer
    bool stage_failed = false;       // no sample completed its stages
    int considered = 0;              // samples included in the ballot
    Subject subject = Subject::None;
    GradeBand grade = GradeBand::None;
};

struct GroupStat {
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy() const { return total ? static_cast<double>(correct) / total : 0.0; }
};

struct EvalReport {
    std::string dataset_id;
    std::string variant;
    std::string aggregation;
    std::size_t total = 0;
    std::size_t correct = 0;
    double accuracy = 0.0;
    std::size_t extraction_failures = 0;
    std::size_t stage_failures = 0;
    std::map<std::string, GroupStat> by_subject;  // scienceqa only
    std::map<std::string, GroupStat> by_grade;    // scienceqa only
    std::vector<InstanceVerdict> verdicts;        // dataset order
};

// Runs the configured pipeline (+aggregation) over the selected instances
// with a bounded worker pool; persists config.snapshot, transcripts.jsonl and
// report.{json,md,csv} under cfg.out_dir.
EvalReport evaluate(const RunConfig& cfg);

struct BreakdownRow {
    std::string group;
    GroupStat stat;
};
struct BreakdownTable {
    std::vector<BreakdownRow> rows;
    GroupStat overall;  // the "Average" line; equals overall accuracy
};
// axis: "subject" or "grade"; errors on reports without subcategories.
BreakdownTable breakdown(const EvalReport& report, const std::string& axis);

struct AnnotationRecord {
    std::string instance_id;
    std::optional<bool> rigorous;              // manual rigor label
    std::optional<std::string> error_source;   // MaPE | MiPQE | MiPE | FRPE
};

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path);

struct AnnotationSummary {
    std::size_t rigor_labeled = 0;
    std::size_t rigorous = 0;
    std::optional<double> rigor_rate;               // absent when nothing labeled
    std::map<std::string, std::size_t> error_counts;
    std::size_t error_labeled = 0;
};

// Validates ids against the report (UnknownInstanceId) and that error sources
// only appear on incorrect instances.
AnnotationSummary summarize_annotations(const std::vector<AnnotationRecord>& records,
                                        const EvalReport& report);

std::string annotation_summary_markdown(const AnnotationSummary& summary);

// Deterministic single-run serializations.
std::string report_json(const EvalReport& report);
EvalReport report_from_json(const std::string& text);
std::string report_markdown(const EvalReport& report);
std::string report_csv(const EvalReport& report);

EvalReport load_report(const std::filesystem::path& run_dir);

// Multi-run comparison: one row per method; optional subject/grade columns.
std::string comparison_markdown(const std::vector<EvalReport>& reports,
                                const std::vector<std::string>& axes);
// Per-instance join across runs by id; runs missing an instance get blanks.
std::string comparison_csv(const std::vector<EvalReport>& reports);

}  // namespace srfot
