#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "srfot/cache.hpp"
#include "srfot/data.hpp"
#include "srfot/harness.hpp"

namespace fs = std::filesystem;
using namespace srfot;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitPartialFailures = 3;

std::string default_run_dir(const std::string& variant) {
    auto now = std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
                   .count();
    return "runs/" + variant + "-" + std::to_string(now);
}

void write_or_print(const std::optional<std::string>& out_path, const std::string& content) {
    if (!out_path) {
        std::cout << content;
        return;
    }
    fs::path path(*out_path);
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + *out_path);
    out << content;
    std::cout << "wrote " << *out_path << "\n";
}

struct PrepareArgs {
    std::string dataset;
    std::string input;
    std::string output;
    std::string split;
    std::optional<long> expect;
    bool paper_counts = false;
    bool strict = false;
};

int cmd_prepare(const PrepareArgs& args) {
    DatasetDescriptor desc;
    desc.id = args.dataset;
    desc.split = args.split.empty() ? paper_split(args.dataset) : args.split;
    desc.source_path = args.input;
    desc.expected_count = args.expect;
    if (args.paper_counts && !desc.expected_count) {
        desc.expected_count = paper_expected_count(args.dataset);
    }
    desc.strict = args.strict;

    LoadReport report;
    std::vector<TaskInstance> instances = load_dataset(desc, &report);
    write_normalized(instances, args.output);
    std::cout << report.summary() << "\n";
    std::cout << "wrote " << args.output << "\n";
    return kExitOk;
}

struct RunArgs {
    std::string dataset;
    std::string data;
    std::string variant = "srfot";
    std::string preset;
    std::string aggregation = "none";
    int top_k = 5;
    std::optional<int> samples;
    std::optional<double> temperature;
    std::optional<double> top_p;
    std::optional<int> max_tokens;
    std::string endpoint;
    std::string model;
    std::string api_key_env = "OPENAI_API_KEY";
    int timeout_s = 60;
    int max_retries = 3;
    int rpm = 0;
    std::string cache_dir = "cache";
    bool temperature_only = false;
    std::string replay;
    int workers = 4;
    std::optional<std::size_t> limit;
    std::uint64_t seed = 0;
    std::string out;
    std::string prompts = "prompts";
    bool freeze_shared_stages = false;
    bool strict_exemplars = false;
    double failure_threshold = 0.05;
};

int cmd_run(const RunArgs& args) {
    RunConfig cfg;
    cfg.dataset.id = args.dataset;
    cfg.dataset.split = paper_split(args.dataset);
    cfg.data_path = args.data;
    cfg.variant = variant_from_string(args.variant);
    cfg.aggregation = aggregation_from_string(args.aggregation);
    cfg.top_k = args.top_k;

    bool temperature_only = args.temperature_only;
    if (!args.preset.empty()) {
        SamplingPreset preset = sampling_preset(args.preset);
        cfg.params = preset.params;
        temperature_only = temperature_only || preset.temperature_only;
    }
    if (args.samples) cfg.params.n_samples = *args.samples;
    if (args.temperature) cfg.params.temperature = *args.temperature;
    if (args.top_p) cfg.params.top_p = *args.top_p;
    if (args.max_tokens) cfg.params.max_tokens = *args.max_tokens;

    if (!args.replay.empty()) {
        cfg.replay = fs::path(args.replay);
    } else {
        ProviderConfig provider;
        provider.endpoint_url = args.endpoint;
        provider.model_id = args.model;
        provider.api_key_env = args.api_key_env;
        provider.timeout_s = args.timeout_s;
        provider.max_retries = args.max_retries;
        provider.requests_per_minute = args.rpm;
        provider.temperature_only = temperature_only;
        provider.cache_dir = args.cache_dir;
        if (provider.endpoint_url.empty() || provider.model_id.empty()) {
            throw ConfigError("live runs need --endpoint and --model (or use --replay)");
        }
        cfg.provider = std::move(provider);
    }

    cfg.worker_count = args.workers;
    cfg.limit = args.limit;
    cfg.seed = args.seed;
    cfg.out_dir = args.out.empty() ? default_run_dir(args.variant) : args.out;
    cfg.prompt_root = args.prompts;
    cfg.freeze_shared_stages = args.freeze_shared_stages;
    cfg.strict_exemplars = args.strict_exemplars;
    cfg.failure_threshold = args.failure_threshold;

    EvalReport report = evaluate(cfg);

    std::cout << "run " << cfg.out_dir.string() << ": " << report.variant << " on "
              << report.dataset_id << "\n";
    std::cout << "  accuracy " << report.correct << "/" << report.total;
    char buf[32];
    std::snprintf(buf, sizeof(buf), " (%.2f%%)", report.accuracy * 100.0);
    std::cout << buf << ", extraction failures " << report.extraction_failures
              << ", stage failures " << report.stage_failures << "\n";
    std::cout << "  report: " << (cfg.out_dir / "report.md").string() << "\n";

    double failure_rate = report.total
                              ? static_cast<double>(report.stage_failures) / report.total
                              : 0.0;
    if (failure_rate > cfg.failure_threshold) {
        std::cerr << "stage failures " << report.stage_failures << "/" << report.total
                  << " exceed threshold\n";
        return kExitPartialFailures;
    }
    return kExitOk;
}

struct ReportArgs {
    std::vector<std::string> runs;
    std::vector<std::string> by;
    std::string format = "md";
    std::optional<std::string> out;
};

int cmd_report(const ReportArgs& args) {
    if (args.runs.empty()) throw ConfigError("--runs needs at least one run directory");
    std::vector<EvalReport> reports;
    for (const auto& dir : args.runs) reports.push_back(load_report(dir));

    // Surface unsupported-axis errors before rendering anything.
    for (const auto& axis : args.by) {
        for (const auto& r : reports) breakdown(r, axis);
    }

    std::string content;
    if (args.format == "md") {
        content = reports.size() == 1 ? report_markdown(reports[0])
                                      : comparison_markdown(reports, args.by);
    } else if (args.format == "csv") {
        content = reports.size() == 1 ? report_csv(reports[0]) : comparison_csv(reports);
    } else if (args.format == "json") {
        if (reports.size() == 1) {
            content = report_json(reports[0]);
        } else {
            std::string joined = "[\n";
            for (std::size_t i = 0; i < reports.size(); ++i) {
                joined += report_json(reports[i]);
                if (i + 1 < reports.size()) joined += ",\n";
            }
            joined += "]\n";
            content = std::move(joined);
        }
    } else {
        throw ConfigError("unknown report format: " + args.format);
    }
    write_or_print(args.out, content);
    return kExitOk;
}

struct AnnotateArgs {
    std::string file;
    std::string run;
    std::optional<std::string> out;
};

int cmd_annotate_import(const AnnotateArgs& args) {
    EvalReport report = load_report(args.run);
    std::vector<AnnotationRecord> records = load_annotations(args.file);
    AnnotationSummary summary = summarize_annotations(records, report);

    fs::copy_file(args.file, fs::path(args.run) / "annotations.jsonl",
                  fs::copy_options::overwrite_existing);
    std::string md = annotation_summary_markdown(summary);
    {
        std::ofstream out(fs::path(args.run) / "annotations.md", std::ios::binary);
        out << md;
    }
    write_or_print(args.out, md);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Five-stage syllogistic reasoning pipelines, baselines and ablations "
                 "over chat-completion endpoints, with replayable evaluation runs"};
    app.set_config("--config", "", "Read options from an INI config file");
    app.require_subcommand(1);

    // data prepare
    auto* data = app.add_subcommand("data", "Dataset ingestion");
    data->require_subcommand(1);
    PrepareArgs prepare_args;
    auto* prepare = data->add_subcommand("prepare", "Normalize an official dataset to JSONL");
    prepare->add_option("--dataset", prepare_args.dataset, "scienceqa | strategyqa | boolq")
        ->required()
        ->check(CLI::IsMember({"scienceqa", "strategyqa", "boolq"}));
    prepare->add_option("--in", prepare_args.input, "Official file or directory")->required();
    prepare->add_option("--out", prepare_args.output, "Normalized JSONL output path")->required();
    prepare->add_option("--split", prepare_args.split, "Override the paper-replication split");
    prepare->add_option("--expect", prepare_args.expect, "Expected instance count");
    prepare->add_flag("--paper-counts", prepare_args.paper_counts,
                      "Check against the published counts (2224/2290/3270)");
    prepare->add_flag("--strict", prepare_args.strict, "Fail on count mismatch");

    // run
    RunArgs run_args;
    auto* run = app.add_subcommand("run", "Evaluate a pipeline variant over a dataset");
    run->add_option("--dataset", run_args.dataset, "Dataset id (selects exemplars/breakdowns)")
        ->required();
    run->add_option("--data", run_args.data, "Normalized JSONL produced by data prepare")
        ->required();
    run->add_option("--variant", run_args.variant, "Pipeline variant id");
    run->add_option("--preset", run_args.preset,
                    "Sampling preset: single | multi | deepseek-single | deepseek-multi");
    run->add_option("--aggregation", run_args.aggregation, "none | sc | ctopk");
    run->add_option("--k", run_args.top_k, "Ballot size for ctopk");
    run->add_option("--samples", run_args.samples, "Override n_samples");
    run->add_option("--temperature", run_args.temperature, "Override temperature");
    run->add_option("--top-p", run_args.top_p, "Override top_p");
    run->add_option("--max-tokens", run_args.max_tokens, "Override max_tokens");
    run->add_option("--endpoint", run_args.endpoint, "OpenAI-compatible base URL");
    run->add_option("--model", run_args.model, "Model id");
    run->add_option("--api-key-env", run_args.api_key_env,
                    "Name of the env var holding the API key");
    run->add_option("--timeout", run_args.timeout_s, "Request timeout seconds");
    run->add_option("--max-retries", run_args.max_retries, "Retry budget");
    run->add_option("--rpm", run_args.rpm, "Requests per minute (0 = unlimited)");
    run->add_option("--cache-dir", run_args.cache_dir, "Completion cache directory");
    run->add_flag("--temperature-only", run_args.temperature_only,
                  "Send temperature but no top_p (DeepSeek-style endpoints)");
    run->add_option("--replay", run_args.replay, "Replay script instead of a live endpoint");
    run->add_option("--workers", run_args.workers, "Concurrent instances");
    run->add_option("--limit", run_args.limit, "Evaluate a seeded subset of this size");
    run->add_option("--seed", run_args.seed, "Subset selection seed");
    run->add_option("--out", run_args.out, "Run directory (default runs/<variant>-<time>)");
    run->add_option("--prompts", run_args.prompts, "Prompt data root");
    run->add_flag("--freeze-shared-stages", run_args.freeze_shared_stages,
                  "Multi-sample runs reuse sample 0's premise stages");
    run->add_flag("--strict-exemplars", run_args.strict_exemplars,
                  "Fail on exemplar count mismatch");
    run->add_option("--failure-threshold", run_args.failure_threshold,
                    "Stage-failure fraction tolerated before exit 3");

    // report
    ReportArgs report_args;
    auto* report = app.add_subcommand("report", "Render or compare run reports");
    report->add_option("--runs", report_args.runs, "Run directories")
        ->required()
        ->delimiter(',');
    report->add_option("--by", report_args.by, "Breakdown axes: subject, grade")->delimiter(',');
    report->add_option("--format", report_args.format, "md | csv | json");
    report->add_option("--out", report_args.out, "Output file (default stdout)");

    // annotate import
    auto* annotate = app.add_subcommand("annotate", "Human annotation ingestion");
    annotate->require_subcommand(1);
    AnnotateArgs annotate_args;
    auto* import = annotate->add_subcommand("import", "Import rigor/error labels for a run");
    import->add_option("--file", annotate_args.file, "Annotation JSONL")->required();
    import->add_option("--run", annotate_args.run, "Run directory")->required();
    import->add_option("--out", annotate_args.out, "Summary output file (default stdout)");

    // cache
    auto* cache = app.add_subcommand("cache", "Completion cache maintenance");
    cache->require_subcommand(1);
    std::string cache_dir = "cache";
    auto* stats = cache->add_subcommand("stats", "Entry and byte counts");
    stats->add_option("--cache-dir", cache_dir, "Cache directory");
    auto* clear = cache->add_subcommand("clear", "Remove all cached completions");
    clear->add_option("--cache-dir", cache_dir, "Cache directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (prepare->parsed()) return cmd_prepare(prepare_args);
        if (run->parsed()) return cmd_run(run_args);
        if (report->parsed()) return cmd_report(report_args);
        if (import->parsed()) return cmd_annotate_import(annotate_args);
        if (stats->parsed()) {
            ResponseCache::Stats s = ResponseCache(cache_dir).stats();
            std::cout << "cache " << cache_dir << ": " << s.entries << " entries, " << s.bytes
                      << " bytes\n";
            return kExitOk;
        }
        if (clear->parsed()) {
            std::size_t removed = ResponseCache(cache_dir).clear();
            std::cout << "cleared " << removed << " cached completions from " << cache_dir
                      << "\n";
            return kExitOk;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return kExitOk;
}
