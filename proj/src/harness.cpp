#include "srfot/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "srfot/aggregate.hpp"
#include "srfot/pipeline.hpp"
#include "srfot/provider_http.hpp"
#include "srfot/replay.hpp"

namespace srfot {

using nlohmann::json;

std::string_view to_string(Aggregation a) {
    switch (a) {
        case Aggregation::None: return "none";
        case Aggregation::SelfConsistency: return "sc";
        case Aggregation::ComplexityTopK: return "ctopk";
    }
    return "none";
}

Aggregation aggregation_from_string(std::string_view s) {
    if (s == "none") return Aggregation::None;
    if (s == "sc") return Aggregation::SelfConsistency;
    if (s == "ctopk") return Aggregation::ComplexityTopK;
    throw ConfigError("unknown aggregation: " + std::string(s));
}

SamplingPreset sampling_preset(const std::string& name) {
    SamplingPreset preset;
    if (name == "single") {
        preset.params = SamplingParams{0.2, 0.3, 1, 1024};
    } else if (name == "multi") {
        preset.params = SamplingParams{0.9, 0.7, 10, 1024};
    } else if (name == "deepseek-single") {
        preset.params = SamplingParams{1.0, 1.0, 1, 1024};
        preset.temperature_only = true;
    } else if (name == "deepseek-multi") {
        preset.params = SamplingParams{1.0, 1.0, 10, 1024};
        preset.temperature_only = true;
    } else {
        throw ConfigError("unknown sampling preset: " + name);
    }
    return preset;
}

void validate(const RunConfig& cfg) {
    if (cfg.dataset.id.empty()) throw ConfigError("dataset id is empty");
    if (cfg.data_path.empty()) throw ConfigError("data path is empty");
    validate(cfg.params);
    if (cfg.aggregation == Aggregation::None && cfg.params.n_samples != 1) {
        throw ConfigError("aggregation=none requires n_samples=1");
    }
    if (cfg.aggregation != Aggregation::None && cfg.params.n_samples < 2) {
        throw ConfigError("self-consistency aggregation requires n_samples >= 2");
    }
    if (cfg.aggregation == Aggregation::ComplexityTopK && cfg.top_k < 1) {
        throw ConfigError("complexity top-k requires k >= 1");
    }
    if (cfg.worker_count < 1) throw ConfigError("worker_count must be >= 1");
    if (cfg.limit && *cfg.limit == 0) {
        throw ConfigError("EmptySelection: limit must select at least one instance");
    }
    if (cfg.provider.has_value() == cfg.replay.has_value()) {
        throw ConfigError("configure exactly one of a live provider or a replay script");
    }
    if (cfg.provider) validate(*cfg.provider);
    if (cfg.failure_threshold < 0.0 || cfg.failure_threshold > 1.0) {
        throw ConfigError("failure_threshold must be within [0, 1]");
    }
}

std::vector<std::size_t> seeded_subset(std::size_t n, std::size_t limit, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    const std::size_t take = std::min(limit, n);
    for (std::size_t i = 0; i < take; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
        std::swap(idx[i], idx[j]);
    }
    idx.resize(take);
    std::sort(idx.begin(), idx.end());
    return idx;
}

namespace {

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

std::string format_percent(double fraction, int decimals = 2) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, fraction * 100.0);
    return buf;
}

struct InstanceResult {
    InstanceVerdict verdict;
    std::vector<Transcript> transcripts;
};

InstanceResult judge_instance(const RunConfig& cfg, const PipelineSpec& spec,
                              const TaskInstance& inst, Provider& provider,
                              const PromptEnv& env) {
    InstanceResult result;
    result.transcripts =
        run_multi(spec, inst, cfg.params, provider, env, cfg.freeze_shared_stages);

    InstanceVerdict& v = result.verdict;
    v.instance_id = inst.id;
    v.gold = inst.gold.value();
    v.subject = inst.meta.subject;
    v.grade = inst.meta.grade_band;

    std::vector<std::pair<AnswerKey, int>> ballot;  // answer + complexity score
    bool any_completed = false;
    for (const Transcript& t : result.transcripts) {
        if (!t.ok()) continue;
        any_completed = true;
        if (t.extracted) {
            ballot.emplace_back(*t.extracted,
                                complexity_score(t.stages.back().raw_completion));
        }
    }
    v.considered = static_cast<int>(ballot.size());
    if (ballot.empty()) {
        v.stage_failed = !any_completed;
        v.extraction_failed = any_completed;
        return result;
    }

    switch (cfg.aggregation) {
        case Aggregation::None:
            v.predicted = ballot.front().first.value();
            break;
        case Aggregation::SelfConsistency: {
            std::vector<AnswerKey> answers;
            answers.reserve(ballot.size());
            for (const auto& [key, score] : ballot) answers.push_back(key);
            v.predicted = majority_vote(answers).winner.value();
            break;
        }
        case Aggregation::ComplexityTopK: {
            int k = std::min<int>(cfg.top_k, static_cast<int>(ballot.size()));
            v.predicted = complexity_vote(ballot, k).winner.value();
            break;
        }
    }
    v.correct = v.predicted == v.gold;
    return result;
}

json group_stats_to_json(const std::map<std::string, GroupStat>& groups) {
    json out = json::object();
    for (const auto& [name, stat] : groups) {
        out[name] = json{{"total", stat.total}, {"correct", stat.correct}};
    }
    return out;
}

std::map<std::string, GroupStat> group_stats_from_json(const json& j) {
    std::map<std::string, GroupStat> out;
    for (const auto& item : j.items()) {
        out[item.key()] = GroupStat{item.value().at("total").get<std::size_t>(),
                                    item.value().at("correct").get<std::size_t>()};
    }
    return out;
}

void persist_run(const RunConfig& cfg, const EvalReport& report,
                 const std::vector<InstanceResult>& results) {
    std::filesystem::create_directories(cfg.out_dir);

    json snapshot{
        {"dataset", {{"id", cfg.dataset.id}, {"split", cfg.dataset.split}}},
        {"data_path", cfg.data_path.string()},
        {"variant", to_string(cfg.variant)},
        {"aggregation", to_string(cfg.aggregation)},
        {"top_k", cfg.top_k},
        {"params",
         {{"temperature", cfg.params.temperature},
          {"top_p", cfg.params.top_p},
          {"n_samples", cfg.params.n_samples},
          {"max_tokens", cfg.params.max_tokens}}},
        {"worker_count", cfg.worker_count},
        {"limit", cfg.limit ? json(*cfg.limit) : json(nullptr)},
        {"seed", cfg.seed},
        {"freeze_shared_stages", cfg.freeze_shared_stages},
        {"prompt_root", cfg.prompt_root.string()},
    };
    if (cfg.provider) {
        // The API key itself never lands in the snapshot, only the env var name.
        snapshot["provider"] = {{"endpoint_url", cfg.provider->endpoint_url},
                                {"model_id", cfg.provider->model_id},
                                {"api_key_env", cfg.provider->api_key_env},
                                {"temperature_only", cfg.provider->temperature_only}};
    }
    if (cfg.replay) snapshot["replay"] = cfg.replay->string();

    std::ofstream snap(cfg.out_dir / "config.snapshot");
    snap << snapshot.dump(2) << "\n";

    std::ofstream transcripts(cfg.out_dir / "transcripts.jsonl", std::ios::binary);
    for (const auto& r : results) {
        for (const auto& t : r.transcripts) transcripts << transcript_to_jsonl(t) << "\n";
    }

    std::ofstream rj(cfg.out_dir / "report.json", std::ios::binary);
    rj << report_json(report);
    std::ofstream rm(cfg.out_dir / "report.md", std::ios::binary);
    rm << report_markdown(report);
    std::ofstream rc(cfg.out_dir / "report.csv", std::ios::binary);
    rc << report_csv(report);
}

}  // namespace

EvalReport evaluate(const RunConfig& cfg) {
    validate(cfg);

    std::vector<TaskInstance> all = load_normalized(cfg.data_path);
    if (all.empty()) throw ConfigError("EmptySelection: dataset is empty");
    std::vector<std::size_t> selected(all.size());
    std::iota(selected.begin(), selected.end(), std::size_t{0});
    if (cfg.limit) selected = seeded_subset(all.size(), *cfg.limit, cfg.seed);

    std::unique_ptr<Provider> provider;
    if (cfg.replay) {
        provider = ReplayProvider::load(*cfg.replay);
    } else {
        provider = std::make_unique<HttpProvider>(*cfg.provider);
    }

    TemplateLibrary templates(cfg.prompt_root / "templates");
    ExemplarLibrary exemplars(cfg.prompt_root / "exemplars", cfg.strict_exemplars);
    PromptEnv env{&templates, &exemplars, cfg.dataset.id};
    const PipelineSpec spec = build_variant(cfg.variant);

    std::vector<InstanceResult> results(selected.size());
    std::atomic<std::size_t> cursor{0};
    std::exception_ptr first_error;
    std::mutex error_mu;

    auto worker = [&]() {
        while (true) {
            std::size_t i = cursor.fetch_add(1);
            if (i >= selected.size()) return;
            try {
                results[i] = judge_instance(cfg, spec, all[selected[i]], *provider, env);
            } catch (...) {
                std::lock_guard lock(error_mu);
                if (!first_error) first_error = std::current_exception();
            }
        }
    };
    const int pool = std::max(1, std::min<int>(cfg.worker_count,
                                               static_cast<int>(selected.size())));
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(pool));
    for (int i = 0; i < pool; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);

    EvalReport report;
    report.dataset_id = cfg.dataset.id;
    report.variant = to_string(cfg.variant);
    report.aggregation = to_string(cfg.aggregation);
    report.total = results.size();
    for (const auto& r : results) {
        const InstanceVerdict& v = r.verdict;
        if (v.correct) ++report.correct;
        if (v.extraction_failed) ++report.extraction_failures;
        if (v.stage_failed) ++report.stage_failures;
        if (v.subject != Subject::None) {
            GroupStat& g = report.by_subject[std::string(to_string(v.subject))];
            ++g.total;
            if (v.correct) ++g.correct;
        }
        if (v.grade != GradeBand::None) {
            GroupStat& g = report.by_grade[std::string(to_string(v.grade))];
            ++g.total;
            if (v.correct) ++g.correct;
        }
        report.verdicts.push_back(v);
    }
    report.accuracy =
        report.total ? static_cast<double>(report.correct) / static_cast<double>(report.total)
                     : 0.0;

    if (!cfg.out_dir.empty()) persist_run(cfg, report, results);
    return report;
}

BreakdownTable breakdown(const EvalReport& report, const std::string& axis) {
    const std::map<std::string, GroupStat>* groups = nullptr;
    std::vector<std::string> order;
    if (axis == "subject") {
        groups = &report.by_subject;
        order = {"natural", "social", "language"};
    } else if (axis == "grade") {
        groups = &report.by_grade;
        order = {"g1_6", "g7_12"};
    } else {
        throw ConfigError("unsupported breakdown axis: " + axis);
    }
    if (groups->empty()) {
        throw ConfigError("axis '" + axis + "' unsupported for dataset " + report.dataset_id +
                          " (no subcategory metadata)");
    }
    BreakdownTable table;
    for (const auto& name : order) {
        auto it = groups->find(name);
        if (it != groups->end()) table.rows.push_back(BreakdownRow{name, it->second});
    }
    table.overall = GroupStat{report.total, report.correct};
    return table;
}

std::vector<AnnotationRecord> load_annotations(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(DataError::Code::FileMissing, "annotation file missing: " + path.string());
    static const std::set<std::string> kSources = {"MaPE", "MiPQE", "MiPE", "FRPE"};
    std::vector<AnnotationRecord> records;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& ex) {
            throw DataError(DataError::Code::SchemaMismatch,
                            path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
        }
        AnnotationRecord rec;
        rec.instance_id = j.at("instance_id").get<std::string>();
        if (j.contains("rigor") && !j.at("rigor").is_null()) {
            std::string rigor = j.at("rigor").get<std::string>();
            if (rigor == "rigorous") {
                rec.rigorous = true;
            } else if (rigor == "not_rigorous") {
                rec.rigorous = false;
            } else {
                throw DataError(DataError::Code::SchemaMismatch,
                                path.string() + ":" + std::to_string(lineno) +
                                    ": rigor must be rigorous|not_rigorous");
            }
        }
        if (j.contains("error_source") && !j.at("error_source").is_null()) {
            std::string source = j.at("error_source").get<std::string>();
            if (!kSources.count(source)) {
                throw DataError(DataError::Code::SchemaMismatch,
                                path.string() + ":" + std::to_string(lineno) +
                                    ": unknown error_source '" + source + "'");
            }
            rec.error_source = source;
        }
        records.push_back(std::move(rec));
    }
    return records;
}

AnnotationSummary summarize_annotations(const std::vector<AnnotationRecord>& records,
                                        const EvalReport& report) {
    std::map<std::string, const InstanceVerdict*> by_id;
    for (const auto& v : report.verdicts) by_id[v.instance_id] = &v;

    AnnotationSummary summary;
    for (const auto& rec : records) {
        auto it = by_id.find(rec.instance_id);
        if (it == by_id.end()) {
            throw ValidationError(ValidationError::Code::UnknownInstanceId,
                                  "annotation references unknown instance: " + rec.instance_id);
        }
        if (rec.rigorous.has_value()) {
            ++summary.rigor_labeled;
            if (*rec.rigorous) ++summary.rigorous;
        }
        if (rec.error_source) {
            if (it->second->correct) {
                throw ValidationError(ValidationError::Code::InvalidAnnotation,
                                      "error_source on a correct instance: " + rec.instance_id);
            }
            ++summary.error_counts[*rec.error_source];
            ++summary.error_labeled;
        }
    }
    if (summary.rigor_labeled > 0) {
        summary.rigor_rate = static_cast<double>(summary.rigorous) /
                             static_cast<double>(summary.rigor_labeled);
    }
    return summary;
}

std::string annotation_summary_markdown(const AnnotationSummary& summary) {
    std::ostringstream out;
    out << "## Rigor\n\n";
    out << "| Rigorous | Not rigorous | Rigor rate |\n|---|---|---|\n";
    out << "| " << summary.rigorous << " | " << (summary.rigor_labeled - summary.rigorous)
        << " | ";
    if (summary.rigor_rate) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", *summary.rigor_rate);
        out << buf;
    } else {
        out << "n/a";
    }
    out << " |\n\n";
    out << "## Error sources\n\n";
    out << "| MaPE | MiPQE | MiPE | FRPE |\n|---|---|---|---|\n|";
    for (const char* source : {"MaPE", "MiPQE", "MiPE", "FRPE"}) {
        std::size_t count = 0;
        if (auto it = summary.error_counts.find(source); it != summary.error_counts.end()) {
            count = it->second;
        }
        out << " " << count;
        if (summary.error_labeled > 0) {
            char buf[32];
            std::snprintf(buf, sizeof(buf), " (%.0f%%)",
                          100.0 * static_cast<double>(count) /
                              static_cast<double>(summary.error_labeled));
            out << buf;
        }
        out << " |";
    }
    out << "\n";
    return out.str();
}

std::string report_json(const EvalReport& report) {
    json verdicts = json::array();
    for (const auto& v : report.verdicts) {
        verdicts.push_back(json{
            {"id", v.instance_id},
            {"gold", v.gold},
            {"predicted", v.predicted ? json(*v.predicted) : json(nullptr)},
            {"correct", v.correct},
            {"extraction_failed", v.extraction_failed},
            {"stage_failed", v.stage_failed},
            {"considered", v.considered},
            {"subject", std::string(to_string(v.subject))},
            {"grade", std::string(to_string(v.grade))},
        });
    }
    json j{
        {"dataset", report.dataset_id},
        {"variant", report.variant},
        {"aggregation", report.aggregation},
        {"total", report.total},
        {"correct", report.correct},
        {"accuracy", report.accuracy},
        {"extraction_failures", report.extraction_failures},
        {"stage_failures", report.stage_failures},
        {"by_subject", group_stats_to_json(report.by_subject)},
        {"by_grade", group_stats_to_json(report.by_grade)},
        {"verdicts", std::move(verdicts)},
    };
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& ex) {
        throw IoError(std::string("bad report json: ") + ex.what());
    }
    EvalReport report;
    report.dataset_id = j.at("dataset").get<std::string>();
    report.variant = j.at("variant").get<std::string>();
    report.aggregation = j.at("aggregation").get<std::string>();
    report.total = j.at("total").get<std::size_t>();
    report.correct = j.at("correct").get<std::size_t>();
    report.accuracy = j.at("accuracy").get<double>();
    report.extraction_failures = j.at("extraction_failures").get<std::size_t>();
    report.stage_failures = j.at("stage_failures").get<std::size_t>();
    report.by_subject = group_stats_from_json(j.at("by_subject"));
    report.by_grade = group_stats_from_json(j.at("by_grade"));
    for (const auto& vj : j.at("verdicts")) {
        InstanceVerdict v;
        v.instance_id = vj.at("id").get<std::string>();
        v.gold = vj.at("gold").get<std::string>();
        if (!vj.at("predicted").is_null()) v.predicted = vj.at("predicted").get<std::string>();
        v.correct = vj.at("correct").get<bool>();
        v.extraction_failed = vj.at("extraction_failed").get<bool>();
        v.stage_failed = vj.at("stage_failed").get<bool>();
        v.considered = vj.at("considered").get<int>();
        v.subject = subject_from_string(vj.at("subject").get<std::string>());
        v.grade = grade_band_from_string(vj.at("grade").get<std::string>());
        report.verdicts.push_back(std::move(v));
    }
    return report;
}

namespace {

std::string display_group(const std::string& key) {
    if (key == "natural") return "Natural";
    if (key == "social") return "Social";
    if (key == "language") return "Language";
    if (key == "g1_6") return "Grade1-6";
    if (key == "g7_12") return "Grade7-12";
    return key;
}

void append_breakdown_table(std::ostringstream& out, const EvalReport& report,
                            const std::string& axis) {
    BreakdownTable table = breakdown(report, axis);
    out << "\n## By " << axis << "\n\n|";
    for (const auto& row : table.rows) out << " " << display_group(row.group) << " |";
    out << " Average |\n|";
    for (std::size_t i = 0; i <= table.rows.size(); ++i) out << "---|";
    out << "\n|";
    for (const auto& row : table.rows) out << " " << format_percent(row.stat.accuracy()) << " |";
    out << " " << format_percent(table.overall.accuracy()) << " |\n";
}

}  // namespace

std::string report_markdown(const EvalReport& report) {
    std::ostringstream out;
    out << "# Evaluation report\n\n";
    out << "| Method | Dataset | Aggregation | Accuracy (%) | Correct | Total | "
           "Extraction failures | Stage failures |\n";
    out << "|---|---|---|---|---|---|---|---|\n";
    out << "| " << report.variant << " | " << report.dataset_id << " | " << report.aggregation
        << " | " << format_percent(report.accuracy) << " | " << report.correct << " | "
        << report.total << " | " << report.extraction_failures << " | "
        << report.stage_failures << " |\n";
    if (!report.by_subject.empty()) append_breakdown_table(out, report, "subject");
    if (!report.by_grade.empty()) append_breakdown_table(out, report, "grade");
    return out.str();
}

std::string report_csv(const EvalReport& report) {
    std::ostringstream out;
    out << "dataset,variant,aggregation,total,correct,accuracy,extraction_failures,"
           "stage_failures\n";
    out << report.dataset_id << "," << report.variant << "," << report.aggregation << ","
        << report.total << "," << report.correct << "," << format_double(report.accuracy) << ","
        << report.extraction_failures << "," << report.stage_failures << "\n";
    return out.str();
}

EvalReport load_report(const std::filesystem::path& run_dir) {
    std::ifstream in(run_dir / "report.json", std::ios::binary);
    if (!in) throw IoError("no report.json under " + run_dir.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return report_from_json(ss.str());
}

std::string comparison_markdown(const std::vector<EvalReport>& reports,
                                const std::vector<std::string>& axes) {
    std::ostringstream out;
    out << "# Method comparison\n\n";
    out << "| Method | Dataset | Aggregation | Accuracy (%) | Total |\n|---|---|---|---|---|\n";
    for (const auto& r : reports) {
        out << "| " << r.variant << " | " << r.dataset_id << " | " << r.aggregation << " | "
            << format_percent(r.accuracy) << " | " << r.total << " |\n";
    }
    for (const auto& axis : axes) {
        std::vector<std::string> order =
            axis == "subject" ? std::vector<std::string>{"natural", "social", "language"}
                              : std::vector<std::string>{"g1_6", "g7_12"};
        out << "\n## By " << axis << "\n\n| Method |";
        for (const auto& g : order) out << " " << display_group(g) << " |";
        out << " Average |\n|";
        for (std::size_t i = 0; i <= order.size() + 1; ++i) out << "---|";
        out << "\n";
        for (const auto& r : reports) {
            out << "| " << r.variant << " |";
            const auto& groups = axis == "subject" ? r.by_subject : r.by_grade;
            for (const auto& g : order) {
                auto it = groups.find(g);
                if (it == groups.end()) {
                    out << "  |";
                } else {
                    out << " " << format_percent(it->second.accuracy()) << " |";
                }
            }
            out << " " << format_percent(r.total ? static_cast<double>(r.correct) / r.total : 0.0)
                << " |\n";
        }
    }

    // Flag coverage gaps instead of dropping instances silently.
    std::set<std::string> union_ids;
    for (const auto& r : reports) {
        for (const auto& v : r.verdicts) union_ids.insert(v.instance_id);
    }
    for (const auto& r : reports) {
        if (r.verdicts.size() != union_ids.size()) {
            out << "\nNote: run '" << r.variant << "' covers " << r.verdicts.size() << " of "
                << union_ids.size() << " instances; missing instances appear blank in the CSV "
                << "comparison.\n";
        }
    }
    return out.str();
}

std::string comparison_csv(const std::vector<EvalReport>& reports) {
    // Row order: first run's instance order, then any extra ids sorted.
    std::vector<std::string> ids;
    std::set<std::string> seen;
    for (const auto& r : reports) {
        for (const auto& v : r.verdicts) {
            if (seen.insert(v.instance_id).second) ids.push_back(v.instance_id);
        }
    }
    std::vector<std::map<std::string, const InstanceVerdict*>> lookups;
    for (const auto& r : reports) {
        std::map<std::string, const InstanceVerdict*> m;
        for (const auto& v : r.verdicts) m[v.instance_id] = &v;
        lookups.push_back(std::move(m));
    }
    std::ostringstream out;
    out << "instance_id,gold";
    for (const auto& r : reports) out << "," << r.variant << "." << r.aggregation;
    out << "\n";
    for (const auto& id : ids) {
        std::string gold;
        for (const auto& lookup : lookups) {
            if (auto it = lookup.find(id); it != lookup.end()) {
                gold = it->second->gold;
                break;
            }
        }
        out << id << "," << gold;
        for (const auto& lookup : lookups) {
            auto it = lookup.find(id);
            if (it == lookup.end()) {
                out << ",";  // run did not cover this instance
            } else {
                out << "," << (it->second->predicted ? *it->second->predicted : "");
            }
        }
        out << "\n";
    }
    return out.str();
}

}  // namespace srfot
