#include "srfot/data.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace srfot {

using nlohmann::json;

std::string paper_split(const std::string& dataset_id) {
    if (dataset_id == "scienceqa") return "test";
    if (dataset_id == "strategyqa") return "train";
    if (dataset_id == "boolq") return "dev";
    throw ConfigError("unknown dataset: " + dataset_id);
}

long paper_expected_count(const std::string& dataset_id) {
    if (dataset_id == "scienceqa") return 2224;
    if (dataset_id == "strategyqa") return 2290;
    if (dataset_id == "boolq") return 3270;
    throw ConfigError("unknown dataset: " + dataset_id);
}

std::string LoadReport::summary() const {
    std::ostringstream out;
    out << dataset_id << ": loaded " << loaded << " instances";
    if (expected) {
        if (count_matches()) {
            out << " (matches expected " << *expected << ")";
        } else {
            out << " (EXPECTED " << *expected << ", delta " << (delta() >= 0 ? "+" : "")
                << delta() << ")";
        }
    }
    if (skipped_image) out << "; skipped " << skipped_image << " items with images";
    if (skipped_other_split) out << "; skipped " << skipped_other_split << " items from other splits";
    if (label_overflow) out << "; flagged " << label_overflow << " items with options beyond E";
    return out.str();
}

namespace {

json parse_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(DataError::Code::FileMissing, "dataset file missing: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& ex) {
        throw DataError(DataError::Code::SchemaMismatch, path.string() + ": " + ex.what());
    }
    return j;
}

std::filesystem::path resolve_source(const DatasetDescriptor& desc,
                                     const std::string& default_file) {
    std::error_code ec;
    if (std::filesystem::is_directory(desc.source_path, ec)) {
        return desc.source_path / default_file;
    }
    return desc.source_path;
}

void check_unique_ids(const std::vector<TaskInstance>& instances) {
    std::set<std::string> seen;
    for (const auto& inst : instances) {
        if (!seen.insert(inst.id).second) {
            throw ValidationError(ValidationError::Code::DuplicateId,
                                  "duplicate instance id: " + inst.id);
        }
    }
}

void finish_report(const DatasetDescriptor& desc, LoadReport& report,
                   const std::vector<TaskInstance>& instances) {
    report.dataset_id = desc.id;
    report.loaded = instances.size();
    report.expected = desc.expected_count;
    if (!report.count_matches()) {
        if (desc.strict) throw DataError(DataError::Code::CountMismatch, report.summary());
        std::cerr << "warning: " << report.summary() << "\n";
    }
}

std::vector<Option> options_from_choices(const json& choices, const std::string& id,
                                         std::size_t* overflow) {
    std::vector<Option> options;
    if (!choices.is_array() || choices.size() < 2) {
        throw DataError(DataError::Code::SchemaMismatch,
                        "instance " + id + ": choices must be an array of >= 2");
    }
    if (choices.size() > 5 && overflow) ++*overflow;
    for (std::size_t i = 0; i < choices.size(); ++i) {
        if (i >= 26) {
            throw DataError(DataError::Code::SchemaMismatch,
                            "instance " + id + ": more than 26 options");
        }
        options.push_back(Option{static_cast<char>('A' + i), choices.at(i).get<std::string>()});
    }
    return options;
}

Subject scienceqa_subject(const std::string& raw, const std::string& id) {
    if (raw == "natural science") return Subject::Natural;
    if (raw == "social science") return Subject::Social;
    if (raw == "language science") return Subject::Language;
    throw DataError(DataError::Code::SchemaMismatch,
                    "instance " + id + ": unknown subject '" + raw + "'");
}

GradeBand scienceqa_grade(const std::string& raw, const std::string& id) {
    if (raw.rfind("grade", 0) != 0) {
        throw DataError(DataError::Code::SchemaMismatch,
                        "instance " + id + ": unknown grade '" + raw + "'");
    }
    int grade = 0;
    try {
        grade = std::stoi(raw.substr(5));
    } catch (const std::exception&) {
        throw DataError(DataError::Code::SchemaMismatch,
                        "instance " + id + ": unknown grade '" + raw + "'");
    }
    return grade <= 6 ? GradeBand::G1_6 : GradeBand::G7_12;
}

bool has_image(const json& record) {
    if (!record.contains("image")) return false;
    const json& image = record.at("image");
    if (image.is_null()) return false;
    if (image.is_string()) return !image.get<std::string>().empty();
    return true;
}

}  // namespace

std::vector<TaskInstance> load_scienceqa(const DatasetDescriptor& desc, LoadReport* report) {
    LoadReport local;
    LoadReport& rep = report ? *report : local;
    rep = LoadReport{};

    const json problems = parse_json_file(resolve_source(desc, "problems.json"));
    if (!problems.is_object()) {
        throw DataError(DataError::Code::SchemaMismatch,
                        "scienceqa problems file must be an object keyed by problem id");
    }
    const std::string split = desc.split.empty() ? paper_split(desc.id) : desc.split;

    std::vector<TaskInstance> instances;
    for (const auto& item : problems.items()) {
        const json& rec = item.value();
        try {
            if (rec.value("split", "") != split) {
                ++rep.skipped_other_split;
                continue;
            }
            if (has_image(rec)) {
                ++rep.skipped_image;
                continue;
            }
            TaskInstance inst;
            inst.id = item.key();
            inst.question = rec.at("question").get<std::string>();
            inst.context = rec.value("hint", "");
            inst.options = options_from_choices(rec.at("choices"), inst.id, &rep.label_overflow);
            inst.answer_space = AnswerSpace::MultipleChoice;
            int answer = rec.at("answer").get<int>();
            if (answer < 0 || answer >= static_cast<int>(inst.options.size())) {
                throw DataError(DataError::Code::SchemaMismatch,
                                "instance " + inst.id + ": answer index out of range");
            }
            inst.gold = AnswerKey::option(inst.options[static_cast<std::size_t>(answer)].label);
            inst.meta.subject = scienceqa_subject(rec.at("subject").get<std::string>(), inst.id);
            inst.meta.grade_band = scienceqa_grade(rec.at("grade").get<std::string>(), inst.id);
            validate_instance(inst);
            instances.push_back(std::move(inst));
        } catch (const json::exception& ex) {
            throw DataError(DataError::Code::SchemaMismatch,
                            "instance " + item.key() + ": " + ex.what());
        }
    }
    check_unique_ids(instances);
    finish_report(desc, rep, instances);
    return instances;
}

std::vector<TaskInstance> load_strategyqa(const DatasetDescriptor& desc, LoadReport* report) {
    LoadReport local;
    LoadReport& rep = report ? *report : local;
    rep = LoadReport{};

    const json records = parse_json_file(resolve_source(desc, "train.json"));
    if (!records.is_array()) {
        throw DataError(DataError::Code::SchemaMismatch, "strategyqa file must be a JSON array");
    }
    std::vector<TaskInstance> instances;
    for (const auto& rec : records) {
        std::string id = rec.value("qid", "");
        try {
            TaskInstance inst;
            inst.id = id;
            inst.question = rec.at("question").get<std::string>();
            // Evidence facts serve as the task context.
            if (rec.contains("facts") && rec.at("facts").is_array()) {
                std::string context;
                for (const auto& fact : rec.at("facts")) {
                    if (!context.empty()) context.push_back(' ');
                    context += fact.get<std::string>();
                }
                inst.context = std::move(context);
            }
            inst.answer_space = AnswerSpace::Boolean;
            if (!rec.contains("answer")) {
                throw DataError(DataError::Code::SchemaMismatch,
                                "instance " + id + ": missing answer");
            }
            inst.gold = AnswerKey::boolean(rec.at("answer").get<bool>());
            validate_instance(inst);
            instances.push_back(std::move(inst));
        } catch (const json::exception& ex) {
            throw DataError(DataError::Code::SchemaMismatch, "instance " + id + ": " + ex.what());
        }
    }
    check_unique_ids(instances);
    finish_report(desc, rep, instances);
    return instances;
}

std::vector<TaskInstance> load_boolq(const DatasetDescriptor& desc, LoadReport* report) {
    LoadReport local;
    LoadReport& rep = report ? *report : local;
    rep = LoadReport{};

    const std::filesystem::path path = resolve_source(desc, "dev.jsonl");
    std::ifstream in(path);
    if (!in) throw DataError(DataError::Code::FileMissing, "dataset file missing: " + path.string());
    const std::string split = desc.split.empty() ? paper_split(desc.id) : desc.split;

    std::vector<TaskInstance> instances;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            json rec = json::parse(line);
            TaskInstance inst;
            inst.id = "boolq-" + split + "-" + std::to_string(lineno);
            inst.question = rec.at("question").get<std::string>();
            inst.context = rec.at("passage").get<std::string>();
            inst.answer_space = AnswerSpace::Boolean;
            inst.gold = AnswerKey::boolean(rec.at("answer").get<bool>());
            validate_instance(inst);
            instances.push_back(std::move(inst));
        } catch (const json::exception& ex) {
            throw DataError(DataError::Code::SchemaMismatch,
                            path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
    check_unique_ids(instances);
    finish_report(desc, rep, instances);
    return instances;
}

std::vector<TaskInstance> load_dataset(const DatasetDescriptor& desc, LoadReport* report) {
    if (desc.id == "scienceqa") return load_scienceqa(desc, report);
    if (desc.id == "strategyqa") return load_strategyqa(desc, report);
    if (desc.id == "boolq") return load_boolq(desc, report);
    throw ConfigError("unknown dataset: " + desc.id);
}

std::string instance_to_jsonl(const TaskInstance& inst) {
    json options = json::array();
    for (const auto& o : inst.options) {
        options.push_back(json{{"label", std::string(1, o.label)}, {"text", o.text}});
    }
    json j{
        {"id", inst.id},
        {"question", inst.question},
        {"context", inst.context},
        {"options", std::move(options)},
        {"answer_space", inst.answer_space == AnswerSpace::MultipleChoice ? "mc" : "boolean"},
        {"gold", inst.gold.value()},
        {"subject", inst.meta.subject == Subject::None ? json(nullptr)
                                                       : json(to_string(inst.meta.subject))},
        {"grade", inst.meta.grade_band == GradeBand::None
                      ? json(nullptr)
                      : json(to_string(inst.meta.grade_band))},
    };
    return j.dump();
}

TaskInstance instance_from_jsonl(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& ex) {
        throw DataError(DataError::Code::SchemaMismatch,
                        std::string("bad instance record: ") + ex.what());
    }
    TaskInstance inst;
    inst.id = j.at("id").get<std::string>();
    inst.question = j.at("question").get<std::string>();
    inst.context = j.value("context", "");
    for (const auto& o : j.at("options")) {
        std::string label = o.at("label").get<std::string>();
        inst.options.push_back(Option{label.empty() ? '\0' : label[0],
                                      o.at("text").get<std::string>()});
    }
    inst.answer_space = j.at("answer_space").get<std::string>() == "mc"
                            ? AnswerSpace::MultipleChoice
                            : AnswerSpace::Boolean;
    inst.gold = AnswerKey::parse(j.at("gold").get<std::string>());
    if (j.contains("subject") && !j.at("subject").is_null()) {
        inst.meta.subject = subject_from_string(j.at("subject").get<std::string>());
    }
    if (j.contains("grade") && !j.at("grade").is_null()) {
        inst.meta.grade_band = grade_band_from_string(j.at("grade").get<std::string>());
    }
    return inst;
}

void write_normalized(const std::vector<TaskInstance>& instances,
                      const std::filesystem::path& out) {
    if (out.has_parent_path()) std::filesystem::create_directories(out.parent_path());
    std::ofstream file(out, std::ios::binary | std::ios::trunc);
    if (!file) throw IoError("cannot write " + out.string());
    for (const auto& inst : instances) file << instance_to_jsonl(inst) << "\n";
}

std::vector<TaskInstance> load_normalized(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(DataError::Code::FileMissing, "dataset file missing: " + path.string());
    std::vector<TaskInstance> instances;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            TaskInstance inst = instance_from_jsonl(line);
            validate_instance(inst);
            instances.push_back(std::move(inst));
        } catch (const DataError& ex) {
            throw DataError(DataError::Code::SchemaMismatch,
                            path.string() + ":" + std::to_string(lineno) + ": " + ex.what());
        }
    }
    check_unique_ids(instances);
    return instances;
}

}  // namespace srfot
