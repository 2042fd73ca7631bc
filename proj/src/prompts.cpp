#include "srfot/prompts.hpp"

#include <algorithm>
#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace srfot {

using nlohmann::json;

std::string_view to_string(FieldTag t) {
    switch (t) {
        case FieldTag::Question: return "question";
        case FieldTag::Context: return "context";
        case FieldTag::Options: return "options";
        case FieldTag::Explanation: return "explanation";
        case FieldTag::MajorPremise: return "major_premise";
        case FieldTag::MinorPremiseQuestion: return "minor_premise_question";
        case FieldTag::MinorPremise: return "minor_premise";
    }
    return "question";
}

std::optional<FieldTag> field_tag_from_string(std::string_view s) {
    for (FieldTag t : kAllFieldTags) {
        if (to_string(t) == s) return t;
    }
    return std::nullopt;
}

std::string_view field_label(FieldTag t) {
    switch (t) {
        case FieldTag::Question: return "Question";
        case FieldTag::Context: return "Context";
        case FieldTag::Options: return "Options";
        case FieldTag::Explanation: return "Explanation";
        case FieldTag::MajorPremise: return "Major premise";
        case FieldTag::MinorPremiseQuestion: return "Minor premise question";
        case FieldTag::MinorPremise: return "Minor premise";
    }
    return "Question";
}

std::vector<FieldTag> VisibilityMask::tags() const {
    std::vector<FieldTag> out;
    for (FieldTag t : kAllFieldTags) {
        if (contains(t)) out.push_back(t);
    }
    return out;
}

VisibilityMask default_mask(StageKind k) {
    switch (k) {
        case StageKind::QuestionExplanation:
            return {FieldTag::Question, FieldTag::Context, FieldTag::Options};
        case StageKind::MajorPremise:
            return {FieldTag::Question, FieldTag::Context, FieldTag::Options,
                    FieldTag::Explanation};
        case StageKind::MinorPremiseQuestion:
            return {FieldTag::Question, FieldTag::Context, FieldTag::Options,
                    FieldTag::MajorPremise};
        case StageKind::MinorPremise:
            return {FieldTag::MinorPremiseQuestion, FieldTag::Context};
        case StageKind::SyllogisticReasoning:
            return {FieldTag::Question, FieldTag::Options, FieldTag::MajorPremise,
                    FieldTag::MinorPremise};
        case StageKind::DirectAnswer:
        case StageKind::ChainOfThought:
            return {FieldTag::Question, FieldTag::Context, FieldTag::Options};
    }
    return {};
}

PromptTemplate PromptTemplate::parse(StageKind stage, std::string name, std::string text) {
    PromptTemplate tmpl;
    tmpl.stage = stage;
    tmpl.name = std::move(name);
    tmpl.text = std::move(text);
    std::size_t pos = 0;
    while (true) {
        std::size_t open = tmpl.text.find("{{", pos);
        if (open == std::string::npos) break;
        std::size_t close = tmpl.text.find("}}", open + 2);
        if (close == std::string::npos) {
            throw DataError(DataError::Code::SchemaMismatch,
                            "template " + tmpl.name + ": unterminated placeholder");
        }
        std::string slot = tmpl.text.substr(open + 2, close - open - 2);
        if (slot == "exemplars") {
            if (tmpl.has_exemplar_slot) {
                throw DataError(DataError::Code::SchemaMismatch,
                                "template " + tmpl.name + ": duplicate exemplar slot");
            }
            tmpl.has_exemplar_slot = true;
        } else if (auto tag = field_tag_from_string(slot)) {
            if (std::find(tmpl.slot_order.begin(), tmpl.slot_order.end(), *tag) !=
                tmpl.slot_order.end()) {
                throw DataError(DataError::Code::SchemaMismatch,
                                "template " + tmpl.name + ": duplicate slot {{" + slot + "}}");
            }
            tmpl.slot_order.push_back(*tag);
        } else {
            throw DataError(DataError::Code::SchemaMismatch,
                            "template " + tmpl.name + ": unknown placeholder {{" + slot + "}}");
        }
        pos = close + 2;
    }
    return tmpl;
}

int expected_exemplar_count(const std::string& dataset_id) {
    if (dataset_id == "scienceqa") return 5;
    if (dataset_id == "strategyqa") return 2;
    if (dataset_id == "boolq") return 2;
    return -1;
}

ExemplarSet load_exemplars(const std::filesystem::path& file, const std::string& dataset_id,
                           StageKind stage, bool strict) {
    std::ifstream in(file);
    if (!in) {
        throw DataError(DataError::Code::FileMissing,
                        "exemplar file missing: " + file.string());
    }
    ExemplarSet set;
    set.dataset_id = dataset_id;
    set.stage = stage;
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
                            file.string() + ":" + std::to_string(lineno) + ": " + ex.what());
        }
        Exemplar ex;
        for (const auto& item : j.at("inputs").items()) {
            auto tag = field_tag_from_string(item.key());
            if (!tag) {
                throw DataError(DataError::Code::SchemaMismatch,
                                file.string() + ":" + std::to_string(lineno) +
                                    ": unknown input field '" + item.key() + "'");
            }
            ex.inputs[*tag] = item.value().get<std::string>();
        }
        ex.output = j.at("output").get<std::string>();
        set.exemplars.push_back(std::move(ex));
    }
    int expected = expected_exemplar_count(dataset_id);
    if (expected >= 0 && static_cast<int>(set.exemplars.size()) != expected) {
        std::string msg = "exemplar file " + file.string() + ": expected " +
                          std::to_string(expected) + " exemplars for " + dataset_id + ", found " +
                          std::to_string(set.exemplars.size());
        if (strict) throw DataError(DataError::Code::CountMismatch, msg);
        std::cerr << "warning: " << msg << "\n";
    }
    return set;
}

std::string_view output_label(StageKind k) {
    switch (k) {
        case StageKind::QuestionExplanation: return "Explanation:";
        case StageKind::MajorPremise: return "Major premise:";
        case StageKind::MinorPremiseQuestion: return "Minor premise question:";
        case StageKind::MinorPremise:
        case StageKind::SyllogisticReasoning:
        case StageKind::DirectAnswer:
        case StageKind::ChainOfThought:
            return "Answer:";
    }
    return "Answer:";
}

std::string render_exemplar_block(const ExemplarSet& set, const VisibilityMask& mask) {
    std::string out;
    for (std::size_t i = 0; i < set.exemplars.size(); ++i) {
        const Exemplar& ex = set.exemplars[i];
        if (i) out.append("\n\n");
        for (FieldTag tag : kAllFieldTags) {
            if (!mask.contains(tag)) continue;
            auto it = ex.inputs.find(tag);
            if (it == ex.inputs.end()) continue;
            out.append(field_label(tag));
            out.append(tag == FieldTag::Options ? ":\n" : ": ");
            out.append(it->second);
            out.push_back('\n');
        }
        out.append(output_label(set.stage));
        out.push_back(' ');
        out.append(ex.output);
    }
    return out;
}

std::string render_stage_prompt(const PromptTemplate& tmpl, const VisibilityMask& mask,
                                const FieldMap& fields, const std::string& exemplar_block) {
    for (const auto& [tag, text] : fields) {
        if (!mask.contains(tag)) {
            throw RenderError(RenderError::Code::ForbiddenField, tag,
                              "field '" + std::string(to_string(tag)) +
                                  "' is outside the visibility mask of stage " +
                                  std::string(to_string(tmpl.stage)));
        }
        (void)text;
    }
    for (FieldTag slot : tmpl.slot_order) {
        auto it = fields.find(slot);
        if (it == fields.end() || (slot != FieldTag::Context && it->second.empty())) {
            throw RenderError(RenderError::Code::MissingField, slot,
                              "template " + tmpl.name + ": missing field '" +
                                  std::string(to_string(slot)) + "'");
        }
    }

    std::string out;
    out.reserve(tmpl.text.size() + exemplar_block.size() + 256);
    std::size_t pos = 0;
    while (pos < tmpl.text.size()) {
        std::size_t open = tmpl.text.find("{{", pos);
        if (open == std::string::npos) {
            out.append(tmpl.text, pos, std::string::npos);
            break;
        }
        out.append(tmpl.text, pos, open - pos);
        std::size_t close = tmpl.text.find("}}", open + 2);
        std::string slot = tmpl.text.substr(open + 2, close - open - 2);
        if (slot == "exemplars") {
            out.append(exemplar_block);
        } else {
            out.append(fields.at(*field_tag_from_string(slot)));
        }
        pos = close + 2;
    }
    return out;
}

TemplateLibrary::TemplateLibrary(std::filesystem::path root) : root_(std::move(root)) {}

namespace {

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw DataError(DataError::Code::FileMissing, "missing file: " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string_view flavor_dir(AnswerSpace flavor) {
    return flavor == AnswerSpace::MultipleChoice ? "mc" : "boolean";
}

}  // namespace

const PromptTemplate& TemplateLibrary::get(AnswerSpace flavor, StageKind stage,
                                           const std::string& name) const {
    std::filesystem::path path = root_ / flavor_dir(flavor) / (name + ".txt");
    std::string key = path.string();
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        auto tmpl = std::make_unique<PromptTemplate>(
            PromptTemplate::parse(stage, name, read_file(path)));
        it = cache_.emplace(key, std::move(tmpl)).first;
    }
    return *it->second;
}

ExemplarLibrary::ExemplarLibrary(std::filesystem::path root, bool strict)
    : root_(std::move(root)), strict_(strict) {}

const ExemplarSet& ExemplarLibrary::get(const std::string& dataset_id, StageKind stage,
                                        const std::string& template_name) const {
    std::filesystem::path dir = root_ / dataset_id;
    std::filesystem::path path = dir / (template_name + ".jsonl");
    if (!std::filesystem::exists(path)) {
        path = dir / (std::string(to_string(stage)) + ".jsonl");
    }
    std::string key = path.string();
    std::lock_guard lock(mu_);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        auto set = std::make_unique<ExemplarSet>(
            load_exemplars(path, dataset_id, stage, strict_));
        it = cache_.emplace(key, std::move(set)).first;
    }
    return *it->second;
}

}  // namespace srfot
