#include "srfot/core.hpp"

#include <algorithm>
#include <cctype>

#include <nlohmann/json.hpp>

namespace srfot {

using nlohmann::json;

std::string_view to_string(Subject s) {
    switch (s) {
        case Subject::Natural: return "natural";
        case Subject::Social: return "social";
        case Subject::Language: return "language";
        case Subject::None: return "none";
    }
    return "none";
}

std::string_view to_string(GradeBand g) {
    switch (g) {
        case GradeBand::G1_6: return "g1_6";
        case GradeBand::G7_12: return "g7_12";
        case GradeBand::None: return "none";
    }
    return "none";
}

Subject subject_from_string(std::string_view s) {
    if (s == "natural") return Subject::Natural;
    if (s == "social") return Subject::Social;
    if (s == "language") return Subject::Language;
    if (s == "none" || s.empty()) return Subject::None;
    throw ValidationError(ValidationError::Code::BadLabel,
                          "unknown subject: " + std::string(s));
}

GradeBand grade_band_from_string(std::string_view s) {
    if (s == "g1_6") return GradeBand::G1_6;
    if (s == "g7_12") return GradeBand::G7_12;
    if (s == "none" || s.empty()) return GradeBand::None;
    throw ValidationError(ValidationError::Code::BadLabel,
                          "unknown grade band: " + std::string(s));
}

AnswerKey AnswerKey::option(char label) {
    char up = static_cast<char>(std::toupper(static_cast<unsigned char>(label)));
    if (up < 'A' || up > 'Z') {
        throw ValidationError(ValidationError::Code::BadLabel,
                              std::string("option label out of range: ") + label);
    }
    return AnswerKey(std::string(1, up));
}

AnswerKey AnswerKey::boolean(bool yes) { return AnswerKey(yes ? "yes" : "no"); }

AnswerKey AnswerKey::parse(std::string_view raw) {
    std::string lowered;
    lowered.reserve(raw.size());
    for (char c : raw) lowered.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lowered == "yes" || lowered == "true") return boolean(true);
    if (lowered == "no" || lowered == "false") return boolean(false);
    if (raw.size() == 1) return option(raw[0]);
    throw ValidationError(ValidationError::Code::BadLabel,
                          "unparseable answer key: " + std::string(raw));
}

namespace {

void check_option_labels(const std::vector<Option>& options, ValidationError::Code order_code) {
    for (std::size_t i = 0; i + 1 < options.size(); ++i) {
        if (options[i].label == options[i + 1].label) {
            throw ValidationError(ValidationError::Code::DuplicateOption,
                                  std::string("duplicate option label: ") + options[i].label);
        }
    }
    for (std::size_t i = 0; i < options.size(); ++i) {
        char expected = static_cast<char>('A' + i);
        if (options[i].label != expected) {
            throw ValidationError(order_code,
                                  std::string("option labels must run A, B, C, ... in order; got '") +
                                      options[i].label + "' at position " + std::to_string(i));
        }
    }
}

}  // namespace

const TaskInstance& validate_instance(const TaskInstance& raw) {
    if (raw.id.empty()) {
        throw ValidationError(ValidationError::Code::EmptyId, "instance id is empty");
    }
    if (raw.question.empty()) {
        throw ValidationError(ValidationError::Code::EmptyQuestion,
                              "instance " + raw.id + ": question is empty");
    }
    if (raw.answer_space == AnswerSpace::MultipleChoice) {
        if (raw.options.size() < 2) {
            throw ValidationError(ValidationError::Code::BadLabel,
                                  "instance " + raw.id + ": multiple-choice needs >= 2 options");
        }
        check_option_labels(raw.options, ValidationError::Code::BadLabel);
        if (raw.gold.empty()) {
            throw ValidationError(ValidationError::Code::MissingGold,
                                  "instance " + raw.id + ": gold answer missing");
        }
        if (!raw.gold.is_option()) {
            throw ValidationError(ValidationError::Code::BadLabel,
                                  "instance " + raw.id + ": boolean gold on a multiple-choice instance");
        }
        bool found = std::any_of(raw.options.begin(), raw.options.end(),
                                 [&](const Option& o) { return o.label == raw.gold.label(); });
        if (!found) {
            throw ValidationError(ValidationError::Code::MissingGold,
                                  "instance " + raw.id + ": gold label '" + raw.gold.value() +
                                      "' is not among the options");
        }
    } else {
        if (!raw.options.empty()) {
            throw ValidationError(ValidationError::Code::BadLabel,
                                  "instance " + raw.id + ": boolean instance carries options");
        }
        if (raw.gold.empty()) {
            throw ValidationError(ValidationError::Code::MissingGold,
                                  "instance " + raw.id + ": gold answer missing");
        }
        if (raw.gold.value() != "yes" && raw.gold.value() != "no") {
            throw ValidationError(ValidationError::Code::BadLabel,
                                  "instance " + raw.id + ": boolean gold must be yes/no, got '" +
                                      raw.gold.value() + "'");
        }
    }
    return raw;
}

std::string render_options(const std::vector<Option>& options) {
    if (options.empty()) {
        throw ValidationError(ValidationError::Code::EmptyOptions, "no options to render");
    }
    check_option_labels(options, ValidationError::Code::UnsortedLabels);
    std::string out;
    for (std::size_t i = 0; i < options.size(); ++i) {
        if (i) out.push_back('\n');
        out.push_back('(');
        out.push_back(options[i].label);
        out.append(") ");
        out.append(options[i].text);
    }
    return out;
}

std::vector<char> option_labels(const TaskInstance& inst) {
    std::vector<char> labels;
    labels.reserve(inst.options.size());
    for (const auto& o : inst.options) labels.push_back(o.label);
    return labels;
}

std::string_view to_string(StageKind k) {
    switch (k) {
        case StageKind::QuestionExplanation: return "question_explanation";
        case StageKind::MajorPremise: return "major_premise";
        case StageKind::MinorPremiseQuestion: return "minor_premise_question";
        case StageKind::MinorPremise: return "minor_premise";
        case StageKind::SyllogisticReasoning: return "syllogistic_reasoning";
        case StageKind::DirectAnswer: return "direct_answer";
        case StageKind::ChainOfThought: return "chain_of_thought";
    }
    return "question_explanation";
}

StageKind stage_kind_from_string(std::string_view s) {
    for (StageKind k : kAllStageKinds) {
        if (to_string(k) == s) return k;
    }
    throw ValidationError(ValidationError::Code::BadLabel,
                          "unknown stage kind: " + std::string(s));
}

std::string_view to_string(VariantId v) {
    switch (v) {
        case VariantId::SRFoT: return "srfot";
        case VariantId::Base: return "base";
        case VariantId::CoT: return "cot";
        case VariantId::SRFoT_NoExplanation: return "srfot-no-explanation";
        case VariantId::SRFoT_NoMajor: return "srfot-no-major";
        case VariantId::SRFoT_NoMinor: return "srfot-no-minor";
        case VariantId::AllInOneStage: return "all-in-one-stage";
        case VariantId::SRFoT_NoStage3: return "srfot-no-stage3";
        case VariantId::SRFoT_NoContextStage3: return "srfot-no-context-stage3";
        case VariantId::SRFoT_QoriStage4: return "srfot-qori-stage4";
    }
    return "srfot";
}

VariantId variant_from_string(std::string_view s) {
    for (VariantId v : kAllVariants) {
        if (to_string(v) == s) return v;
    }
    throw ConfigError("unknown variant: " + std::string(s));
}

void validate(const SamplingParams& params) {
    if (params.temperature < 0.0) throw ConfigError("temperature must be >= 0");
    if (params.top_p <= 0.0 || params.top_p > 1.0) throw ConfigError("top_p must be in (0, 1]");
    if (params.n_samples < 1) throw ConfigError("n_samples must be >= 1");
    if (params.max_tokens <= 0) throw ConfigError("max_tokens must be > 0");
}

std::string_view to_string(ExtractionFailureReason r) {
    switch (r) {
        case ExtractionFailureReason::NoPattern: return "no_pattern";
        case ExtractionFailureReason::OutOfRangeLabel: return "out_of_range_label";
    }
    return "no_pattern";
}

ExtractionFailureReason extraction_failure_from_string(std::string_view s) {
    if (s == "no_pattern") return ExtractionFailureReason::NoPattern;
    if (s == "out_of_range_label") return ExtractionFailureReason::OutOfRangeLabel;
    throw ValidationError(ValidationError::Code::BadLabel,
                          "unknown extraction failure reason: " + std::string(s));
}

namespace {

json stage_record_to_json(const StageRecord& r) {
    json meta = json::object();
    for (const auto& [k, v] : r.provider_meta) meta[k] = v;
    return json{
        {"stage", to_string(r.stage)},
        {"rendered_prompt", r.rendered_prompt},
        {"raw_completion", r.raw_completion},
        {"parsed_artifact", r.parsed_artifact},
        {"latency_ms", r.latency_ms},
        {"provider_meta", std::move(meta)},
    };
}

StageRecord stage_record_from_json(const json& j) {
    StageRecord r;
    r.stage = stage_kind_from_string(j.at("stage").get<std::string>());
    r.rendered_prompt = j.at("rendered_prompt").get<std::string>();
    r.raw_completion = j.at("raw_completion").get<std::string>();
    r.parsed_artifact = j.at("parsed_artifact").get<std::string>();
    r.latency_ms = j.at("latency_ms").get<std::int64_t>();
    if (j.contains("provider_meta")) {
        for (const auto& item : j.at("provider_meta").items()) {
            r.provider_meta[item.key()] = item.value().get<std::string>();
        }
    }
    return r;
}

}  // namespace

std::string transcript_to_jsonl(const Transcript& t) {
    json stages = json::array();
    for (const auto& s : t.stages) stages.push_back(stage_record_to_json(s));
    json j{
        {"v", 1},
        {"instance_id", t.instance_id},
        {"variant", to_string(t.variant)},
        {"sample_index", t.sample_index},
        {"stages", std::move(stages)},
        {"extracted", t.extracted ? json(t.extracted->value()) : json(nullptr)},
        {"extraction_failure",
         t.extraction_failure ? json(to_string(*t.extraction_failure)) : json(nullptr)},
        {"failure", t.failure ? json{{"stage", to_string(t.failure->stage)},
                                     {"cause", t.failure->cause}}
                              : json(nullptr)},
    };
    return j.dump();
}

Transcript transcript_from_jsonl(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& ex) {
        throw IoError(std::string("bad transcript record: ") + ex.what());
    }
    if (!j.contains("v") || j.at("v").get<int>() != 1) {
        throw IoError("unsupported transcript schema version");
    }
    Transcript t;
    t.instance_id = j.at("instance_id").get<std::string>();
    t.variant = variant_from_string(j.at("variant").get<std::string>());
    t.sample_index = j.at("sample_index").get<int>();
    for (const auto& s : j.at("stages")) t.stages.push_back(stage_record_from_json(s));
    if (!j.at("extracted").is_null()) {
        t.extracted = AnswerKey::parse(j.at("extracted").get<std::string>());
    }
    if (!j.at("extraction_failure").is_null()) {
        t.extraction_failure =
            extraction_failure_from_string(j.at("extraction_failure").get<std::string>());
    }
    if (!j.at("failure").is_null()) {
        StageFailure f;
        f.stage = stage_kind_from_string(j.at("failure").at("stage").get<std::string>());
        f.cause = j.at("failure").at("cause").get<std::string>();
        t.failure = std::move(f);
    }
    return t;
}

}  // namespace srfot
