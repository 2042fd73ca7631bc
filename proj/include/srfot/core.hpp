#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "srfot/error.hpp"

namespace srfot {

enum class AnswerSpace { MultipleChoice, Boolean };

enum class Subject { Natural, Social, Language, None };
enum class GradeBand { G1_6, G7_12, None };

struct SubcategoryLabel {
    Subject subject = Subject::None;
    GradeBand grade_band = GradeBand::None;

    bool operator==(const SubcategoryLabel&) const = default;
};

std::string_view to_string(Subject s);
std::string_view to_string(GradeBand g);
Subject subject_from_string(std::string_view s);
GradeBand grade_band_from_string(std::string_view s);

struct Option {
    char label = 'A';
    std::string text;

    bool operator==(const Option&) const = default;
};

// Normalized answer value: a single option letter "A".."Z" for multiple
// choice, "yes"/"no" for boolean tasks. Comparison is exact string equality.
class AnswerKey {
public:
    AnswerKey() = default;

    static AnswerKey option(char label);
    static AnswerKey boolean(bool yes);
    // Accepts "A".."Z", "yes"/"no" and the loader-boundary aliases
    // true/false/True/Yes/...; anything else throws ValidationError(BadLabel).
    static AnswerKey parse(std::string_view raw);

    const std::string& value() const { return value_; }
    bool is_option() const { return value_.size() == 1; }
    char label() const { return value_.empty() ? '\0' : value_[0]; }
    bool empty() const { return value_.empty(); }

    bool operator==(const AnswerKey&) const = default;
    bool operator<(const AnswerKey& other) const { return value_ < other.value_; }

private:
    explicit AnswerKey(std::string v) : value_(std::move(v)) {}

    std::string value_;
};

struct TaskInstance {
    std::string id;
    std::string question;
    std::string context;  // may be empty
    std::vector<Option> options;  // empty for boolean tasks
    AnswerSpace answer_space = AnswerSpace::MultipleChoice;
    AnswerKey gold;
    SubcategoryLabel meta;

    bool operator==(const TaskInstance&) const = default;
};

// Returns the instance unchanged iff every TaskInstance invariant holds;
// otherwise throws ValidationError naming the violated invariant.
const TaskInstance& validate_instance(const TaskInstance& raw);

// Deterministic "(A) text\n(B) text" block. Labels must be consecutive
// starting at 'A'; unsorted or duplicate labels are rejected, never re-sorted.
std::string render_options(const std::vector<Option>& options);

std::vector<char> option_labels(const TaskInstance& inst);

enum class StageKind {
    QuestionExplanation,
    MajorPremise,
    MinorPremiseQuestion,
    MinorPremise,
    SyllogisticReasoning,
    DirectAnswer,
    ChainOfThought,
};

inline constexpr std::array<StageKind, 7> kAllStageKinds = {
    StageKind::QuestionExplanation, StageKind::MajorPremise,
    StageKind::MinorPremiseQuestion, StageKind::MinorPremise,
    StageKind::SyllogisticReasoning, StageKind::DirectAnswer,
    StageKind::ChainOfThought,
};

std::string_view to_string(StageKind k);
StageKind stage_kind_from_string(std::string_view s);

enum class VariantId {
    SRFoT,
    Base,
    CoT,
    SRFoT_NoExplanation,
    SRFoT_NoMajor,
    SRFoT_NoMinor,
    AllInOneStage,
    SRFoT_NoStage3,
    SRFoT_NoContextStage3,
    SRFoT_QoriStage4,
};

inline constexpr std::array<VariantId, 10> kAllVariants = {
    VariantId::SRFoT,          VariantId::Base,
    VariantId::CoT,            VariantId::SRFoT_NoExplanation,
    VariantId::SRFoT_NoMajor,  VariantId::SRFoT_NoMinor,
    VariantId::AllInOneStage,  VariantId::SRFoT_NoStage3,
    VariantId::SRFoT_NoContextStage3, VariantId::SRFoT_QoriStage4,
};

std::string_view to_string(VariantId v);
VariantId variant_from_string(std::string_view s);

struct SamplingParams {
    double temperature = 0.2;
    double top_p = 0.3;
    int n_samples = 1;
    int max_tokens = 1024;

    bool operator==(const SamplingParams&) const = default;
};

// Throws ConfigError when a parameter is out of range
// (temperature >= 0, top_p in (0,1], n_samples >= 1, max_tokens > 0).
void validate(const SamplingParams& params);

struct StageRecord {
    StageKind stage = StageKind::QuestionExplanation;
    std::string rendered_prompt;   // verbatim as sent
    std::string raw_completion;
    std::string parsed_artifact;
    std::int64_t latency_ms = 0;
    std::map<std::string, std::string> provider_meta;

    bool operator==(const StageRecord&) const = default;
};

enum class ExtractionFailureReason { NoPattern, OutOfRangeLabel };

std::string_view to_string(ExtractionFailureReason r);
ExtractionFailureReason extraction_failure_from_string(std::string_view s);

struct StageFailure {
    StageKind stage = StageKind::QuestionExplanation;
    std::string cause;

    bool operator==(const StageFailure&) const = default;
};

struct Transcript {
    std::string instance_id;
    VariantId variant = VariantId::SRFoT;
    int sample_index = 0;
    std::vector<StageRecord> stages;
    std::optional<AnswerKey> extracted;
    std::optional<ExtractionFailureReason> extraction_failure;
    std::optional<StageFailure> failure;

    bool ok() const { return !failure.has_value(); }
    bool operator==(const Transcript&) const = default;
};

// One self-describing JSON record per transcript (no trailing newline),
// schema versioned with a top-level "v" field.
std::string transcript_to_jsonl(const Transcript& t);
Transcript transcript_from_jsonl(const std::string& line);

}  // namespace srfot
