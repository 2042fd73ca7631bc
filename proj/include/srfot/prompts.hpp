#pragma once

#include <array>
#include <filesystem>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "srfot/core.hpp"

namespace srfot {

enum class FieldTag {
    Question,
    Context,
    Options,
    Explanation,
    MajorPremise,
    MinorPremiseQuestion,
    MinorPremise,
};

inline constexpr std::array<FieldTag, 7> kAllFieldTags = {
    FieldTag::Question,     FieldTag::Context,
    FieldTag::Options,      FieldTag::Explanation,
    FieldTag::MajorPremise, FieldTag::MinorPremiseQuestion,
    FieldTag::MinorPremise,
};

// Placeholder names as they appear in template files: {{question}}, ...
std::string_view to_string(FieldTag t);
std::optional<FieldTag> field_tag_from_string(std::string_view s);
// Human-facing label used when laying out exemplar blocks ("Major premise").
std::string_view field_label(FieldTag t);

// The set of fields a stage's prompt may contain.
class VisibilityMask {
public:
    VisibilityMask() = default;
    VisibilityMask(std::initializer_list<FieldTag> tags) {
        for (FieldTag t : tags) add(t);
    }

    bool contains(FieldTag t) const { return (bits_ & bit(t)) != 0; }
    VisibilityMask& add(FieldTag t) {
        bits_ |= bit(t);
        return *this;
    }
    VisibilityMask& remove(FieldTag t) {
        bits_ &= ~bit(t);
        return *this;
    }
    bool empty() const { return bits_ == 0; }
    std::vector<FieldTag> tags() const;

    bool operator==(const VisibilityMask&) const = default;

private:
    static unsigned bit(FieldTag t) { return 1u << static_cast<unsigned>(t); }
    unsigned bits_ = 0;
};

// SR-FoT per-stage defaults; DirectAnswer/ChainOfThought see the task fields.
VisibilityMask default_mask(StageKind k);

using FieldMap = std::map<FieldTag, std::string>;

struct PromptTemplate {
    StageKind stage = StageKind::QuestionExplanation;
    std::string name;  // template base name, e.g. "major_premise_no_explanation"
    std::string text;  // raw file text with {{placeholders}}
    std::vector<FieldTag> slot_order;  // field placeholders in order of appearance
    bool has_exemplar_slot = false;

    // Scans `text` for placeholders. Duplicate placeholders and unknown names
    // are rejected.
    static PromptTemplate parse(StageKind stage, std::string name, std::string text);
};

struct Exemplar {
    FieldMap inputs;
    std::string output;
};

struct ExemplarSet {
    std::string dataset_id;
    StageKind stage = StageKind::QuestionExplanation;
    std::vector<Exemplar> exemplars;
};

// Default in-context exemplar counts; -1 for unknown datasets.
int expected_exemplar_count(const std::string& dataset_id);

// Reads one JSONL exemplar file: {"inputs": {tag: text, ...}, "output": text}.
// A count differing from the dataset default warns and proceeds; strict mode
// throws DataError(CountMismatch).
ExemplarSet load_exemplars(const std::filesystem::path& file, const std::string& dataset_id,
                           StageKind stage, bool strict = false);

// Cue that precedes the worked output in exemplar blocks and closes the
// template body ("Explanation:", "Major premise:", ..., "Answer:").
std::string_view output_label(StageKind k);

// Lays out the exemplars with their inputs filtered through `mask`, in
// canonical field order, each ending with output_label + worked output.
std::string render_exemplar_block(const ExemplarSet& set, const VisibilityMask& mask);

// Pure substitution with visibility enforcement: every provided field must be
// inside `mask` (else ForbiddenField) and every template slot must be provided
// (else MissingField). Fields other than Context must be nonempty.
std::string render_stage_prompt(const PromptTemplate& tmpl, const VisibilityMask& mask,
                                const FieldMap& fields, const std::string& exemplar_block);

class RenderError : public Error {
public:
    enum class Code { MissingField, ForbiddenField };

    RenderError(Code code, FieldTag tag, const std::string& msg)
        : Error(msg), code(code), tag(tag) {}

    Code code;
    FieldTag tag;
};

// Loads prompts/templates/<mc|boolean>/<name>.txt lazily, caches by path.
class TemplateLibrary {
public:
    explicit TemplateLibrary(std::filesystem::path root);

    const PromptTemplate& get(AnswerSpace flavor, StageKind stage, const std::string& name) const;
    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path root_;
    mutable std::mutex mu_;
    mutable std::map<std::string, std::unique_ptr<PromptTemplate>> cache_;
};

// Loads prompts/exemplars/<dataset>/<name>.jsonl; a variant-specific template
// name falls back to the stage-kind file.
class ExemplarLibrary {
public:
    explicit ExemplarLibrary(std::filesystem::path root, bool strict = false);

    const ExemplarSet& get(const std::string& dataset_id, StageKind stage,
                           const std::string& template_name) const;

private:
    std::filesystem::path root_;
    bool strict_ = false;
    mutable std::mutex mu_;
    mutable std::map<std::string, std::unique_ptr<ExemplarSet>> cache_;
};

}  // namespace srfot
