#include <doctest.h>

#include "srfot/pipeline.hpp"
#include "srfot/prompts.hpp"
#include "test_util.hpp"

using namespace srfot;
using testutil::scratch_dir;
using testutil::write_file;

TEST_CASE("default masks follow the five-stage visibility contract") {
    CHECK(default_mask(StageKind::QuestionExplanation) ==
          VisibilityMask{FieldTag::Question, FieldTag::Context, FieldTag::Options});
    CHECK(default_mask(StageKind::MajorPremise) ==
          VisibilityMask{FieldTag::Question, FieldTag::Context, FieldTag::Options,
                         FieldTag::Explanation});
    CHECK(default_mask(StageKind::MinorPremiseQuestion) ==
          VisibilityMask{FieldTag::Question, FieldTag::Context, FieldTag::Options,
                         FieldTag::MajorPremise});
    CHECK(default_mask(StageKind::MinorPremise) ==
          VisibilityMask{FieldTag::MinorPremiseQuestion, FieldTag::Context});
    CHECK(default_mask(StageKind::SyllogisticReasoning) ==
          VisibilityMask{FieldTag::Question, FieldTag::Options, FieldTag::MajorPremise,
                         FieldTag::MinorPremise});
}

TEST_CASE("template parsing extracts slots in order and rejects bad placeholders") {
    PromptTemplate t = PromptTemplate::parse(
        StageKind::MajorPremise, "t",
        "Do it.\n\n{{exemplars}}\n\nQuestion: {{question}}\nExplanation: {{explanation}}\n");
    CHECK(t.slot_order ==
          std::vector<FieldTag>{FieldTag::Question, FieldTag::Explanation});
    CHECK(t.has_exemplar_slot);

    CHECK_THROWS_AS(PromptTemplate::parse(StageKind::MajorPremise, "dup",
                                          "{{question}} {{question}}"),
                    DataError);
    CHECK_THROWS_AS(PromptTemplate::parse(StageKind::MajorPremise, "unknown", "{{nope}}"),
                    DataError);
    CHECK_THROWS_AS(PromptTemplate::parse(StageKind::MajorPremise, "open", "{{question"),
                    DataError);
}

TEST_CASE("render enforces missing and forbidden fields") {
    PromptTemplate qe = PromptTemplate::parse(
        StageKind::QuestionExplanation, "qe", "Task.\n\nQuestion: {{question}}\n");
    VisibilityMask mask = default_mask(StageKind::QuestionExplanation);

    try {
        render_stage_prompt(qe, mask, {}, "");
        FAIL("expected MissingField");
    } catch (const RenderError& e) {
        CHECK(e.code == RenderError::Code::MissingField);
        CHECK(e.tag == FieldTag::Question);
    }

    PromptTemplate sr = PromptTemplate::parse(StageKind::SyllogisticReasoning, "sr",
                                              "Question: {{question}}\n");
    FieldMap fields{{FieldTag::Question, "Q"}, {FieldTag::Explanation, "leak"}};
    try {
        render_stage_prompt(sr, default_mask(StageKind::SyllogisticReasoning), fields, "");
        FAIL("expected ForbiddenField");
    } catch (const RenderError& e) {
        CHECK(e.code == RenderError::Code::ForbiddenField);
        CHECK(e.tag == FieldTag::Explanation);
    }
}

TEST_CASE("context may be empty but other fields may not") {
    PromptTemplate mp = PromptTemplate::parse(
        StageKind::MinorPremise, "mp",
        "Context: {{context}}\nMinor premise question: {{minor_premise_question}}\n");
    VisibilityMask mask = default_mask(StageKind::MinorPremise);
    FieldMap ok{{FieldTag::Context, ""}, {FieldTag::MinorPremiseQuestion, "Does it?"}};
    CHECK(render_stage_prompt(mp, mask, ok, "").find("Does it?") != std::string::npos);

    FieldMap empty_q{{FieldTag::Context, "c"}, {FieldTag::MinorPremiseQuestion, ""}};
    CHECK_THROWS_AS(render_stage_prompt(mp, mask, empty_q, ""), RenderError);
}

TEST_CASE("rendering is pure: identical inputs give identical bytes") {
    TemplateLibrary lib("prompts/templates");
    const PromptTemplate& tmpl =
        lib.get(AnswerSpace::MultipleChoice, StageKind::MajorPremise, "major_premise");
    FieldMap fields{{FieldTag::Question, "Q?"},
                    {FieldTag::Context, "ctx"},
                    {FieldTag::Options, "(A) x\n(B) y"},
                    {FieldTag::Explanation, "because"}};
    std::string a = render_stage_prompt(tmpl, default_mask(StageKind::MajorPremise), fields, "EX");
    std::string b = render_stage_prompt(tmpl, default_mask(StageKind::MajorPremise), fields, "EX");
    CHECK(a == b);
    CHECK(a.find("Q?") != std::string::npos);
    CHECK(a.find("EX") != std::string::npos);
}

TEST_CASE("exemplar sets carry the per-dataset counts") {
    ExemplarLibrary lib("prompts/exemplars");
    CHECK(lib.get("scienceqa", StageKind::QuestionExplanation, "question_explanation")
              .exemplars.size() == 5);
    CHECK(lib.get("boolq", StageKind::SyllogisticReasoning, "syllogistic_reasoning")
              .exemplars.size() == 2);
    CHECK(lib.get("strategyqa", StageKind::MajorPremise, "major_premise").exemplars.size() == 2);
}

TEST_CASE("strict mode rejects exemplar count mismatches") {
    auto dir = scratch_dir("exemplar_strict");
    std::string record =
        "{\"inputs\": {\"question\": \"q\"}, \"output\": \"o\"}\n";
    write_file(dir / "strategyqa" / "major_premise.jsonl", record + record + record);

    ExemplarLibrary lenient(dir);
    CHECK(lenient.get("strategyqa", StageKind::MajorPremise, "major_premise").exemplars.size() ==
          3);

    ExemplarLibrary strict(dir, true);
    try {
        strict.get("strategyqa", StageKind::MajorPremise, "major_premise");
        FAIL("expected CountMismatch");
    } catch (const DataError& e) {
        CHECK(e.code == DataError::Code::CountMismatch);
    }

    ExemplarLibrary missing(dir, false);
    try {
        missing.get("strategyqa", StageKind::MinorPremise, "minor_premise");
        FAIL("expected FileMissing");
    } catch (const DataError& e) {
        CHECK(e.code == DataError::Code::FileMissing);
    }
}

TEST_CASE("variant-specific exemplars fall back to the stage-kind file") {
    ExemplarLibrary lib("prompts/exemplars");
    // No major_premise_no_explanation.jsonl exists; the stage file backs it.
    const ExemplarSet& set =
        lib.get("scienceqa", StageKind::MajorPremise, "major_premise_no_explanation");
    CHECK(set.exemplars.size() == 5);
    // all_in_one has its own file.
    const ExemplarSet& all =
        lib.get("scienceqa", StageKind::SyllogisticReasoning, "all_in_one");
    CHECK(all.exemplars.size() == 5);
    CHECK(all.exemplars[0].output.find("Major premise:") != std::string::npos);
}

TEST_CASE("exemplar blocks are filtered through the visibility mask") {
    ExemplarSet set;
    set.dataset_id = "scienceqa";
    set.stage = StageKind::MajorPremise;
    Exemplar ex;
    ex.inputs = {{FieldTag::Question, "EXQ"},
                 {FieldTag::Explanation, "EXPLAIN"},
                 {FieldTag::Options, "(A) x"}};
    ex.output = "RULE";
    set.exemplars = {ex};

    VisibilityMask full = default_mask(StageKind::MajorPremise);
    std::string block = render_exemplar_block(set, full);
    CHECK(block.find("EXQ") != std::string::npos);
    CHECK(block.find("EXPLAIN") != std::string::npos);
    CHECK(block.find("Major premise: RULE") != std::string::npos);

    VisibilityMask no_expl = full;
    no_expl.remove(FieldTag::Explanation);
    std::string filtered = render_exemplar_block(set, no_expl);
    CHECK(filtered.find("EXQ") != std::string::npos);
    CHECK(filtered.find("EXPLAIN") == std::string::npos);
}

namespace {

// >= 32 chars, unique per field.
std::string sentinel(FieldTag tag) {
    std::string s = "SENTINEL_" + std::string(to_string(tag)) + "_";
    while (s.size() < 40) s.push_back('z');
    return s;
}

}  // namespace

TEST_CASE("leakage: rendered prompts contain a field iff its tag is masked") {
    TemplateLibrary templates("prompts/templates");
    FieldMap everything;
    for (FieldTag tag : kAllFieldTags) everything[tag] = sentinel(tag);

    for (VariantId variant : kAllVariants) {
        PipelineSpec spec = build_variant(variant);
        for (const StageBinding& binding : spec.stages) {
            FieldMap visible;
            for (FieldTag tag : binding.mask.tags()) visible[tag] = everything[tag];
            const PromptTemplate& tmpl = templates.get(AnswerSpace::MultipleChoice,
                                                       binding.kind, binding.template_name);
            std::string prompt = render_stage_prompt(tmpl, binding.mask, visible, "");
            for (FieldTag tag : kAllFieldTags) {
                bool present = prompt.find(sentinel(tag)) != std::string::npos;
                bool allowed = binding.mask.contains(tag);
                INFO("variant ", std::string(to_string(variant)), " stage ",
                     std::string(to_string(binding.kind)), " field ",
                     std::string(to_string(tag)));
                CHECK(present == allowed);
            }
        }
    }
}
