#include <doctest.h>

#include <random>

#include "srfot/core.hpp"
#include "test_util.hpp"

using namespace srfot;
using testutil::bool_instance;
using testutil::mc_instance;

TEST_CASE("validate_instance accepts a well-formed multiple-choice instance") {
    TaskInstance inst = mc_instance("q1", "Which word rhymes?", {"deep", "keep", "torn"}, 'B');
    CHECK_NOTHROW(validate_instance(inst));
}

TEST_CASE("validate_instance rejects a boolean instance carrying options") {
    TaskInstance inst = bool_instance("q2", "Is water wet?", true);
    inst.options = {Option{'A', "yes"}, Option{'B', "no"}};
    try {
        validate_instance(inst);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.code == ValidationError::Code::BadLabel);
    }
}

TEST_CASE("validate_instance rejects gold outside the option set") {
    TaskInstance inst = mc_instance("q3", "Pick one", {"a", "b", "c"}, 'A');
    inst.gold = AnswerKey::option('D');
    try {
        validate_instance(inst);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.code == ValidationError::Code::MissingGold);
    }
}

TEST_CASE("validate_instance names empty questions and duplicate options") {
    TaskInstance inst = mc_instance("q4", "", {"a", "b"}, 'A');
    try {
        validate_instance(inst);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.code == ValidationError::Code::EmptyQuestion);
    }

    TaskInstance dup = mc_instance("q5", "Pick", {"a", "b"}, 'A');
    dup.options[1].label = 'A';
    try {
        validate_instance(dup);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.code == ValidationError::Code::DuplicateOption);
    }
}

TEST_CASE("boolean gold normalizes through AnswerKey::parse") {
    CHECK(AnswerKey::parse("yes") == AnswerKey::boolean(true));
    CHECK(AnswerKey::parse("True") == AnswerKey::boolean(true));
    CHECK(AnswerKey::parse("FALSE") == AnswerKey::boolean(false));
    CHECK(AnswerKey::parse("b") == AnswerKey::option('B'));
    CHECK_THROWS_AS(AnswerKey::parse("maybe"), ValidationError);
}

TEST_CASE("render_options formats labeled lines in input order") {
    CHECK(render_options({Option{'A', "deep"}, Option{'B', "keep"}}) == "(A) deep\n(B) keep");
    CHECK(render_options({Option{'A', "only"}}) == "(A) only");
}

TEST_CASE("render_options rejects empty and unsorted inputs") {
    CHECK_THROWS_AS(render_options({}), ValidationError);
    try {
        render_options({Option{'B', "x"}, Option{'A', "y"}});
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(e.code == ValidationError::Code::UnsortedLabels);
    }
}

namespace {

Transcript random_transcript(std::mt19937& rng) {
    std::uniform_int_distribution<int> small(0, 4);
    std::uniform_int_distribution<int> chr(32, 126);
    auto text = [&](int max_len) {
        std::string s;
        int len = std::uniform_int_distribution<int>(0, max_len)(rng);
        for (int i = 0; i < len; ++i) s.push_back(static_cast<char>(chr(rng)));
        return s;
    };

    Transcript t;
    t.instance_id = "inst-" + std::to_string(small(rng));
    t.variant = kAllVariants[static_cast<std::size_t>(rng() % kAllVariants.size())];
    t.sample_index = small(rng);
    int stages = 1 + small(rng);
    for (int i = 0; i < stages; ++i) {
        StageRecord r;
        r.stage = kAllStageKinds[static_cast<std::size_t>(rng() % kAllStageKinds.size())];
        r.rendered_prompt = text(60);
        r.raw_completion = text(60);
        r.parsed_artifact = text(40);
        r.latency_ms = small(rng);
        if (small(rng) > 2) r.provider_meta["cached"] = "true";
        t.stages.push_back(std::move(r));
    }
    switch (small(rng)) {
        case 0: t.extracted = AnswerKey::option('B'); break;
        case 1: t.extracted = AnswerKey::boolean(true); break;
        case 2: t.extraction_failure = ExtractionFailureReason::NoPattern; break;
        case 3: t.failure = StageFailure{StageKind::MajorPremise, text(30)}; break;
        default: break;
    }
    return t;
}

}  // namespace

TEST_CASE("transcript JSONL round-trips field-for-field") {
    std::mt19937 rng(20240811);
    for (int i = 0; i < 200; ++i) {
        Transcript t = random_transcript(rng);
        Transcript back = transcript_from_jsonl(transcript_to_jsonl(t));
        CHECK(back == t);
    }
}

TEST_CASE("transcript parser rejects foreign schema versions") {
    CHECK_THROWS_AS(transcript_from_jsonl("{\"v\":99}"), IoError);
    CHECK_THROWS_AS(transcript_from_jsonl("not json"), IoError);
}

TEST_CASE("stage kind and variant names round-trip") {
    for (StageKind k : kAllStageKinds) CHECK(stage_kind_from_string(to_string(k)) == k);
    for (VariantId v : kAllVariants) CHECK(variant_from_string(to_string(v)) == v);
    CHECK_THROWS_AS(variant_from_string("nope"), ConfigError);
}

TEST_CASE("sampling params validation") {
    CHECK_NOTHROW(validate(SamplingParams{0.0, 1.0, 1, 1}));
    CHECK_THROWS_AS(validate(SamplingParams{-0.1, 0.3, 1, 10}), ConfigError);
    CHECK_THROWS_AS(validate(SamplingParams{0.2, 0.0, 1, 10}), ConfigError);
    CHECK_THROWS_AS(validate(SamplingParams{0.2, 0.3, 0, 10}), ConfigError);
    CHECK_THROWS_AS(validate(SamplingParams{0.2, 0.3, 1, 0}), ConfigError);
}
