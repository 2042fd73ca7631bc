#pragma once

#include <map>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "srfot/core.hpp"

namespace srfot {

struct ExtractionFailure {
    ExtractionFailureReason reason = ExtractionFailureReason::NoPattern;

    bool operator==(const ExtractionFailure&) const = default;
};

using ExtractOutcome = std::variant<AnswerKey, ExtractionFailure>;

// Pulls the final answer out of free-form completion text. Rules, tried in
// order, first match wins:
//   1. terminal marker "the answer is (X)" / "answer: X" (last occurrence)
//   2. multiple choice only: last standalone option letter in the final sentence
//   3. boolean only: last yes/true/no/false keyword in the final sentence
// A rule-1 letter outside `labels` fails with OutOfRangeLabel. Total on
// arbitrary input; never throws.
ExtractOutcome extract_answer(const std::string& text, AnswerSpace space,
                              const std::vector<char>& labels);

inline bool extraction_ok(const ExtractOutcome& o) {
    return std::holds_alternative<AnswerKey>(o);
}

struct VoteResult {
    AnswerKey winner;
    std::map<std::string, int> counts;
    bool tie = false;
    int considered = 0;
};

// Modal answer; ties broken by the earliest-sampled among tied values.
// Throws EmptyBallotError when `answers` is empty.
VoteResult majority_vote(const std::vector<AnswerKey>& answers);

// Reasoning-step count: max(non-empty lines, highest "Step k" marker).
int complexity_score(const std::string& cot_text);

// Majority vote over the k highest-scoring samples; score ties broken by the
// earlier sample index. k is clamped to the ballot size.
VoteResult complexity_vote(const std::vector<std::pair<AnswerKey, int>>& samples, int k);

}  // namespace srfot
