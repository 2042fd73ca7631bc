#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "srfot/aggregate.hpp"
#include "test_util.hpp"

using namespace srfot;

namespace {

std::vector<char> labels(const std::string& s) { return {s.begin(), s.end()}; }

AnswerKey expect_key(const ExtractOutcome& o) {
    REQUIRE(extraction_ok(o));
    return std::get<AnswerKey>(o);
}

ExtractionFailureReason expect_failure(const ExtractOutcome& o) {
    REQUIRE(!extraction_ok(o));
    return std::get<ExtractionFailure>(o).reason;
}

// Independent voting oracles: quadratic scans instead of maps, iterated
// argmax instead of sorting. Kept deliberately separate from the library.
VoteResult oracle_majority(const std::vector<AnswerKey>& answers) {
    VoteResult r;
    r.considered = static_cast<int>(answers.size());
    for (const auto& a : answers) {
        int count = 0;
        for (const auto& b : answers) {
            if (a == b) ++count;
        }
        r.counts[a.value()] = count;
    }
    int best = 0;
    for (const auto& [value, count] : r.counts) best = std::max(best, count);
    int winners = 0;
    for (const auto& [value, count] : r.counts) {
        if (count == best) ++winners;
    }
    r.tie = winners > 1;
    for (const auto& a : answers) {
        if (r.counts[a.value()] == best) {
            r.winner = a;
            break;
        }
    }
    return r;
}

VoteResult oracle_complexity(std::vector<std::pair<AnswerKey, int>> samples, int k) {
    std::vector<std::pair<AnswerKey, std::size_t>> chosen;  // answer + original index
    std::vector<bool> used(samples.size(), false);
    for (int round = 0; round < k && round < static_cast<int>(samples.size()); ++round) {
        std::size_t best = samples.size();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (used[i]) continue;
            if (best == samples.size() || samples[i].second > samples[best].second) best = i;
        }
        used[best] = true;
        chosen.emplace_back(samples[best].first, best);
    }
    std::sort(chosen.begin(), chosen.end(),
              [](const auto& a, const auto& b) { return a.second < b.second; });
    std::vector<AnswerKey> ballot;
    for (const auto& [key, idx] : chosen) ballot.push_back(key);
    return oracle_majority(ballot);
}

void check_same(const VoteResult& got, const VoteResult& want) {
    CHECK(got.winner == want.winner);
    CHECK(got.counts == want.counts);
    CHECK(got.tie == want.tie);
    CHECK(got.considered == want.considered);
}

}  // namespace

TEST_CASE("terminal marker extraction") {
    CHECK(expect_key(extract_answer("...so the answer is (B).", AnswerSpace::MultipleChoice,
                                    labels("ABC"))) == AnswerKey::option('B'));
    CHECK(expect_key(extract_answer("Answer: C", AnswerSpace::MultipleChoice, labels("ABC"))) ==
          AnswerKey::option('C'));
    CHECK(expect_failure(extract_answer("The answer is (E).", AnswerSpace::MultipleChoice,
                                        labels("ABC"))) ==
          ExtractionFailureReason::OutOfRangeLabel);
}

TEST_CASE("boolean keyword extraction") {
    CHECK(expect_key(extract_answer("Therefore, yes, it would.", AnswerSpace::Boolean, {})) ==
          AnswerKey::boolean(true));
    CHECK(expect_key(extract_answer("The evidence says otherwise. It is false.",
                                    AnswerSpace::Boolean, {})) == AnswerKey::boolean(false));
    CHECK(expect_failure(extract_answer("Hard to say.", AnswerSpace::Boolean, {})) ==
          ExtractionFailureReason::NoPattern);
}

TEST_CASE("final-sentence option letters ignore non-label capitals") {
    CHECK(expect_key(extract_answer("I think the rule points at B.", AnswerSpace::MultipleChoice,
                                    labels("ABC"))) == AnswerKey::option('B'));
    // "I" is standalone but not an option letter.
    CHECK(expect_failure(extract_answer("I cannot tell.", AnswerSpace::MultipleChoice,
                                        labels("ABC"))) == ExtractionFailureReason::NoPattern);
}

TEST_CASE("extraction corpus gate: >= 95% success") {
    std::ifstream in("tests/fixtures/extraction_corpus.jsonl");
    REQUIRE(in.good());
    std::string line;
    int total = 0;
    int success = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto j = nlohmann::json::parse(line);
        ++total;
        AnswerSpace space =
            j.at("space") == "mc" ? AnswerSpace::MultipleChoice : AnswerSpace::Boolean;
        ExtractOutcome outcome =
            extract_answer(j.at("text"), space, labels(j.at("labels").get<std::string>()));
        std::string expected = j.at("expected").get<std::string>();
        if (expected.rfind('!', 0) == 0) {
            // Deliberately unextractable rows double-check the failure reason.
            CHECK(expect_failure(outcome) == extraction_failure_from_string(expected.substr(1)));
            continue;
        }
        if (extraction_ok(outcome) && std::get<AnswerKey>(outcome).value() == expected) {
            ++success;
        } else {
            MESSAGE("extraction miss on: ", j.at("text").get<std::string>());
        }
    }
    REQUIRE(total == 40);
    CHECK(static_cast<double>(success) / total >= 0.95);
}

TEST_CASE("extraction is total and deterministic on arbitrary bytes") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> byte(0, 255);
    std::uniform_int_distribution<int> len(0, 2000);
    for (int i = 0; i < 500; ++i) {
        std::string text;
        int n = len(rng);
        for (int j = 0; j < n; ++j) text.push_back(static_cast<char>(byte(rng)));
        AnswerSpace space = i % 2 ? AnswerSpace::Boolean : AnswerSpace::MultipleChoice;
        ExtractOutcome a = extract_answer(text, space, labels("ABCDE"));
        ExtractOutcome b = extract_answer(text, space, labels("ABCDE"));
        CHECK(a == b);
    }
}

TEST_CASE("majority vote examples") {
    auto yes = AnswerKey::boolean(true);
    auto no = AnswerKey::boolean(false);
    VoteResult r = majority_vote({yes, yes, no});
    CHECK(r.winner == yes);
    CHECK(r.counts.at("yes") == 2);
    CHECK(r.counts.at("no") == 1);
    CHECK_FALSE(r.tie);
    CHECK(r.considered == 3);

    VoteResult t = majority_vote({AnswerKey::option('A'), AnswerKey::option('B')});
    CHECK(t.winner == AnswerKey::option('A'));
    CHECK(t.tie);

    std::vector<AnswerKey> ten;
    for (int i = 0; i < 6; ++i) ten.push_back(AnswerKey::option('C'));
    for (int i = 0; i < 4; ++i) ten.push_back(AnswerKey::option('A'));
    VoteResult big = majority_vote(ten);
    CHECK(big.winner == AnswerKey::option('C'));
    CHECK(big.considered == 10);

    CHECK_THROWS_AS(majority_vote({}), EmptyBallotError);
}

TEST_CASE("complexity score counts lines and Step markers") {
    CHECK(complexity_score("a\nb\nc\nd\ne") == 5);
    CHECK(complexity_score("Step 1 we look. Then Step 3 we conclude.\nDone.") == 3);
    CHECK(complexity_score("\n\nStep 1: x\n\nStep 2: y\nStep 3: z\n\nStep 4: w\n\n") == 4);
    CHECK(complexity_score("single line") == 1);
    CHECK(complexity_score("steppe 12 is not a marker") == 1);
    CHECK(complexity_score("") == 0);
}

TEST_CASE("complexity vote takes the k highest-scoring samples") {
    std::vector<std::pair<AnswerKey, int>> samples = {
        {AnswerKey::option('A'), 5},
        {AnswerKey::option('B'), 3},
        {AnswerKey::option('A'), 4},
        {AnswerKey::option('B'), 1},
    };
    VoteResult r = complexity_vote(samples, 2);
    CHECK(r.winner == AnswerKey::option('A'));
    CHECK(r.counts.at("A") == 2);
    CHECK(r.considered == 2);

    CHECK_THROWS_AS(complexity_vote({}, 1), EmptyBallotError);
    CHECK_THROWS_AS(complexity_vote(samples, 0), ConfigError);
}

TEST_CASE("randomized ballots match the brute-force oracle") {
    std::mt19937 rng(20250809);
    std::uniform_int_distribution<int> n_dist(1, 10);
    std::uniform_int_distribution<int> alpha_dist(1, 5);
    std::uniform_int_distribution<int> score_dist(0, 6);
    for (int trial = 0; trial < 1000; ++trial) {
        int n = n_dist(rng);
        int alphabet = alpha_dist(rng);
        std::vector<AnswerKey> answers;
        std::vector<std::pair<AnswerKey, int>> scored;
        for (int i = 0; i < n; ++i) {
            AnswerKey key = AnswerKey::option(static_cast<char>('A' + rng() % alphabet));
            answers.push_back(key);
            scored.emplace_back(key, score_dist(rng));
        }
        check_same(majority_vote(answers), oracle_majority(answers));
        int k = 1 + static_cast<int>(rng() % n);
        check_same(complexity_vote(scored, k), oracle_complexity(scored, k));
        // k = n degenerates to plain majority voting.
        check_same(complexity_vote(scored, n), majority_vote(answers));
    }
}

TEST_CASE("majority vote is permutation invariant") {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        int n = 1 + static_cast<int>(rng() % 10);
        std::vector<AnswerKey> answers;
        for (int i = 0; i < n; ++i) {
            answers.push_back(AnswerKey::option(static_cast<char>('A' + rng() % 4)));
        }
        VoteResult base = majority_vote(answers);
        std::vector<AnswerKey> shuffled = answers;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        VoteResult perm = majority_vote(shuffled);
        CHECK(perm.counts == base.counts);
        CHECK(perm.tie == base.tie);
        if (!base.tie) CHECK(perm.winner == base.winner);
    }
}
