#include "srfot/aggregate.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace srfot {

namespace {

bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
bool is_alpha(char c) { return std::isalpha(static_cast<unsigned char>(c)) != 0; }

std::string lowered(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    return out;
}

// Last segment (split on .!?\n) containing any alphanumeric character.
std::string final_sentence(const std::string& text) {
    std::size_t end = text.size();
    while (end > 0) {
        std::size_t start = end;
        while (start > 0) {
            char c = text[start - 1];
            if (c == '.' || c == '!' || c == '?' || c == '\n') break;
            --start;
        }
        std::string seg = text.substr(start, end - start);
        if (std::any_of(seg.begin(), seg.end(), is_alnum)) return seg;
        end = start == 0 ? 0 : start - 1;
    }
    return {};
}

bool word_at(const std::string& lower, std::size_t pos, std::string_view word) {
    if (lower.compare(pos, word.size(), word) != 0) return false;
    if (pos > 0 && is_alnum(lower[pos - 1])) return false;
    std::size_t after = pos + word.size();
    return after >= lower.size() || !is_alnum(lower[after]);
}

std::size_t skip_filler(const std::string& text, std::size_t pos) {
    static constexpr std::string_view kFiller = " \t\r\n:*\"'(";
    while (pos < text.size() && kFiller.find(text[pos]) != std::string_view::npos) ++pos;
    return pos;
}

std::optional<std::string> read_word(const std::string& lower, std::size_t pos) {
    std::size_t end = pos;
    while (end < lower.size() && is_alpha(lower[end])) ++end;
    if (end == pos) return std::nullopt;
    return lower.substr(pos, end - pos);
}

std::optional<bool> boolean_keyword(std::string_view word) {
    if (word == "yes" || word == "true") return true;
    if (word == "no" || word == "false") return false;
    return std::nullopt;
}

// Position right after the last "the answer is" / "answer:" marker, if any.
std::optional<std::size_t> last_terminal_marker(const std::string& lower) {
    std::optional<std::size_t> best;
    for (std::string_view marker : {std::string_view("the answer is"), std::string_view("answer:")}) {
        std::size_t from = 0;
        while (true) {
            std::size_t hit = lower.find(marker, from);
            if (hit == std::string::npos) break;
            std::size_t after = hit + marker.size();
            if (!best || after > *best) best = after;
            from = hit + 1;
        }
    }
    return best;
}

ExtractOutcome fail(ExtractionFailureReason r) { return ExtractionFailure{r}; }

}  // namespace

ExtractOutcome extract_answer(const std::string& text, AnswerSpace space,
                              const std::vector<char>& labels) {
    const std::string lower = lowered(text);

    // Rule 1: terminal marker.
    if (auto marker = last_terminal_marker(lower)) {
        std::size_t pos = skip_filler(text, *marker);
        if (space == AnswerSpace::MultipleChoice) {
            if (pos < text.size() && is_alpha(text[pos]) &&
                (pos + 1 >= text.size() || !is_alnum(text[pos + 1]))) {
                char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(text[pos])));
                if (std::find(labels.begin(), labels.end(), letter) == labels.end()) {
                    return fail(ExtractionFailureReason::OutOfRangeLabel);
                }
                return AnswerKey::option(letter);
            }
        } else {
            if (auto word = read_word(lower, pos)) {
                if (auto b = boolean_keyword(*word)) return AnswerKey::boolean(*b);
            }
        }
    }

    const std::string sentence = final_sentence(text);

    if (space == AnswerSpace::MultipleChoice) {
        // Rule 2: last standalone option letter in the final sentence.
        std::optional<char> found;
        for (std::size_t i = 0; i < sentence.size(); ++i) {
            if (!is_alpha(sentence[i])) continue;
            if (i > 0 && is_alnum(sentence[i - 1])) continue;
            if (i + 1 < sentence.size() && is_alnum(sentence[i + 1])) continue;
            char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(sentence[i])));
            if (std::find(labels.begin(), labels.end(), letter) != labels.end()) found = letter;
        }
        if (found) return AnswerKey::option(*found);
    } else {
        // Rule 3: last boolean keyword in the final sentence.
        const std::string sl = lowered(sentence);
        std::optional<bool> found;
        for (std::size_t i = 0; i < sl.size(); ++i) {
            if (!is_alpha(sl[i]) || (i > 0 && is_alnum(sl[i - 1]))) continue;
            if (auto word = read_word(sl, i)) {
                if (auto b = boolean_keyword(*word)) found = *b;
                i += word->size() - 1;
            }
        }
        if (found) return AnswerKey::boolean(*found);
    }

    return fail(ExtractionFailureReason::NoPattern);
}

VoteResult majority_vote(const std::vector<AnswerKey>& answers) {
    if (answers.empty()) throw EmptyBallotError();
    VoteResult result;
    result.considered = static_cast<int>(answers.size());
    std::map<std::string, std::size_t> first_seen;
    for (std::size_t i = 0; i < answers.size(); ++i) {
        const std::string& v = answers[i].value();
        ++result.counts[v];
        first_seen.emplace(v, i);
    }
    int best = 0;
    for (const auto& [value, count] : result.counts) best = std::max(best, count);
    std::size_t winner_pos = answers.size();
    int at_max = 0;
    for (const auto& [value, count] : result.counts) {
        if (count != best) continue;
        ++at_max;
        if (first_seen[value] < winner_pos) {
            winner_pos = first_seen[value];
            result.winner = answers[winner_pos];
        }
    }
    result.tie = at_max > 1;
    return result;
}

int complexity_score(const std::string& cot_text) {
    int lines = 0;
    bool line_has_content = false;
    for (char c : cot_text) {
        if (c == '\n') {
            if (line_has_content) ++lines;
            line_has_content = false;
        } else if (!std::isspace(static_cast<unsigned char>(c))) {
            line_has_content = true;
        }
    }
    if (line_has_content) ++lines;

    const std::string lower = lowered(cot_text);
    int max_step = 0;
    std::size_t from = 0;
    while (true) {
        std::size_t hit = lower.find("step", from);
        if (hit == std::string::npos) break;
        from = hit + 1;
        if (!word_at(lower, hit, "step")) continue;
        std::size_t pos = hit + 4;
        while (pos < lower.size() && (lower[pos] == ' ' || lower[pos] == '\t')) ++pos;
        int value = 0;
        bool any_digit = false;
        while (pos < lower.size() && std::isdigit(static_cast<unsigned char>(lower[pos]))) {
            value = value * 10 + (lower[pos] - '0');
            any_digit = true;
            ++pos;
            if (value > 1'000'000) break;  // implausible marker, stop accumulating
        }
        if (any_digit) max_step = std::max(max_step, value);
    }
    return std::max(lines, max_step);
}

VoteResult complexity_vote(const std::vector<std::pair<AnswerKey, int>>& samples, int k) {
    if (samples.empty()) throw EmptyBallotError();
    if (k < 1) throw ConfigError("complexity_vote: k must be >= 1");
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (samples[a].second != samples[b].second) return samples[a].second > samples[b].second;
        return a < b;
    });
    order.resize(std::min<std::size_t>(static_cast<std::size_t>(k), order.size()));
    std::sort(order.begin(), order.end());
    std::vector<AnswerKey> ballot;
    ballot.reserve(order.size());
    for (std::size_t i : order) ballot.push_back(samples[i].first);
    return majority_vote(ballot);
}

}  // namespace srfot
