#include "silicrowd/parser.hpp"

#include <cctype>
#include <map>
#include <regex>

namespace silicrowd {

std::string parse_kind_token(ParseKind k) {
    switch (k) {
        case ParseKind::point: return "Point";
        case ParseKind::interval: return "Interval";
        case ParseKind::yes_no_coded: return "YesNoCoded";
        case ParseKind::unparseable: return "Unparseable";
    }
    throw DomainError("unknown parse kind");
}

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

struct NumberToken {
    double value = 0.0;
    std::size_t begin = 0, end = 0;
    bool negative = false;
};

// Scans decimal tokens, treating 1,234-style groups as one number so that a
// figure like "1,000" is seen as a thousand, not as "000".
std::vector<NumberToken> scan_numbers(const std::string& text) {
    std::vector<NumberToken> tokens;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        const bool digit_start = is_digit(text[i]);
        const bool dot_start = text[i] == '.' && i + 1 < n && is_digit(text[i + 1]) &&
                               (i == 0 || !is_digit(text[i - 1]));
        if (!digit_start && !dot_start) {
            ++i;
            continue;
        }
        NumberToken tok;
        tok.begin = i;
        std::string digits;
        if (digit_start) {
            while (i < n && is_digit(text[i])) digits += text[i++];
            // thousands groups: comma plus exactly three digits
            while (i + 3 < n && text[i] == ',' && is_digit(text[i + 1]) &&
                   is_digit(text[i + 2]) && is_digit(text[i + 3]) &&
                   (i + 4 >= n || !is_digit(text[i + 4]))) {
                digits += text[i + 1];
                digits += text[i + 2];
                digits += text[i + 3];
                i += 4;
            }
        }
        if (i < n && text[i] == '.' && i + 1 < n && is_digit(text[i + 1])) {
            digits += '.';
            ++i;
            while (i < n && is_digit(text[i])) digits += text[i++];
        }
        tok.end = i;
        // a minus directly before the token counts as a sign unless glued to a
        // word (hyphenated names like "covid-19")
        if (tok.begin > 0 && text[tok.begin - 1] == '-' &&
            (tok.begin < 2 || !is_alnum(text[tok.begin - 2])))
            tok.negative = true;
        tok.value = std::stod(digits);
        tokens.push_back(tok);
    }
    return tokens;
}

std::string first_word(const std::string& text) {
    std::size_t i = 0;
    while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
    std::string word;
    while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i])))
        word += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++])));
    return word;
}

}  // namespace

ParseOutcome parse_point(const std::string& text) {
    ParseOutcome out;
    const auto tokens = scan_numbers(text);
    for (auto it = tokens.rbegin(); it != tokens.rend(); ++it) {
        if (it->negative || it->value < 0.0 || it->value > 100.0) continue;
        out.kind = ParseKind::point;
        out.point = make_probability(it->value, Unit::percent);
        out.matched_span = MatchedSpan{it->begin, it->end};
        return out;
    }
    const std::string word = first_word(text);
    if (word == "yes" || word == "no") {
        out.kind = ParseKind::yes_no_coded;
        out.point = make_probability(word == "yes" ? 0.99 : 0.01, Unit::fraction);
        std::size_t pos = 0;
        while (pos < text.size() && !std::isalpha(static_cast<unsigned char>(text[pos]))) ++pos;
        out.matched_span = MatchedSpan{pos, pos + word.size()};
        return out;
    }
    return out;  // unparseable
}

ParseOutcome parse_interval(const std::string& text) {
    static const std::regex pattern(
        R"(between\s*([0-9]+(?:\.[0-9]+)?|\.[0-9]+)\s*%\s*and\s*([0-9]+(?:\.[0-9]+)?|\.[0-9]+)\s*%)",
        std::regex::icase);
    ParseOutcome out;
    auto begin = std::sregex_iterator(text.begin(), text.end(), pattern);
    auto end = std::sregex_iterator();
    for (auto it = begin; it != end; ++it) {
        const double a = std::stod((*it)[1].str());
        const double b = std::stod((*it)[2].str());
        if (a > 100.0 || b > 100.0) continue;
        const bool swap = a > b;
        const Probability lo = make_probability(swap ? b : a, Unit::percent);
        const Probability hi = make_probability(swap ? a : b, Unit::percent);
        out.kind = ParseKind::interval;
        out.interval = make_interval(lo, hi);
        out.swapped = swap;
        out.matched_span = MatchedSpan{static_cast<std::size_t>(it->position(0)),
                                       static_cast<std::size_t>(it->position(0)) +
                                           static_cast<std::size_t>(it->length(0))};
    }
    return out;
}

std::vector<ForecastRecord> classify_batch(const std::vector<TranscriptEntry>& entries) {
    using Key = std::tuple<std::string, std::string, int, Phase>;
    std::map<Key, const TranscriptEntry*> last;
    for (const auto& e : entries)
        last[Key{e.question_id, e.model_id, e.repetition, e.phase}] = &e;

    std::vector<ForecastRecord> records;
    for (const auto& [key, entry] : last) {
        ForecastRecord r;
        r.question_id = entry->question_id;
        r.model_id = entry->model_id;
        r.repetition = entry->repetition;
        r.phase = entry->phase;
        r.timestamp = entry->request_time;
        r.raw_response = entry->response_text;
        if (entry->status != Status::ok) {
            r.status = entry->status;
            records.push_back(std::move(r));
            continue;
        }
        const ParseOutcome parsed = entry->phase == Phase::s1
                                        ? parse_point(entry->response_text)
                                        : parse_interval(entry->response_text);
        if (parsed.kind == ParseKind::unparseable) {
            r.status = Status::refusal;
        } else {
            r.status = Status::ok;
            if (parsed.interval) {
                r.interval = parsed.interval;
                r.probability = parsed.interval->midpoint();
                r.interval_swapped = parsed.swapped;
            } else {
                r.probability = parsed.point;
            }
            r.matched_span = parsed.matched_span;
        }
        records.push_back(std::move(r));
    }
    sort_records(records);
    return records;
}

}  // namespace silicrowd
