#pragma once

#include <optional>
#include <string>
#include <vector>

#include "silicrowd/core.hpp"
#include "silicrowd/store.hpp"

namespace silicrowd {

enum class ParseKind { point, interval, yes_no_coded, unparseable };
std::string parse_kind_token(ParseKind k);

struct ParseOutcome {
    ParseKind kind = ParseKind::unparseable;
    std::optional<Probability> point;           // point / yes_no_coded
    std::optional<IntervalForecast> interval;   // interval only
    bool swapped = false;
    std::optional<MatchedSpan> matched_span;
};

// Last in-range number wins. A response whose first word is Yes/No and that
// contains no usable number is coded 0.99/0.01.
ParseOutcome parse_point(const std::string& text);

// Matches "between <x>% and <y>%" case-insensitively anywhere in the text,
// last occurrence wins; a reversed pair is swapped and flagged.
ParseOutcome parse_interval(const std::string& text);

// One record per distinct (question_id, model_id, repetition, phase); when a
// key has several entries (retries), the final one is the attempt that counts.
// s1 entries are parsed as points, s2 phases as intervals; unparseable Ok
// entries become Refusal with the raw text preserved.
std::vector<ForecastRecord> classify_batch(const std::vector<TranscriptEntry>& entries);

}  // namespace silicrowd
