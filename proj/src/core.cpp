#include "silicrowd/core.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

namespace silicrowd {

// ---------------------------------------------------------------------------
// Timestamps
// ---------------------------------------------------------------------------

namespace {

// Days since 1970-01-01 for a proleptic Gregorian civil date (Hinnant).
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d) - 1u;
    const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
    m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
    y = static_cast<int>(yy + (m <= 2));
}

bool all_digits(const std::string& s, std::size_t from, std::size_t n) {
    if (from + n > s.size()) return false;
    for (std::size_t i = from; i < from + n; ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

int leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

int days_in_month(int y, int m) {
    static const int d[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return m == 2 ? d[1] + leap(y) : d[m - 1];
}

}  // namespace

Timestamp parse_timestamp(const std::string& text) {
    // YYYY-MM-DDTHH:MM:SS then Z or +00:00
    auto fail = [&](const char* why) -> Timestamp {
        throw FormatError(std::string("bad timestamp \"") + text + "\": " + why);
    };
    if (text.size() != 20 && text.size() != 25) fail("wrong length");
    if (!all_digits(text, 0, 4) || text[4] != '-' || !all_digits(text, 5, 2) ||
        text[7] != '-' || !all_digits(text, 8, 2) || text[10] != 'T' ||
        !all_digits(text, 11, 2) || text[13] != ':' || !all_digits(text, 14, 2) ||
        text[16] != ':' || !all_digits(text, 17, 2))
        fail("expected YYYY-MM-DDTHH:MM:SS");
    const std::string tail = text.substr(19);
    if (tail != "Z" && tail != "+00:00") fail("offset must be UTC (Z or +00:00)");
    const int y = std::stoi(text.substr(0, 4));
    const int mo = std::stoi(text.substr(5, 2));
    const int d = std::stoi(text.substr(8, 2));
    const int h = std::stoi(text.substr(11, 2));
    const int mi = std::stoi(text.substr(14, 2));
    const int s = std::stoi(text.substr(17, 2));
    if (mo < 1 || mo > 12) fail("month out of range");
    if (d < 1 || d > days_in_month(y, mo)) fail("day out of range");
    if (h > 23 || mi > 59 || s > 59) fail("time out of range");
    return Timestamp{days_from_civil(y, mo, d) * 86400 + h * 3600 + mi * 60 + s};
}

std::string format_timestamp(Timestamp t) {
    std::int64_t days = t.unix_seconds / 86400;
    std::int64_t rem = t.unix_seconds % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y, m, d;
    civil_from_days(days, y, m, d);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", y, m, d,
                  static_cast<int>(rem / 3600), static_cast<int>(rem % 3600 / 60),
                  static_cast<int>(rem % 60));
    return buf;
}

// ---------------------------------------------------------------------------
// Probability
// ---------------------------------------------------------------------------

Probability make_probability(double raw, Unit unit) {
    if (!std::isfinite(raw)) throw OutOfRange("probability input not finite");
    const double v = unit == Unit::percent ? raw / 100.0 : raw;
    if (v < 0.0 || v > 1.0)
        throw OutOfRange("probability " + std::to_string(raw) + " outside [0,1]");
    return Probability(v);
}

// ---------------------------------------------------------------------------
// Questions
// ---------------------------------------------------------------------------

int outcome_value(const Question& q) {
    switch (q.outcome) {
        case Outcome::yes: return 1;
        case Outcome::no: return 0;
        case Outcome::unresolved: break;
    }
    throw UnresolvedQuestion("question " + q.id + " is unresolved");
}

void check_question(const Question& q) {
    if (q.id.empty()) throw FormatError("question with empty id");
    if (!(q.open_time < q.close_time))
        throw FormatError("question " + q.id + ": open_time must precede close_time");
    for (std::size_t i = 1; i < q.human_median_timeline.size(); ++i) {
        if (!(q.human_median_timeline[i - 1].time < q.human_median_timeline[i].time))
            throw FormatError("question " + q.id +
                              ": human_median_timeline times must be strictly increasing");
    }
}

std::optional<Probability> latest_human_median(const Question& q) {
    if (q.human_median_timeline.empty()) return std::nullopt;
    return q.human_median_timeline.back().median;
}

// ---------------------------------------------------------------------------
// Forecasts
// ---------------------------------------------------------------------------

Probability IntervalForecast::midpoint() const {
    return make_probability((low.value() + high.value()) / 2.0, Unit::fraction);
}

IntervalForecast make_interval(Probability low, Probability high) {
    if (low.value() > high.value()) throw OutOfRange("interval low exceeds high");
    return IntervalForecast{low, high};
}

std::string phase_token(Phase p) {
    switch (p) {
        case Phase::s1: return "s1";
        case Phase::s2_initial: return "s2_initial";
        case Phase::s2_updated: return "s2_updated";
    }
    throw DomainError("unknown phase");
}

Phase parse_phase(const std::string& token) {
    if (token == "s1") return Phase::s1;
    if (token == "s2_initial") return Phase::s2_initial;
    if (token == "s2_updated") return Phase::s2_updated;
    throw FormatError("unknown phase token \"" + token + "\"");
}

std::string status_token(Status s) {
    switch (s) {
        case Status::ok: return "Ok";
        case Status::technical_failure: return "TechnicalFailure";
        case Status::refusal: return "Refusal";
    }
    throw DomainError("unknown status");
}

Status parse_status(const std::string& token) {
    if (token == "Ok") return Status::ok;
    if (token == "TechnicalFailure") return Status::technical_failure;
    if (token == "Refusal") return Status::refusal;
    throw FormatError("unknown status token \"" + token + "\"");
}

std::string outcome_token(Outcome o) {
    switch (o) {
        case Outcome::yes: return "Yes";
        case Outcome::no: return "No";
        case Outcome::unresolved: return "Unresolved";
    }
    throw DomainError("unknown outcome");
}

Outcome parse_outcome(const std::string& token) {
    if (token == "Yes") return Outcome::yes;
    if (token == "No") return Outcome::no;
    if (token == "Unresolved") return Outcome::unresolved;
    throw FormatError("unknown outcome token \"" + token + "\"");
}

// ---------------------------------------------------------------------------
// Dataset validation
// ---------------------------------------------------------------------------

ValidationReport validate_dataset(const std::vector<ForecastRecord>& records,
                                  const std::vector<Question>& questions,
                                  const std::vector<ModelSpec>& models,
                                  int repetitions) {
    ValidationReport report;
    std::set<std::string> question_ids, model_ids;
    for (const auto& q : questions) question_ids.insert(q.id);
    for (const auto& m : models) model_ids.insert(m.model_id);

    std::set<std::tuple<std::string, std::string, int, std::string>> seen;
    std::map<Phase, long> ok_counts;
    std::set<Phase> phases_present;

    for (const auto& r : records) {
        phases_present.insert(r.phase);
        const std::string key = r.question_id + "/" + r.model_id + "/" +
                                std::to_string(r.repetition) + "/" + phase_token(r.phase);
        if (!question_ids.count(r.question_id))
            report.findings.push_back(
                {"dangling_question", "record " + key + " references unknown question"});
        if (!model_ids.count(r.model_id))
            report.findings.push_back(
                {"dangling_model", "record " + key + " references unknown model"});
        if (!seen.insert({r.question_id, r.model_id, r.repetition, phase_token(r.phase)}).second)
            report.findings.push_back({"duplicate_key", "duplicate record key " + key});
        const bool has_p = r.probability.has_value();
        if (has_p != (r.status == Status::ok))
            report.findings.push_back(
                {"status_mismatch",
                 "record " + key + ": probability present iff status ok is violated"});
        if (r.status == Status::ok) ok_counts[r.phase] += 1;
    }

    for (Phase p : phases_present) {
        PhaseAudit audit;
        audit.phase = p;
        audit.expected = static_cast<long>(models.size()) *
                         static_cast<long>(questions.size()) * repetitions;
        audit.collected = ok_counts[p];
        audit.missing = audit.expected - audit.collected;
        report.phases.push_back(audit);
    }
    return report;
}

// ---------------------------------------------------------------------------
// Utilities
// ---------------------------------------------------------------------------

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace silicrowd
