#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace silicrowd {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutOfRange : Error { using Error::Error; };
struct FormatError : Error { using Error::Error; };
struct VersionError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct UnresolvedQuestion : Error { using Error::Error; };
struct EmptyInput : Error { using Error::Error; };
struct NoForecasts : Error { using Error::Error; };
struct DegenerateSample : Error { using Error::Error; };
struct DegenerateInput : Error { using Error::Error; };
struct LengthMismatch : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct MissingPlaceholder : Error { using Error::Error; };
struct MissingTranscript : Error { using Error::Error; };
struct BackendUnavailable : Error { using Error::Error; };

// ---------------------------------------------------------------------------
// Timestamps (UTC, second resolution)
// ---------------------------------------------------------------------------

struct Timestamp {
    std::int64_t unix_seconds = 0;
    auto operator<=>(const Timestamp&) const = default;
};

/// Accepts "YYYY-MM-DDTHH:MM:SS" followed by "Z" or "+00:00". Non-UTC offsets
/// are rejected: all stored times are UTC by contract.
Timestamp parse_timestamp(const std::string& text);
std::string format_timestamp(Timestamp t);  // always renders the "Z" suffix

// ---------------------------------------------------------------------------
// Probability
// ---------------------------------------------------------------------------

enum class Unit { fraction, percent };

/// Unit-interval probability. External files speak percent (0-100, two
/// decimals); everything internal is a fraction in [0,1].
class Probability {
public:
    Probability() = default;
    double value() const { return value_; }
    double percent() const { return value_ * 100.0; }
    auto operator<=>(const Probability&) const = default;

private:
    explicit Probability(double fraction) : value_(fraction) {}
    double value_ = 0.0;
    friend Probability make_probability(double raw, Unit unit);
};

/// Throws OutOfRange unless the canonical value lands in [0,1].
Probability make_probability(double raw, Unit unit);

// ---------------------------------------------------------------------------
// Questions
// ---------------------------------------------------------------------------

enum class Outcome { yes, no, unresolved };

struct TimelinePoint {
    Timestamp time;
    Probability median;
};

struct Question {
    std::string id;
    std::string title;
    std::string background;
    std::string resolution_criteria;
    Timestamp open_time;
    Timestamp close_time;
    Outcome outcome = Outcome::unresolved;
    std::vector<TimelinePoint> human_median_timeline;  // strictly increasing times
};

/// Yes -> 1, No -> 0. Unresolved questions are not scorable.
int outcome_value(const Question& q);

/// Throws FormatError on any structural invariant breach (times, timeline order).
void check_question(const Question& q);

/// Most recent human-median snapshot, if the timeline is nonempty.
std::optional<Probability> latest_human_median(const Question& q);

// ---------------------------------------------------------------------------
// Forecasts
// ---------------------------------------------------------------------------

enum class Phase { s1, s2_initial, s2_updated };
enum class Status { ok, technical_failure, refusal };

struct IntervalForecast {
    Probability low;
    Probability high;
    Probability midpoint() const;  // (low + high) / 2
};

/// Throws OutOfRange if low > high; swapping is the parser's job, not ours.
IntervalForecast make_interval(Probability low, Probability high);

/// Byte offsets into the raw response that produced the extracted value.
struct MatchedSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
    auto operator<=>(const MatchedSpan&) const = default;
};

struct ForecastRecord {
    std::string question_id;
    std::string model_id;
    int repetition = 1;
    Phase phase = Phase::s1;
    std::optional<Probability> probability;    // present iff status == ok
    std::optional<IntervalForecast> interval;  // study-2 phases; probability is its midpoint
    bool interval_swapped = false;
    std::optional<MatchedSpan> matched_span;
    Status status = Status::ok;
    Timestamp timestamp;
    std::string raw_response;
};

struct ModelSpec {
    std::string model_id;
    std::string display_name;
    bool internet_access = false;
    bool open_source = false;
    std::string provider;
    std::string country;
};

// Wire tokens (bundle JSON, transcript JSONL, CSV cells).
std::string phase_token(Phase p);
Phase parse_phase(const std::string& token);
std::string status_token(Status s);
Status parse_status(const std::string& token);
std::string outcome_token(Outcome o);
Outcome parse_outcome(const std::string& token);

// ---------------------------------------------------------------------------
// Dataset validation
// ---------------------------------------------------------------------------

struct ValidationFinding {
    std::string kind;     // dangling_question, dangling_model, duplicate_key, status_mismatch
    std::string message;
};

struct PhaseAudit {
    Phase phase = Phase::s1;
    long expected = 0;   // models x questions x repetitions
    long collected = 0;  // records with status ok
    long missing = 0;    // expected - collected
};

struct ValidationReport {
    std::vector<ValidationFinding> findings;
    std::vector<PhaseAudit> phases;  // one entry per phase present in the records
    bool clean() const { return findings.empty(); }
};

ValidationReport validate_dataset(const std::vector<ForecastRecord>& records,
                                  const std::vector<Question>& questions,
                                  const std::vector<ModelSpec>& models,
                                  int repetitions);

// ---------------------------------------------------------------------------
// Small shared utilities
// ---------------------------------------------------------------------------

/// FNV-1a 64-bit, rendered as 16 hex chars. Content fingerprints for prompts
/// and the determinism manifest.
std::string fnv1a_hex(const std::string& data);

}  // namespace silicrowd
