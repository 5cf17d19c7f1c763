#pragma once

#include <string>
#include <vector>

#include "silicrowd/core.hpp"

namespace silicrowd {

inline constexpr const char* kBundleVersion = "silicrowd.bundle/1";

struct TournamentBundle {
    std::string version = kBundleVersion;
    std::vector<Question> questions;
    std::vector<ModelSpec> models;
};

// Strict JSON: unknown fields rejected with a field locus, version checked,
// question ids unique, per-question invariants enforced.
TournamentBundle load_bundle(const std::string& path);
TournamentBundle parse_bundle(const std::string& json_text);
std::string render_bundle(const TournamentBundle& bundle);
void save_bundle(const std::string& path, const TournamentBundle& bundle);

struct TranscriptEntry {
    std::string question_id;
    std::string model_id;
    int repetition = 1;
    Phase phase = Phase::s1;
    std::string prompt_fingerprint;
    Timestamp request_time;
    std::string response_text;
    Status status = Status::ok;
};

// One JSON object per line; the line is written and flushed as a unit so a
// torn final line never parses as a record.
void append_transcript(const std::string& log_path, const TranscriptEntry& entry);
// Skips a trailing unterminated line (torn write); throws FormatError for a
// malformed committed line.
std::vector<TranscriptEntry> read_transcript(const std::string& log_path);
std::string render_transcript_line(const TranscriptEntry& entry);
TranscriptEntry parse_transcript_line(const std::string& line);

void export_forecast_table(const std::vector<ForecastRecord>& records,
                           const std::string& path);
std::vector<ForecastRecord> import_forecast_table(const std::string& path);

// Sorts by (question_id, model_id, repetition, phase); phase in enum order.
void sort_records(std::vector<ForecastRecord>& records);

}  // namespace silicrowd
