#include "silicrowd/store.hpp"

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <set>
#include <tuple>

#include "silicrowd/csv.hpp"

namespace silicrowd {

using json = nlohmann::json;
using ojson = nlohmann::ordered_json;

namespace {

void check_fields(const json& obj, const std::string& locus,
                  std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw FormatError(locus + ": expected a JSON object");
    for (const char* k : keys)
        if (!obj.contains(k)) throw FormatError(locus + ": missing field \"" + k + "\"");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : keys)
            if (it.key() == k) { known = true; break; }
        if (!known) throw FormatError(locus + ": unknown field \"" + it.key() + "\"");
    }
}

std::string get_string(const json& obj, const std::string& locus, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_string())
        throw FormatError(locus + ": field \"" + key + "\" must be a string");
    return v.get<std::string>();
}

double get_number(const json& obj, const std::string& locus, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number())
        throw FormatError(locus + ": field \"" + key + "\" must be a number");
    return v.get<double>();
}

bool get_bool(const json& obj, const std::string& locus, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_boolean())
        throw FormatError(locus + ": field \"" + key + "\" must be a boolean");
    return v.get<bool>();
}

int get_int(const json& obj, const std::string& locus, const char* key) {
    const auto& v = obj.at(key);
    if (!v.is_number_integer())
        throw FormatError(locus + ": field \"" + key + "\" must be an integer");
    return v.get<int>();
}

Question parse_question(const json& jq, const std::string& locus) {
    check_fields(jq, locus,
                 {"id", "title", "background", "resolution_criteria", "open_time",
                  "close_time", "outcome", "human_median_timeline"});
    Question q;
    q.id = get_string(jq, locus, "id");
    q.title = get_string(jq, locus, "title");
    q.background = get_string(jq, locus, "background");
    q.resolution_criteria = get_string(jq, locus, "resolution_criteria");
    q.open_time = parse_timestamp(get_string(jq, locus, "open_time"));
    q.close_time = parse_timestamp(get_string(jq, locus, "close_time"));
    q.outcome = parse_outcome(get_string(jq, locus, "outcome"));
    const auto& jt = jq.at("human_median_timeline");
    if (!jt.is_array())
        throw FormatError(locus + ": field \"human_median_timeline\" must be an array");
    for (std::size_t i = 0; i < jt.size(); ++i) {
        const std::string tl = locus + ".human_median_timeline[" + std::to_string(i) + "]";
        check_fields(jt[i], tl, {"time", "median_pct"});
        TimelinePoint pt;
        pt.time = parse_timestamp(get_string(jt[i], tl, "time"));
        pt.median = make_probability(get_number(jt[i], tl, "median_pct"), Unit::percent);
        q.human_median_timeline.push_back(pt);
    }
    check_question(q);
    return q;
}

ModelSpec parse_model(const json& jm, const std::string& locus) {
    check_fields(jm, locus,
                 {"model_id", "display_name", "internet_access", "open_source",
                  "provider", "country"});
    ModelSpec m;
    m.model_id = get_string(jm, locus, "model_id");
    m.display_name = get_string(jm, locus, "display_name");
    m.internet_access = get_bool(jm, locus, "internet_access");
    m.open_source = get_bool(jm, locus, "open_source");
    m.provider = get_string(jm, locus, "provider");
    m.country = get_string(jm, locus, "country");
    return m;
}

}  // namespace

TournamentBundle parse_bundle(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("bundle: invalid JSON: ") + e.what());
    }
    check_fields(root, "bundle", {"version", "questions", "models"});
    TournamentBundle bundle;
    bundle.version = get_string(root, "bundle", "version");
    if (bundle.version != kBundleVersion)
        throw VersionError("bundle: unrecognized version \"" + bundle.version +
                           "\" (expected \"" + kBundleVersion + "\")");
    const auto& jqs = root.at("questions");
    if (!jqs.is_array()) throw FormatError("bundle: field \"questions\" must be an array");
    std::set<std::string> qids;
    for (std::size_t i = 0; i < jqs.size(); ++i) {
        Question q = parse_question(jqs[i], "questions[" + std::to_string(i) + "]");
        if (!qids.insert(q.id).second)
            throw FormatError("questions[" + std::to_string(i) + "]: duplicate question id \"" +
                              q.id + "\"");
        bundle.questions.push_back(std::move(q));
    }
    const auto& jms = root.at("models");
    if (!jms.is_array()) throw FormatError("bundle: field \"models\" must be an array");
    std::set<std::string> mids;
    for (std::size_t i = 0; i < jms.size(); ++i) {
        ModelSpec m = parse_model(jms[i], "models[" + std::to_string(i) + "]");
        if (!mids.insert(m.model_id).second)
            throw FormatError("models[" + std::to_string(i) + "]: duplicate model id \"" +
                              m.model_id + "\"");
        bundle.models.push_back(std::move(m));
    }
    return bundle;
}

TournamentBundle load_bundle(const std::string& path) {
    return parse_bundle(read_file(path));
}

std::string render_bundle(const TournamentBundle& bundle) {
    ojson root;
    root["version"] = bundle.version;
    root["questions"] = ojson::array();
    for (const auto& q : bundle.questions) {
        ojson jq;
        jq["id"] = q.id;
        jq["title"] = q.title;
        jq["background"] = q.background;
        jq["resolution_criteria"] = q.resolution_criteria;
        jq["open_time"] = format_timestamp(q.open_time);
        jq["close_time"] = format_timestamp(q.close_time);
        jq["outcome"] = outcome_token(q.outcome);
        jq["human_median_timeline"] = ojson::array();
        for (const auto& pt : q.human_median_timeline) {
            ojson jp;
            jp["time"] = format_timestamp(pt.time);
            jp["median_pct"] = pt.median.percent();
            jq["human_median_timeline"].push_back(jp);
        }
        root["questions"].push_back(jq);
    }
    root["models"] = ojson::array();
    for (const auto& m : bundle.models) {
        ojson jm;
        jm["model_id"] = m.model_id;
        jm["display_name"] = m.display_name;
        jm["internet_access"] = m.internet_access;
        jm["open_source"] = m.open_source;
        jm["provider"] = m.provider;
        jm["country"] = m.country;
        root["models"].push_back(jm);
    }
    return root.dump(2) + "\n";
}

void save_bundle(const std::string& path, const TournamentBundle& bundle) {
    write_file(path, render_bundle(bundle));
}

// ---------------------------------------------------------------------------
// Transcripts
// ---------------------------------------------------------------------------

std::string render_transcript_line(const TranscriptEntry& entry) {
    ojson j;
    j["question_id"] = entry.question_id;
    j["model_id"] = entry.model_id;
    j["repetition"] = entry.repetition;
    j["phase"] = phase_token(entry.phase);
    j["prompt_fingerprint"] = entry.prompt_fingerprint;
    j["request_time"] = format_timestamp(entry.request_time);
    j["response_text"] = entry.response_text;
    j["status"] = status_token(entry.status);
    return j.dump();
}

TranscriptEntry parse_transcript_line(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::parse_error& e) {
        throw FormatError(std::string("transcript: invalid JSON line: ") + e.what());
    }
    check_fields(j, "transcript entry",
                 {"question_id", "model_id", "repetition", "phase", "prompt_fingerprint",
                  "request_time", "response_text", "status"});
    TranscriptEntry entry;
    entry.question_id = get_string(j, "transcript entry", "question_id");
    entry.model_id = get_string(j, "transcript entry", "model_id");
    entry.repetition = get_int(j, "transcript entry", "repetition");
    entry.phase = parse_phase(get_string(j, "transcript entry", "phase"));
    entry.prompt_fingerprint = get_string(j, "transcript entry", "prompt_fingerprint");
    entry.request_time = parse_timestamp(get_string(j, "transcript entry", "request_time"));
    entry.response_text = get_string(j, "transcript entry", "response_text");
    entry.status = parse_status(get_string(j, "transcript entry", "status"));
    return entry;
}

void append_transcript(const std::string& log_path, const TranscriptEntry& entry) {
    // Serialize first so schema errors surface before any bytes land.
    const std::string line = render_transcript_line(entry) + "\n";
    std::ofstream out(log_path, std::ios::binary | std::ios::app);
    if (!out) throw IoError("cannot open " + log_path + " for append");
    out.write(line.data(), static_cast<std::streamsize>(line.size()));
    out.flush();
    if (!out) throw IoError("append failed for " + log_path);
}

std::vector<TranscriptEntry> read_transcript(const std::string& log_path) {
    const std::string text = read_file(log_path);
    std::vector<TranscriptEntry> entries;
    std::size_t start = 0;
    long line_no = 0;
    while (start < text.size()) {
        const std::size_t nl = text.find('\n', start);
        if (nl == std::string::npos) break;  // torn final line, not committed
        ++line_no;
        const std::string line = text.substr(start, nl - start);
        start = nl + 1;
        if (line.empty()) continue;
        try {
            entries.push_back(parse_transcript_line(line));
        } catch (const FormatError& e) {
            throw FormatError(log_path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return entries;
}

// ---------------------------------------------------------------------------
// Forecast tables
// ---------------------------------------------------------------------------

void sort_records(std::vector<ForecastRecord>& records) {
    std::sort(records.begin(), records.end(),
              [](const ForecastRecord& a, const ForecastRecord& b) {
                  return std::tie(a.question_id, a.model_id, a.repetition, a.phase) <
                         std::tie(b.question_id, b.model_id, b.repetition, b.phase);
              });
}

void export_forecast_table(const std::vector<ForecastRecord>& records,
                           const std::string& path) {
    std::vector<ForecastRecord> sorted = records;
    sort_records(sorted);
    CsvTable table;
    table.header = {"question_id", "model_id",   "repetition",    "phase",
                    "status",      "probability_pct", "low_pct",  "high_pct",
                    "swapped",     "matched_begin",   "matched_end", "timestamp",
                    "raw_response"};
    for (const auto& r : sorted) {
        table.rows.push_back(
            {r.question_id, r.model_id, format_long(r.repetition), phase_token(r.phase),
             status_token(r.status),
             r.probability ? format_pct2(r.probability->percent()) : "",
             r.interval ? format_pct2(r.interval->low.percent()) : "",
             r.interval ? format_pct2(r.interval->high.percent()) : "",
             r.interval_swapped ? "1" : "0",
             r.matched_span ? format_long(static_cast<long>(r.matched_span->begin)) : "",
             r.matched_span ? format_long(static_cast<long>(r.matched_span->end)) : "",
             format_timestamp(r.timestamp), r.raw_response});
    }
    write_csv(path, table);
}

std::vector<ForecastRecord> import_forecast_table(const std::string& path) {
    const CsvTable table = read_csv(path);
    const std::vector<std::string> expected = {
        "question_id", "model_id",        "repetition", "phase",
        "status",      "probability_pct", "low_pct",    "high_pct",
        "swapped",     "matched_begin",   "matched_end", "timestamp",
        "raw_response"};
    if (table.header != expected)
        throw FormatError(path + ": unexpected forecast table header");
    std::vector<ForecastRecord> records;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::string locus = path + " row " + std::to_string(i + 1);
        try {
            ForecastRecord r;
            r.question_id = row[0];
            r.model_id = row[1];
            r.repetition = std::stoi(row[2]);
            r.phase = parse_phase(row[3]);
            r.status = parse_status(row[4]);
            if (!row[5].empty())
                r.probability = make_probability(std::stod(row[5]), Unit::percent);
            if (row[6].empty() != row[7].empty())
                throw FormatError("interval bounds must be both present or both absent");
            if (!row[6].empty())
                r.interval = make_interval(make_probability(std::stod(row[6]), Unit::percent),
                                           make_probability(std::stod(row[7]), Unit::percent));
            if (row[8] != "0" && row[8] != "1")
                throw FormatError("swapped must be 0 or 1");
            r.interval_swapped = row[8] == "1";
            if (row[9].empty() != row[10].empty())
                throw FormatError("matched span must be both present or both absent");
            if (!row[9].empty())
                r.matched_span = MatchedSpan{static_cast<std::size_t>(std::stol(row[9])),
                                             static_cast<std::size_t>(std::stol(row[10]))};
            r.timestamp = parse_timestamp(row[11]);
            r.raw_response = row[12];
            records.push_back(std::move(r));
        } catch (const std::exception& e) {
            throw FormatError(locus + ": " + e.what());
        }
    }
    return records;
}

}  // namespace silicrowd
