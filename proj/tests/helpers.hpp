#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "silicrowd/core.hpp"

namespace silicrowd::test {

inline std::string fixture_dir() { return SILICROWD_FIXTURE_DIR; }

// Fresh scratch directory under the test runner's cwd.
inline std::string work_dir(const std::string& name) {
    const auto dir = std::filesystem::current_path() / "scratch" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir.string();
}

// Tiny deterministic generator so property tests reproduce exactly.
struct TestRng {
    std::uint64_t state;
    explicit TestRng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() {
        std::uint64_t x = state += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    int uniform_int(int lo, int hi) {
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

inline Question basic_question(const std::string& id, Outcome outcome,
                               double human_median_pct = 60.0) {
    Question q;
    q.id = id;
    q.title = "Will event " + id + " happen before 2024?";
    q.background = "Background for " + id + ".";
    q.resolution_criteria = "Resolves Yes if event " + id + " happens.";
    q.open_time = parse_timestamp("2023-11-01T00:00:00Z");
    q.close_time = parse_timestamp("2023-12-31T23:59:59Z");
    q.outcome = outcome;
    q.human_median_timeline = {
        {parse_timestamp("2023-11-15T00:00:00Z"),
         make_probability(human_median_pct / 2.0, Unit::percent)},
        {parse_timestamp("2023-12-01T00:00:00Z"),
         make_probability(human_median_pct, Unit::percent)},
    };
    return q;
}

inline ModelSpec basic_model(const std::string& id) {
    ModelSpec m;
    m.model_id = id;
    m.display_name = id;
    m.provider = "test";
    m.country = "test";
    return m;
}

inline ForecastRecord ok_record(const std::string& qid, const std::string& mid, int rep,
                                Phase phase, double pct) {
    ForecastRecord r;
    r.question_id = qid;
    r.model_id = mid;
    r.repetition = rep;
    r.phase = phase;
    r.probability = make_probability(pct, Unit::percent);
    r.status = Status::ok;
    r.timestamp = parse_timestamp("2023-12-05T12:00:00Z");
    return r;
}

inline ForecastRecord interval_record(const std::string& qid, const std::string& mid,
                                      int rep, Phase phase, double lo_pct,
                                      double hi_pct) {
    ForecastRecord r = ok_record(qid, mid, rep, phase, (lo_pct + hi_pct) / 2.0);
    r.interval = make_interval(make_probability(lo_pct, Unit::percent),
                               make_probability(hi_pct, Unit::percent));
    return r;
}

}  // namespace silicrowd::test
