#pragma once

#include <string>
#include <vector>

#include "silicrowd/core.hpp"
#include "silicrowd/scoring.hpp"
#include "silicrowd/stats.hpp"

namespace silicrowd {

struct UpdatePair {
    std::string question_id;
    std::string model_id;
    int repetition = 1;
    IntervalForecast pre;
    IntervalForecast post;
    Probability human_median;  // the value that was rendered into the prompt
    int outcome = 0;
};

struct PairExclusion {
    std::string question_id;
    std::string model_id;
    int repetition = 1;
    std::string reason;
};

struct PairSet {
    std::vector<UpdatePair> pairs;
    std::vector<PairExclusion> exclusions;
};

// One pair per (model, question, repetition); anything incomplete lands in
// exclusions rather than failing the build. Duplicate phase records throw.
PairSet build_pairs(const std::vector<ForecastRecord>& records,
                    const std::vector<Question>& questions);

std::vector<UpdatePair> pairs_for_model(const std::vector<UpdatePair>& pairs,
                                        const std::string& model_id);

// Run-level series keyed "question_id#repetition".
struct AccuracyShift {
    ScoreSeries pre;
    ScoreSeries post;
    StatResult test;  // paired t on post - pre Brier, two-sided
};
AccuracyShift accuracy_shift(const std::vector<UpdatePair>& pairs);

struct IntervalShift {
    double mean_width_pre = 0.0;   // percent points
    double sd_width_pre = 0.0;
    double mean_width_post = 0.0;
    double sd_width_post = 0.0;
    StatResult test;  // paired t on post - pre width, lower-tailed (narrowing)
};
IntervalShift interval_shift(const std::vector<UpdatePair>& pairs);

enum class DeviationMode { signed_dev, absolute_dev };
// signed: x = human - pre midpoint, y = post midpoint - pre midpoint;
// absolute: |x| vs |y|.
StatResult deviation_adjustment(const std::vector<UpdatePair>& pairs, DeviationMode mode);

struct AverageBenchmark {
    ScoreSeries benchmark;  // Brier of (pre midpoint + human median) / 2
    StatResult test;        // paired t on post - benchmark Brier, two-sided
};
AverageBenchmark average_benchmark(const std::vector<UpdatePair>& pairs);

// Position of the pre-intervention midpoint relative to the human median:
// "above"/"below" when more than 20 percent points away, else "within".
std::string deviation_group(const UpdatePair& p);

}  // namespace silicrowd
