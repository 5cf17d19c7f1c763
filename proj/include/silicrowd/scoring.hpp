#pragma once

#include <map>
#include <string>
#include <vector>

#include "silicrowd/core.hpp"

namespace silicrowd {

struct ScoreSeries {
    std::string label;
    // key is the question id (or "qid#rep" for run-level series); map keeps
    // iteration deterministic
    std::map<std::string, double> scores;
    double mean = 0.0;
    double sd = 0.0;  // sample SD, n-1 denominator; 0 when n < 2
    std::vector<double> values() const;
};

struct CalibrationBin {
    double lo = 0.0, hi = 0.0;
    long n = 0;
    double mean_forecast = 0.0;   // undefined (0) when n == 0, excluded from sums
    double observed_freq = 0.0;
};

struct CalibrationBins {
    std::vector<CalibrationBin> bins;
    long total = 0;
};

struct MurphyDecomposition {
    double brier = 0.0;
    double reliability = 0.0;    // equals the calibration index
    double resolution = 0.0;
    double uncertainty = 0.0;
    double residual = 0.0;       // closes the identity against the exact mean Brier
};

double brier(Probability f, int outcome);

ScoreSeries score_series(const std::string& label,
                         const std::map<std::string, Probability>& forecasts,
                         const std::vector<Question>& questions);
ScoreSeries make_series(const std::string& label,
                        const std::map<std::string, double>& scores);

// Equal-width bins over [0,1]; final bin right-closed, others right-open.
CalibrationBins calibration_bins(const std::vector<double>& forecasts,
                                 const std::vector<int>& outcomes, int k);
double calibration_index(const CalibrationBins& bins);
MurphyDecomposition murphy(const std::vector<double>& forecasts,
                           const std::vector<int>& outcomes, int k);

}  // namespace silicrowd
