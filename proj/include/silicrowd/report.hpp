#pragma once

#include <optional>
#include <string>
#include <vector>

#include "silicrowd/aggregate.hpp"
#include "silicrowd/csv.hpp"
#include "silicrowd/gateway.hpp"
#include "silicrowd/stats.hpp"
#include "silicrowd/store.hpp"
#include "silicrowd/update.hpp"

namespace silicrowd {

enum class RunMode { record, replay };
std::string run_mode_token(RunMode m);
RunMode parse_run_mode(const std::string& token);

struct RunConfig {
    int study = 1;
    std::string bundle_path;
    std::string transcript_log;
    RunMode mode = RunMode::replay;
    // record mode: backends to query (required). replay mode: optional filter,
    // defaulting to every model that appears in the log.
    std::vector<std::string> backends;
    int bins = 10;
    BhMode bh_mode = BhMode::paper_literal;
    double alpha = 0.05;
    AggregationMode aggregation = AggregationMode::pooled;
    std::string output_dir;
    // reference for the acquiescence test quoted in the summary; the stats
    // table always carries both the 0 and 50 rows
    double mu0 = 50.0;
    std::optional<double> kde_bandwidth;  // overrides Silverman's rule
    bool welch = false;                   // Welch instead of the pooled two-sample t
    DeviationMode deviation = DeviationMode::signed_dev;
    BackendPolicy policy;
};

// Gaussian-kernel density estimate on an even grid over [0,1].
struct KdeCurve {
    double bandwidth = 0.0;
    std::vector<double> x;
    std::vector<double> density;
};

// 0.9 * min(sd, IQR/1.34) * n^(-1/5), floored at 1e-6 so tied samples stay
// finite.
double silverman_bandwidth(const std::vector<double>& values);
KdeCurve kde_curve(const std::vector<double>& values, int grid_points,
                   std::optional<double> bandwidth_override = std::nullopt);

// Medians per question: one crowd column plus a column per model present in
// the records (bundle order).
CsvTable aggregate_table(const TournamentBundle& bundle,
                         const std::vector<ForecastRecord>& records, AggregationMode mode);
// Mean Brier per scored series: models ascending by mean, then Human, then
// Aggregate.
CsvTable brier_table(const TournamentBundle& bundle,
                     const std::vector<ForecastRecord>& records, AggregationMode mode);

// Each run writes its tables under config.output_dir and returns the file
// names in write order. Degenerate statistics are flagged in their table rows;
// bad inputs propagate as typed errors.
std::vector<std::string> run_study1(const RunConfig& config);
std::vector<std::string> run_study2(const RunConfig& config);

}  // namespace silicrowd
