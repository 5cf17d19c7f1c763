#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "silicrowd/core.hpp"

namespace silicrowd {

enum class AggregationMode { pooled, median_of_medians };
std::string aggregation_mode_token(AggregationMode m);

struct AggregateTable {
    // question_id -> crowd median; present iff the question has >= 1 Ok forecast
    std::map<std::string, Probability> per_question_crowd_median;
    // (model_id, question_id) -> median over Ok repetitions; absent if none
    std::map<std::pair<std::string, std::string>, Probability> per_model_median;
    // (model_id, question_id) -> count of Ok repetitions
    std::map<std::pair<std::string, std::string>, int> coverage;
};

double median(std::vector<double> values);  // EmptyInput on empty

std::optional<Probability> model_median(const std::vector<ForecastRecord>& records,
                                        const std::string& model_id,
                                        const std::string& question_id);

// Pools every Ok forecast on the question (all models, all repetitions).
Probability crowd_median(const std::vector<ForecastRecord>& records,
                         const std::string& question_id);
Probability crowd_median_of_medians(const std::vector<ForecastRecord>& records,
                                    const std::string& question_id);

AggregateTable aggregate(const std::vector<ForecastRecord>& records,
                         AggregationMode mode = AggregationMode::pooled);

}  // namespace silicrowd
