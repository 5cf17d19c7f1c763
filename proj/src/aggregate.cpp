#include "silicrowd/aggregate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace silicrowd {

std::string aggregation_mode_token(AggregationMode m) {
    switch (m) {
        case AggregationMode::pooled: return "pooled";
        case AggregationMode::median_of_medians: return "median_of_medians";
    }
    throw DomainError("unknown aggregation mode");
}

double median(std::vector<double> values) {
    if (values.empty()) throw EmptyInput("median of empty list");
    for (double v : values)
        if (!std::isfinite(v)) throw DomainError("median input not finite");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

namespace {

std::vector<double> ok_values(const std::vector<ForecastRecord>& records,
                              const std::string& model_id, const std::string& question_id,
                              bool any_model) {
    std::vector<double> out;
    for (const auto& r : records) {
        if (r.status != Status::ok || !r.probability) continue;
        if (r.question_id != question_id) continue;
        if (!any_model && r.model_id != model_id) continue;
        out.push_back(r.probability->value());
    }
    return out;
}

}  // namespace

std::optional<Probability> model_median(const std::vector<ForecastRecord>& records,
                                        const std::string& model_id,
                                        const std::string& question_id) {
    const auto values = ok_values(records, model_id, question_id, false);
    if (values.empty()) return std::nullopt;
    return make_probability(median(values), Unit::fraction);
}

Probability crowd_median(const std::vector<ForecastRecord>& records,
                         const std::string& question_id) {
    const auto values = ok_values(records, "", question_id, true);
    if (values.empty()) throw NoForecasts("no Ok forecasts on question " + question_id);
    return make_probability(median(values), Unit::fraction);
}

Probability crowd_median_of_medians(const std::vector<ForecastRecord>& records,
                                    const std::string& question_id) {
    std::set<std::string> models;
    for (const auto& r : records)
        if (r.question_id == question_id) models.insert(r.model_id);
    std::vector<double> medians;
    for (const auto& m : models) {
        const auto mm = model_median(records, m, question_id);
        if (mm) medians.push_back(mm->value());
    }
    if (medians.empty()) throw NoForecasts("no Ok forecasts on question " + question_id);
    return make_probability(median(medians), Unit::fraction);
}

AggregateTable aggregate(const std::vector<ForecastRecord>& records, AggregationMode mode) {
    AggregateTable table;
    std::set<std::string> questions;
    std::set<std::pair<std::string, std::string>> cells;
    for (const auto& r : records) {
        questions.insert(r.question_id);
        cells.insert({r.model_id, r.question_id});
    }
    for (const auto& cell : cells) {
        int ok = 0;
        for (const auto& r : records)
            if (r.model_id == cell.first && r.question_id == cell.second &&
                r.status == Status::ok)
                ++ok;
        table.coverage[cell] = ok;
        const auto mm = model_median(records, cell.first, cell.second);
        if (mm) table.per_model_median[cell] = *mm;
    }
    for (const auto& q : questions) {
        try {
            const Probability med = mode == AggregationMode::pooled
                                        ? crowd_median(records, q)
                                        : crowd_median_of_medians(records, q);
            table.per_question_crowd_median.insert({q, med});
        } catch (const NoForecasts&) {
            // question with zero Ok forecasts has no crowd median
        }
    }
    return table;
}

}  // namespace silicrowd
