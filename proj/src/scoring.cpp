#include "silicrowd/scoring.hpp"

#include <cmath>

namespace silicrowd {

std::vector<double> ScoreSeries::values() const {
    std::vector<double> out;
    out.reserve(scores.size());
    for (const auto& [k, v] : scores) out.push_back(v);
    return out;
}

double brier(Probability f, int outcome) {
    if (outcome != 0 && outcome != 1) throw DomainError("outcome must be 0 or 1");
    const double d = f.value() - outcome;
    return d * d;
}

namespace {

void finish_series(ScoreSeries& s) {
    const std::size_t n = s.scores.size();
    if (n == 0) {
        s.mean = 0.0;
        s.sd = 0.0;
        return;
    }
    double sum = 0.0;
    for (const auto& [k, v] : s.scores) sum += v;
    s.mean = sum / static_cast<double>(n);
    if (n < 2) {
        s.sd = 0.0;
        return;
    }
    double ss = 0.0;
    for (const auto& [k, v] : s.scores) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(n - 1));
}

}  // namespace

ScoreSeries score_series(const std::string& label,
                         const std::map<std::string, Probability>& forecasts,
                         const std::vector<Question>& questions) {
    std::map<std::string, const Question*> by_id;
    for (const auto& q : questions) by_id[q.id] = &q;
    ScoreSeries s;
    s.label = label;
    for (const auto& [qid, f] : forecasts) {
        const auto it = by_id.find(qid);
        if (it == by_id.end())
            throw FormatError("score_series: unknown question id \"" + qid + "\"");
        s.scores[qid] = brier(f, outcome_value(*it->second));
    }
    finish_series(s);
    return s;
}

ScoreSeries make_series(const std::string& label,
                        const std::map<std::string, double>& scores) {
    ScoreSeries s;
    s.label = label;
    s.scores = scores;
    finish_series(s);
    return s;
}

CalibrationBins calibration_bins(const std::vector<double>& forecasts,
                                 const std::vector<int>& outcomes, int k) {
    if (k < 1) throw DomainError("calibration needs at least one bin");
    if (forecasts.empty()) throw NoForecasts("calibration needs at least one forecast");
    if (forecasts.size() != outcomes.size())
        throw LengthMismatch("forecast/outcome length mismatch");
    CalibrationBins out;
    out.bins.resize(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        out.bins[i].lo = static_cast<double>(i) / k;
        out.bins[i].hi = static_cast<double>(i + 1) / k;
    }
    std::vector<double> fsum(static_cast<std::size_t>(k), 0.0);
    std::vector<double> osum(static_cast<std::size_t>(k), 0.0);
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double f = forecasts[i];
        if (!(f >= 0.0 && f <= 1.0)) throw OutOfRange("forecast outside [0,1]");
        if (outcomes[i] != 0 && outcomes[i] != 1)
            throw DomainError("outcome must be 0 or 1");
        int bin = static_cast<int>(std::floor(f * k));
        if (bin >= k) bin = k - 1;  // f == 1.0 lands in the right-closed final bin
        out.bins[bin].n += 1;
        fsum[bin] += f;
        osum[bin] += outcomes[i];
    }
    for (int i = 0; i < k; ++i) {
        if (out.bins[i].n > 0) {
            out.bins[i].mean_forecast = fsum[i] / static_cast<double>(out.bins[i].n);
            out.bins[i].observed_freq = osum[i] / static_cast<double>(out.bins[i].n);
        }
        out.total += out.bins[i].n;
    }
    return out;
}

double calibration_index(const CalibrationBins& bins) {
    double sum = 0.0;
    for (const auto& b : bins.bins) {
        if (b.n == 0) continue;
        const double gap = b.mean_forecast - b.observed_freq;
        sum += static_cast<double>(b.n) * gap * gap;
    }
    return sum / static_cast<double>(bins.total);
}

MurphyDecomposition murphy(const std::vector<double>& forecasts,
                           const std::vector<int>& outcomes, int k) {
    const CalibrationBins bins = calibration_bins(forecasts, outcomes, k);
    const double n = static_cast<double>(bins.total);
    MurphyDecomposition d;
    double base_sum = 0.0;
    for (int o : outcomes) base_sum += o;
    const double base_rate = base_sum / n;
    d.uncertainty = base_rate * (1.0 - base_rate);
    d.reliability = calibration_index(bins);
    for (const auto& b : bins.bins) {
        if (b.n == 0) continue;
        const double dev = b.observed_freq - base_rate;
        d.resolution += static_cast<double>(b.n) * dev * dev;
    }
    d.resolution /= n;
    double brier_sum = 0.0;
    for (std::size_t i = 0; i < forecasts.size(); ++i) {
        const double diff = forecasts[i] - outcomes[i];
        brier_sum += diff * diff;
    }
    d.brier = brier_sum / n;
    d.residual = d.brier - (d.uncertainty + d.reliability - d.resolution);
    return d;
}

}  // namespace silicrowd
