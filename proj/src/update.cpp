#include "silicrowd/update.hpp"

#include <cmath>
#include <map>
#include <set>

namespace silicrowd {

namespace {

std::string run_key(const UpdatePair& p) {
    return p.question_id + "#" + std::to_string(p.repetition);
}

}  // namespace

PairSet build_pairs(const std::vector<ForecastRecord>& records,
                    const std::vector<Question>& questions) {
    std::map<std::string, const Question*> by_id;
    for (const auto& q : questions) by_id[q.id] = &q;

    using Key = std::tuple<std::string, std::string, int>;
    std::map<Key, const ForecastRecord*> initial, updated;
    for (const auto& r : records) {
        if (r.phase == Phase::s1) continue;
        auto& slot = (r.phase == Phase::s2_initial ? initial : updated)[Key{
            r.question_id, r.model_id, r.repetition}];
        if (slot)
            throw FormatError("duplicate " + phase_token(r.phase) + " record for " +
                              r.question_id + "/" + r.model_id + "/" +
                              std::to_string(r.repetition));
        slot = &r;
    }

    std::set<Key> keys;
    for (const auto& [k, v] : initial) keys.insert(k);
    for (const auto& [k, v] : updated) keys.insert(k);

    PairSet out;
    for (const auto& key : keys) {
        const auto& [qid, mid, rep] = key;
        auto exclude = [&](const std::string& reason) {
            out.exclusions.push_back({qid, mid, rep, reason});
        };
        const auto ii = initial.find(key);
        const auto ui = updated.find(key);
        if (ii == initial.end()) {
            exclude("no initial forecast record");
            continue;
        }
        if (ui == updated.end()) {
            exclude("no updated forecast record");
            continue;
        }
        const ForecastRecord& pre = *ii->second;
        const ForecastRecord& post = *ui->second;
        if (pre.status != Status::ok || !pre.interval) {
            exclude("initial forecast " + status_token(pre.status));
            continue;
        }
        if (post.status != Status::ok || !post.interval) {
            exclude("updated forecast " + status_token(post.status));
            continue;
        }
        const auto qit = by_id.find(qid);
        if (qit == by_id.end()) throw FormatError("pair references unknown question " + qid);
        const Question& q = *qit->second;
        const auto median = latest_human_median(q);
        if (!median)
            throw MissingPlaceholder("question " + qid +
                                     ": no human median recorded for pairing");
        UpdatePair pair;
        pair.question_id = qid;
        pair.model_id = mid;
        pair.repetition = rep;
        pair.pre = *pre.interval;
        pair.post = *post.interval;
        pair.human_median = *median;
        pair.outcome = outcome_value(q);
        out.pairs.push_back(std::move(pair));
    }
    return out;
}

std::vector<UpdatePair> pairs_for_model(const std::vector<UpdatePair>& pairs,
                                        const std::string& model_id) {
    std::vector<UpdatePair> out;
    for (const auto& p : pairs)
        if (p.model_id == model_id) out.push_back(p);
    return out;
}

AccuracyShift accuracy_shift(const std::vector<UpdatePair>& pairs) {
    if (pairs.size() < 2) throw DegenerateSample("accuracy shift needs >= 2 pairs");
    AccuracyShift out;
    std::map<std::string, double> pre_scores, post_scores;
    std::vector<double> pre_list, post_list;
    for (const auto& p : pairs) {
        const double pre = brier(p.pre.midpoint(), p.outcome);
        const double post = brier(p.post.midpoint(), p.outcome);
        pre_scores[run_key(p)] = pre;
        post_scores[run_key(p)] = post;
        pre_list.push_back(pre);
        post_list.push_back(post);
    }
    const std::string label = pairs.front().model_id;
    out.pre = make_series(label + " initial", pre_scores);
    out.post = make_series(label + " updated", post_scores);
    out.test = t_paired(post_list, pre_list, Tail::two_sided);
    return out;
}

IntervalShift interval_shift(const std::vector<UpdatePair>& pairs) {
    if (pairs.size() < 2) throw DegenerateSample("interval shift needs >= 2 pairs");
    std::vector<double> pre_w, post_w;
    for (const auto& p : pairs) {
        pre_w.push_back((p.pre.high.percent() - p.pre.low.percent()));
        post_w.push_back((p.post.high.percent() - p.post.low.percent()));
    }
    IntervalShift out;
    out.mean_width_pre = mean_of(pre_w);
    out.sd_width_pre = sample_sd(pre_w);
    out.mean_width_post = mean_of(post_w);
    out.sd_width_post = sample_sd(post_w);
    out.test = t_paired(post_w, pre_w, Tail::lower);
    return out;
}

StatResult deviation_adjustment(const std::vector<UpdatePair>& pairs, DeviationMode mode) {
    if (pairs.size() < 3) throw DegenerateSample("deviation adjustment needs >= 3 pairs");
    std::vector<double> x, y;
    for (const auto& p : pairs) {
        double dx = p.human_median.value() - p.pre.midpoint().value();
        double dy = p.post.midpoint().value() - p.pre.midpoint().value();
        if (mode == DeviationMode::absolute_dev) {
            dx = std::fabs(dx);
            dy = std::fabs(dy);
        }
        x.push_back(dx);
        y.push_back(dy);
    }
    return pearson_r(x, y);
}

AverageBenchmark average_benchmark(const std::vector<UpdatePair>& pairs) {
    if (pairs.size() < 2) throw DegenerateSample("average benchmark needs >= 2 pairs");
    AverageBenchmark out;
    std::map<std::string, double> bench_scores;
    std::vector<double> bench_list, post_list;
    for (const auto& p : pairs) {
        const Probability bench = make_probability(
            (p.pre.midpoint().value() + p.human_median.value()) / 2.0, Unit::fraction);
        const double b = brier(bench, p.outcome);
        bench_scores[run_key(p)] = b;
        bench_list.push_back(b);
        post_list.push_back(brier(p.post.midpoint(), p.outcome));
    }
    out.benchmark = make_series(pairs.front().model_id + " human-machine average",
                                bench_scores);
    out.test = t_paired(post_list, bench_list, Tail::two_sided);
    return out;
}

std::string deviation_group(const UpdatePair& p) {
    const double gap = p.pre.midpoint().percent() - p.human_median.percent();
    if (gap > 20.0) return "above";
    if (gap < -20.0) return "below";
    return "within";
}

}  // namespace silicrowd
