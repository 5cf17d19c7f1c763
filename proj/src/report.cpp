#include "silicrowd/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <set>
#include <utility>

#include "silicrowd/csv.hpp"
#include "silicrowd/parser.hpp"
#include "silicrowd/scoring.hpp"
#include "silicrowd/store.hpp"

namespace silicrowd {

namespace fs = std::filesystem;

std::string run_mode_token(RunMode m) {
    switch (m) {
        case RunMode::record: return "record";
        case RunMode::replay: return "replay";
    }
    throw DomainError("unknown run mode");
}

RunMode parse_run_mode(const std::string& token) {
    if (token == "record") return RunMode::record;
    if (token == "replay") return RunMode::replay;
    throw FormatError("unknown run mode: " + token);
}

// ---------------------------------------------------------------------------
// Kernel density estimate
// ---------------------------------------------------------------------------

namespace {

constexpr double kMinBandwidth = 1e-6;
constexpr double kPi = 3.14159265358979323846;
constexpr int kKdeGrid = 512;
constexpr double kEquivalenceD = 0.5;

double quantile_sorted(const std::vector<double>& sorted, double p) {
    const double idx = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(idx);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = idx - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

double silverman_bandwidth(const std::vector<double>& values) {
    if (values.empty()) throw EmptyInput("bandwidth of empty sample");
    if (values.size() < 2) return kMinBandwidth;
    const double sd = sample_sd(values);
    std::vector<double> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(sd, iqr / 1.34);
    const double h = 0.9 * spread * std::pow(static_cast<double>(values.size()), -0.2);
    return std::max(h, kMinBandwidth);
}

KdeCurve kde_curve(const std::vector<double>& values, int grid_points,
                   std::optional<double> bandwidth_override) {
    if (grid_points < 2) throw DomainError("kde needs at least 2 grid points");
    if (values.empty()) throw EmptyInput("kde of empty sample");
    const double h = bandwidth_override ? *bandwidth_override : silverman_bandwidth(values);
    if (!(h > 0.0)) throw DomainError("kde bandwidth must be positive");
    KdeCurve out;
    out.bandwidth = h;
    out.x.reserve(grid_points);
    out.density.reserve(grid_points);
    const double norm = 1.0 / (static_cast<double>(values.size()) * h * std::sqrt(2.0 * kPi));
    for (int j = 0; j < grid_points; ++j) {
        const double x = static_cast<double>(j) / static_cast<double>(grid_points - 1);
        double acc = 0.0;
        for (double v : values) {
            const double z = (x - v) / h;
            acc += std::exp(-0.5 * z * z);
        }
        out.x.push_back(x);
        out.density.push_back(acc * norm);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Shared run plumbing
// ---------------------------------------------------------------------------

namespace {

std::string deviation_token(DeviationMode m) {
    return m == DeviationMode::signed_dev ? "signed" : "absolute";
}

struct LoadedRun {
    TournamentBundle bundle;
    std::vector<TranscriptEntry> entries;
    std::vector<ForecastRecord> records;
    std::vector<std::string> model_order;  // bundle order, models present in the records
    std::map<std::string, const Question*> question_by_id;
    std::map<std::string, std::size_t> question_index;  // 1-based bundle position
};

LoadedRun load_run(const RunConfig& config) {
    LoadedRun run;
    run.bundle = load_bundle(config.bundle_path);
    if (config.mode == RunMode::record) {
        if (config.backends.empty())
            throw BackendUnavailable("record mode needs at least one backend");
        CollectContext ctx = CollectContext::real(config.transcript_log);
        const TemplateId tpl =
            config.study == 2 ? TemplateId::study2_initial : TemplateId::study1;
        for (const auto& name : config.backends) {
            HttpBackend backend(name);
            for (const auto& q : run.bundle.questions)
                collect(backend, q, tpl, config.policy, ctx);
        }
    }
    run.entries = read_transcript(config.transcript_log);
    run.records = classify_batch(run.entries);
    if (!config.backends.empty()) {
        const std::set<std::string> keep(config.backends.begin(), config.backends.end());
        std::erase_if(run.records,
                      [&](const ForecastRecord& r) { return !keep.count(r.model_id); });
    }
    std::set<std::string> seen;
    for (const auto& r : run.records) seen.insert(r.model_id);
    for (const auto& m : run.bundle.models)
        if (seen.count(m.model_id)) run.model_order.push_back(m.model_id);
    for (std::size_t i = 0; i < run.bundle.questions.size(); ++i) {
        const Question& q = run.bundle.questions[i];
        run.question_by_id[q.id] = &q;
        run.question_index[q.id] = i + 1;
    }
    return run;
}

std::string config_line(const RunConfig& c) {
    std::string s = "study=" + format_long(c.study);
    s += ";mode=" + run_mode_token(c.mode);
    s += ";bins=" + format_long(c.bins);
    s += ";bh=" + bh_mode_token(c.bh_mode);
    s += ";alpha=" + format_double(c.alpha);
    s += ";agg=" + aggregation_mode_token(c.aggregation);
    s += ";mu0=" + format_double(c.mu0);
    s += ";kde_bw=" + (c.kde_bandwidth ? format_double(*c.kde_bandwidth)
                                       : std::string("silverman"));
    s += ";welch=" + std::string(c.welch ? "1" : "0");
    s += ";deviation=" + deviation_token(c.deviation);
    s += ";reps=" + format_long(c.policy.repetitions);
    if (!c.backends.empty()) {
        s += ";backends=";
        for (std::size_t i = 0; i < c.backends.size(); ++i) {
            if (i) s += "+";
            s += c.backends[i];
        }
    }
    return s;
}

std::string manifest_text(const RunConfig& config) {
    std::string text;
    auto line = [&](const std::string& role, const std::string& ref) {
        text += role + "\t" + ref + "\t" + fnv1a_hex(role == "config" ? ref : read_file(ref)) +
                "\n";
    };
    line("bundle", config.bundle_path);
    line("transcript", config.transcript_log);
    line("config", config_line(config));
    return text;
}

// One row of the stats table; absent cells stay empty so a degenerate test is
// visible instead of fatal.
struct StatRow {
    std::string label;
    std::string method;
    std::optional<double> statistic, df1, df2, p_raw, bh_paper, bh_stepup, effect;
    std::string note;
};

StatRow stat_row(std::string label, const StatResult& s) {
    StatRow r;
    r.label = std::move(label);
    r.method = s.method;
    r.statistic = s.statistic;
    r.df1 = s.df1;
    if (s.df2) r.df2 = *s.df2;
    r.p_raw = s.p_value;
    if (s.effect_size) r.effect = *s.effect_size;
    return r;
}

void push_result(std::vector<StatRow>& rows, const std::string& label,
                 const std::optional<StatResult>& s, const std::string& note) {
    if (s) {
        rows.push_back(stat_row(label, *s));
        rows.back().note = note;
    } else {
        StatRow r;
        r.label = label;
        r.note = note;
        rows.push_back(r);
    }
}

template <typename Fn>
std::optional<StatResult> guard_stat(std::vector<StatRow>& rows, const std::string& label,
                                     Fn&& fn) {
    std::string what;
    try {
        StatResult s = fn();
        rows.push_back(stat_row(label, s));
        return s;
    } catch (const DegenerateSample& e) {
        what = e.what();
    } catch (const DegenerateInput& e) {
        what = e.what();
    } catch (const EmptyInput& e) {
        what = e.what();
    }
    StatRow r;
    r.label = label;
    r.note = "degenerate: " + what;
    rows.push_back(r);
    return std::nullopt;
}

void append_note(std::vector<StatRow>& rows, const std::string& extra) {
    StatRow& r = rows.back();
    r.note = r.note.empty() ? extra : r.note + "; " + extra;
}

// Fills both adjustment columns for the rows named by block, skipping rows
// whose test was degenerate.
void apply_bh(std::vector<StatRow>& rows, const std::vector<std::size_t>& block) {
    std::vector<double> raw;
    std::vector<std::size_t> idx;
    for (std::size_t i : block) {
        if (!rows[i].p_raw) continue;
        raw.push_back(*rows[i].p_raw);
        idx.push_back(i);
    }
    if (raw.empty()) return;
    const PValueSet lit = bh_adjust(raw, BhMode::paper_literal);
    const PValueSet step = bh_adjust(raw, BhMode::standard_step_up);
    for (std::size_t j = 0; j < idx.size(); ++j) {
        rows[idx[j]].bh_paper = lit.adjusted_p[j];
        rows[idx[j]].bh_stepup = step.adjusted_p[j];
    }
}

CsvTable stat_csv(const std::vector<StatRow>& rows) {
    CsvTable t;
    t.header = {"label",       "method",      "statistic",   "df1",         "df2",
                "p_raw",       "p_bh_paper",  "p_bh_stepup", "effect_size", "note"};
    auto cell = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    for (const auto& r : rows)
        t.rows.push_back({r.label, r.method, cell(r.statistic), cell(r.df1), cell(r.df2),
                          cell(r.p_raw), cell(r.bh_paper), cell(r.bh_stepup), cell(r.effect),
                          r.note});
    return t;
}

double chosen_bh(const StatRow& r, BhMode mode) {
    const auto& v = mode == BhMode::paper_literal ? r.bh_paper : r.bh_stepup;
    return v ? *v : 1.0;
}

std::string fixed_text(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string pretty_p(double p) {
    if (p < 0.001) return "<0.001";
    return fixed_text(p, 3);
}

std::string t_line(const StatResult& s) {
    return "t(" + format_double(s.df1) + ") = " + fixed_text(s.statistic, 2) +
           ", p = " + pretty_p(s.p_value);
}

std::vector<ModelSpec> present_models(const LoadedRun& run) {
    std::vector<ModelSpec> out;
    for (const auto& m : run.bundle.models)
        if (std::find(run.model_order.begin(), run.model_order.end(), m.model_id) !=
            run.model_order.end())
            out.push_back(m);
    return out;
}

std::string audit_lines(const ValidationReport& report) {
    std::string text;
    for (const auto& a : report.phases)
        text += "  phase " + phase_token(a.phase) + ": expected " + format_long(a.expected) +
                ", ok " + format_long(a.collected) + ", missing " + format_long(a.missing) +
                "\n";
    text += "  validation findings: " + format_long(static_cast<long>(report.findings.size())) +
            "\n";
    std::size_t shown = 0;
    for (const auto& f : report.findings) {
        if (shown == 5) {
            text += "    ...\n";
            break;
        }
        text += "    " + f.kind + ": " + f.message + "\n";
        ++shown;
    }
    return text;
}

struct Labeled {
    std::string label;
    std::map<std::string, Probability> forecasts;
    ScoreSeries scores;
};

struct SeriesSet {
    AggregateTable agg;
    std::vector<std::string> model_order;  // models present, bundle order
    std::vector<Labeled> models;           // scored models only
    std::vector<std::string> unscored;     // present but without a single Ok forecast
    Labeled crowd;
    Labeled human;
};

SeriesSet build_series(const TournamentBundle& bundle,
                       const std::vector<ForecastRecord>& records, AggregationMode mode) {
    SeriesSet out;
    out.agg = aggregate(records, mode);
    std::set<std::string> seen;
    for (const auto& r : records) seen.insert(r.model_id);
    for (const auto& m : bundle.models) {
        if (!seen.count(m.model_id)) continue;
        out.model_order.push_back(m.model_id);
        Labeled entry;
        entry.label = m.display_name;
        for (const auto& q : bundle.questions) {
            const auto it = out.agg.per_model_median.find({m.model_id, q.id});
            if (it != out.agg.per_model_median.end()) entry.forecasts[q.id] = it->second;
        }
        if (entry.forecasts.empty()) {
            out.unscored.push_back(m.model_id);
            continue;
        }
        entry.scores = score_series(entry.label, entry.forecasts, bundle.questions);
        out.models.push_back(std::move(entry));
    }
    out.crowd.label = "Aggregate";
    out.crowd.forecasts = out.agg.per_question_crowd_median;
    out.crowd.scores = score_series(out.crowd.label, out.crowd.forecasts, bundle.questions);
    out.human.label = "Human";
    for (const auto& q : bundle.questions)
        if (const auto hm = latest_human_median(q)) out.human.forecasts[q.id] = *hm;
    out.human.scores = score_series(out.human.label, out.human.forecasts, bundle.questions);
    return out;
}

}  // namespace

CsvTable aggregate_table(const TournamentBundle& bundle,
                         const std::vector<ForecastRecord>& records, AggregationMode mode) {
    const SeriesSet ss = build_series(bundle, records, mode);
    CsvTable t;
    t.header = {"question_id", "crowd_median_pct"};
    for (const auto& mid : ss.model_order) t.header.push_back(mid + "_median_pct");
    for (const auto& q : bundle.questions) {
        std::vector<std::string> row{q.id};
        const auto ci = ss.agg.per_question_crowd_median.find(q.id);
        row.push_back(ci == ss.agg.per_question_crowd_median.end()
                          ? std::string()
                          : format_pct2(ci->second.percent()));
        for (const auto& mid : ss.model_order) {
            const auto mi = ss.agg.per_model_median.find({mid, q.id});
            row.push_back(mi == ss.agg.per_model_median.end()
                              ? std::string()
                              : format_pct2(mi->second.percent()));
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable brier_table(const TournamentBundle& bundle,
                     const std::vector<ForecastRecord>& records, AggregationMode mode) {
    const SeriesSet ss = build_series(bundle, records, mode);
    CsvTable t;
    t.header = {"label", "n", "mean_brier", "sd"};
    std::vector<const ScoreSeries*> by_mean;
    for (const auto& m : ss.models) by_mean.push_back(&m.scores);
    std::sort(by_mean.begin(), by_mean.end(), [](const ScoreSeries* a, const ScoreSeries* b) {
        return std::tie(a->mean, a->label) < std::tie(b->mean, b->label);
    });
    by_mean.push_back(&ss.human.scores);
    by_mean.push_back(&ss.crowd.scores);
    for (const ScoreSeries* s : by_mean)
        t.rows.push_back({s->label, format_long(static_cast<long>(s->scores.size())),
                          format_double(s->mean), format_double(s->sd)});
    return t;
}

// ---------------------------------------------------------------------------
// Study 1
// ---------------------------------------------------------------------------

std::vector<std::string> run_study1(const RunConfig& config) {
    LoadedRun run = load_run(config);
    const std::vector<Question>& questions = run.bundle.questions;

    std::vector<ForecastRecord> s1;
    std::copy_if(run.records.begin(), run.records.end(), std::back_inserter(s1),
                 [](const ForecastRecord& r) { return r.phase == Phase::s1; });
    if (s1.empty()) throw NoForecasts("transcript holds no ensemble-phase records");

    fs::create_directories(config.output_dir);
    std::vector<std::string> written;
    auto path_of = [&](const std::string& name) {
        return (fs::path(config.output_dir) / name).string();
    };
    auto emit = [&](const std::string& name, const CsvTable& table) {
        write_csv(path_of(name), table);
        written.push_back(name);
    };

    export_forecast_table(s1, path_of("forecasts.csv"));
    written.push_back("forecasts.csv");

    const SeriesSet ss = build_series(run.bundle, s1, config.aggregation);

    emit("aggregate.csv", aggregate_table(run.bundle, s1, config.aggregation));

    CsvTable cov;
    cov.header = {"question_id", "model_id", "ok_repetitions"};
    for (const auto& q : questions)
        for (const auto& mid : ss.model_order) {
            const auto it = ss.agg.coverage.find({mid, q.id});
            cov.rows.push_back(
                {q.id, mid, format_long(it == ss.agg.coverage.end() ? 0 : it->second)});
        }
    emit("coverage.csv", cov);

    CsvTable sbq;
    sbq.header = {"label", "question_id", "brier"};
    auto push_scores = [&](const ScoreSeries& s) {
        for (const auto& [qid, score] : s.scores)
            sbq.rows.push_back({s.label, qid, format_double(score)});
    };
    for (const auto& m : ss.models) push_scores(m.scores);
    push_scores(ss.human.scores);
    push_scores(ss.crowd.scores);
    emit("scores_by_question.csv", sbq);

    emit("brier_scores.csv", brier_table(run.bundle, s1, config.aggregation));

    // Calibration is over forecast probabilities, so the human rows stay out:
    // the index table mirrors the per-model layout with the aggregate last.
    struct Calibrated {
        const Labeled* series;
        std::vector<double> f;
        std::vector<int> o;
        CalibrationBins bins;
        MurphyDecomposition murphy;
    };
    std::vector<Calibrated> calibrated;
    auto calibrate = [&](const Labeled& entry) {
        Calibrated c;
        c.series = &entry;
        for (const auto& [qid, p] : entry.forecasts) {
            c.f.push_back(p.value());
            c.o.push_back(outcome_value(*run.question_by_id.at(qid)));
        }
        c.bins = calibration_bins(c.f, c.o, config.bins);
        c.murphy = murphy(c.f, c.o, config.bins);
        calibrated.push_back(std::move(c));
    };
    for (const auto& m : ss.models) calibrate(m);
    calibrate(ss.crowd);

    CsvTable curves;
    curves.header = {"label", "bin_lo", "bin_hi", "n", "mean_forecast", "observed_freq"};
    for (const auto& c : calibrated)
        for (const auto& b : c.bins.bins)
            curves.rows.push_back({c.series->label, format_double(b.lo), format_double(b.hi),
                                   format_long(b.n),
                                   b.n ? format_double(b.mean_forecast) : std::string(),
                                   b.n ? format_double(b.observed_freq) : std::string()});
    emit("calibration_curves.csv", curves);

    CsvTable ci_csv;
    ci_csv.header = {"label",       "n",          "calibration_index", "brier",
                     "uncertainty", "resolution", "residual"};
    std::vector<const Calibrated*> by_ci;
    for (const auto& c : calibrated)
        if (c.series != &ss.crowd) by_ci.push_back(&c);
    std::sort(by_ci.begin(), by_ci.end(), [](const Calibrated* a, const Calibrated* b) {
        return std::tie(a->murphy.reliability, a->series->label) <
               std::tie(b->murphy.reliability, b->series->label);
    });
    by_ci.push_back(&calibrated.back());
    for (const Calibrated* c : by_ci)
        ci_csv.rows.push_back({c->series->label, format_long(c->bins.total),
                               format_double(c->murphy.reliability),
                               format_double(c->murphy.brier),
                               format_double(c->murphy.uncertainty),
                               format_double(c->murphy.resolution),
                               format_double(c->murphy.residual)});
    emit("calibration_index.csv", ci_csv);

    std::map<std::pair<std::string, std::string>, std::vector<const ForecastRecord*>> cell;
    for (const auto& r : s1)
        if (r.status == Status::ok && r.probability)
            cell[{r.question_id, r.model_id}].push_back(&r);

    CsvTable scatter;
    scatter.header = {"question_index", "model_id", "probability_pct"};
    std::vector<double> acq;  // every Ok point forecast, percent scale
    for (const auto& q : questions)
        for (const auto& mid : ss.model_order) {
            const auto it = cell.find({q.id, mid});
            if (it == cell.end()) continue;
            for (const ForecastRecord* r : it->second) {
                scatter.rows.push_back(
                    {format_long(static_cast<long>(run.question_index.at(q.id))), mid,
                     format_pct2(r->probability->percent())});
                acq.push_back(r->probability->percent());
            }
        }
    emit("scatter.csv", scatter);

    std::vector<double> llm_vals, human_vals;
    for (const auto& q : questions) {
        const auto it = ss.agg.per_question_crowd_median.find(q.id);
        if (it != ss.agg.per_question_crowd_median.end())
            llm_vals.push_back(it->second.value());
        if (const auto hm = latest_human_median(q)) human_vals.push_back(hm->value());
    }
    const KdeCurve llm_kde = kde_curve(llm_vals, kKdeGrid, config.kde_bandwidth);
    const KdeCurve human_kde = kde_curve(human_vals, kKdeGrid, config.kde_bandwidth);
    CsvTable kde;
    kde.header = {"x", "llm_density", "human_density"};
    for (int j = 0; j < kKdeGrid; ++j)
        kde.rows.push_back({format_double(llm_kde.x[j]), format_double(llm_kde.density[j]),
                            format_double(human_kde.density[j])});
    emit("kde.csv", kde);

    std::vector<StatRow> rows;
    const auto h1 = guard_stat(rows, "h1 aggregate brier vs 0.25", [&] {
        return t_one_sample(ss.crowd.scores.values(), 0.25, Tail::two_sided);
    });
    const auto h2 = guard_stat(rows, "h2 aggregate vs human", [&] {
        return config.welch
                   ? t_two_sample_welch(ss.crowd.scores.values(), ss.human.scores.values(),
                                        Tail::two_sided)
                   : t_two_sample_pooled(ss.crowd.scores.values(), ss.human.scores.values(),
                                         Tail::two_sided);
    });
    std::vector<std::vector<double>> groups;
    std::vector<std::string> group_labels;
    for (const auto& m : ss.models) {
        groups.push_back(m.scores.values());
        group_labels.push_back(m.label);
    }
    if (!ss.human.scores.scores.empty()) {
        groups.push_back(ss.human.scores.values());
        group_labels.push_back(ss.human.label);
    }
    const auto h3 =
        guard_stat(rows, "h3 series anova", [&] { return anova_oneway(groups); });
    apply_bh(rows, {0, 1, 2});

    std::optional<EquivalenceResult> tost;
    std::string tost_what;
    try {
        tost = tost_equivalence(ss.crowd.scores.values(), ss.human.scores.values(),
                                kEquivalenceD, config.alpha);
    } catch (const DegenerateSample& e) {
        tost_what = e.what();
    } catch (const EmptyInput& e) {
        tost_what = e.what();
    }
    if (tost) {
        StatRow bound;
        bound.label = "h2 equivalence bound";
        bound.method = "tost";
        bound.statistic = tost->raw_bound;
        bound.effect = tost->d_bound;
        bound.note = std::string(tost->equivalent ? "equivalent" : "not equivalent") +
                     " at alpha " + format_double(config.alpha);
        rows.push_back(bound);
        StatRow lower;
        lower.label = "h2 equivalence lower";
        lower.method = "tost";
        lower.statistic = tost->t_lower;
        lower.df1 = tost->df;
        lower.p_raw = tost->p_lower;
        lower.note = "upper tail against -bound";
        rows.push_back(lower);
        StatRow upper;
        upper.label = "h2 equivalence upper";
        upper.method = "tost";
        upper.statistic = tost->t_upper;
        upper.df1 = tost->df;
        upper.p_raw = tost->p_upper;
        upper.note = "lower tail against +bound";
        rows.push_back(upper);
    } else {
        StatRow bound;
        bound.label = "h2 equivalence bound";
        bound.method = "tost";
        bound.note = "degenerate: " + tost_what;
        rows.push_back(bound);
    }

    guard_stat(rows, "acquiescence vs 0",
               [&] { return t_one_sample(acq, 0.0, Tail::two_sided); });
    append_note(rows, "percent scale; t grows with any positive mean, not with a lean above 50");
    guard_stat(rows, "acquiescence vs 50",
               [&] { return t_one_sample(acq, 50.0, Tail::two_sided); });
    append_note(rows, "percent scale; positive t is a lean above the 50 midpoint");
    emit("stats_study1.csv", stat_csv(rows));

    CsvTable tukey;
    tukey.header = {"group_a", "group_b", "mean_diff", "q", "p_value", "significant"};
    std::string tukey_what;
    try {
        for (const auto& p : tukey_hsd(groups, config.alpha))
            tukey.rows.push_back({group_labels[p.group_a], group_labels[p.group_b],
                                  format_double(p.mean_diff), format_double(p.q),
                                  format_double(p.p_value), p.significant ? "1" : "0"});
    } catch (const DegenerateInput& e) {
        tukey_what = e.what();
    } catch (const DegenerateSample& e) {
        tukey_what = e.what();
    }
    emit("tukey_pairs.csv", tukey);

    write_file(path_of("manifest.txt"), manifest_text(config));
    written.push_back("manifest.txt");

    const ValidationReport audit =
        validate_dataset(s1, questions, present_models(run), config.policy.repetitions);
    std::string text;
    text += "ensemble study report\n\n";
    text += "inputs\n";
    text += "  bundle:     " + config.bundle_path + " (" +
            format_long(static_cast<long>(questions.size())) + " questions, " +
            format_long(static_cast<long>(run.bundle.models.size())) + " models)\n";
    text += "  transcript: " + config.transcript_log + " (" +
            format_long(static_cast<long>(run.entries.size())) + " entries)\n";
    text += "  config:     " + config_line(config) + "\n\n";
    text += "dataset\n" + audit_lines(audit);
    if (!ss.unscored.empty()) {
        text += "  models without any scored forecast:";
        for (const auto& mid : ss.unscored) text += " " + mid;
        text += "\n";
    }
    text += "\nresults\n";
    text += "  aggregate brier: " + fixed_text(ss.crowd.scores.mean, 3) + " (sd " +
            fixed_text(ss.crowd.scores.sd, 3) + ", n " +
            format_long(static_cast<long>(ss.crowd.scores.scores.size())) + ")\n";
    text += "  human brier:     " + fixed_text(ss.human.scores.mean, 3) + " (sd " +
            fixed_text(ss.human.scores.sd, 3) + ", n " +
            format_long(static_cast<long>(ss.human.scores.scores.size())) + ")\n";
    const std::string mode_note = " adjusted, " + bh_mode_token(config.bh_mode) + ")";
    if (h1)
        text += "  h1 vs 0.25: " + t_line(*h1) + " (" +
                pretty_p(chosen_bh(rows[0], config.bh_mode)) + mode_note + "\n";
    else
        text += "  h1 vs 0.25: " + rows[0].note + "\n";
    if (h2)
        text += "  h2 vs human: " + t_line(*h2) + " (" +
                pretty_p(chosen_bh(rows[1], config.bh_mode)) + mode_note + "\n";
    else
        text += "  h2 vs human: " + rows[1].note + "\n";
    if (h3)
        text += "  h3 anova: F(" + format_double(h3->df1) + ", " + format_double(*h3->df2) +
                ") = " + fixed_text(h3->statistic, 2) + ", p = " + pretty_p(h3->p_value) +
                " (" + pretty_p(chosen_bh(rows[2], config.bh_mode)) + mode_note + "\n";
    else
        text += "  h3 anova: " + rows[2].note + "\n";
    if (tost)
        text += "  equivalence: bound " + fixed_text(tost->raw_bound, 3) + ", p_lower " +
                pretty_p(tost->p_lower) + ", p_upper " + pretty_p(tost->p_upper) + " -> " +
                (tost->equivalent ? "equivalent" : "not equivalent") + "\n";
    else
        text += "  equivalence: degenerate (" + tost_what + ")\n";
    if (tukey_what.empty()) {
        long sig = 0;
        for (const auto& r : tukey.rows)
            if (r.back() == "1") ++sig;
        text += "  tukey: " + format_long(sig) + " of " +
                format_long(static_cast<long>(tukey.rows.size())) +
                " pairs significant at alpha " + format_double(config.alpha) + "\n";
    } else {
        text += "  tukey: degenerate (" + tukey_what + ")\n";
    }
    if (!acq.empty()) {
        const long above = static_cast<long>(
            std::count_if(acq.begin(), acq.end(), [](double v) { return v > 50.0; }));
        text += "  acquiescence: mean " + fixed_text(mean_of(acq), 2) + ", median " +
                fixed_text(median(acq), 2) + ", " + format_long(above) + " of " +
                format_long(static_cast<long>(acq.size())) + " above 50 (reference mu0 = " +
                format_double(config.mu0) + ")\n";
        const StatRow& a0 = rows[rows.size() - 2];
        const StatRow& a50 = rows.back();
        text += "    t vs 0: " +
                (a0.statistic ? fixed_text(*a0.statistic, 2) : std::string("degenerate")) +
                " (tracks distance from zero); t vs 50: " +
                (a50.statistic ? fixed_text(*a50.statistic, 2) : std::string("degenerate")) +
                " (tracks the lean above 50)\n";
    }
    long beating = 0;
    for (const auto& m : ss.models)
        if (m.scores.mean < ss.crowd.scores.mean) ++beating;
    text += "  model medians beating the aggregate: " + format_long(beating) + " of " +
            format_long(static_cast<long>(ss.models.size())) + "\n";
    text += "  kde bandwidth: llm " + format_double(llm_kde.bandwidth) + ", human " +
            format_double(human_kde.bandwidth) + "\n";
    text += "\nfiles\n";
    written.push_back("summary.txt");
    for (const auto& name : written) text += "  " + name + "\n";
    write_file(path_of("summary.txt"), text);
    return written;
}

// ---------------------------------------------------------------------------
// Study 2
// ---------------------------------------------------------------------------

std::vector<std::string> run_study2(const RunConfig& config) {
    LoadedRun run = load_run(config);
    const std::vector<Question>& questions = run.bundle.questions;

    std::vector<ForecastRecord> s2;
    std::copy_if(run.records.begin(), run.records.end(), std::back_inserter(s2),
                 [](const ForecastRecord& r) { return r.phase != Phase::s1; });
    if (s2.empty()) throw NoForecasts("transcript holds no updating-phase records");

    fs::create_directories(config.output_dir);
    std::vector<std::string> written;
    auto path_of = [&](const std::string& name) {
        return (fs::path(config.output_dir) / name).string();
    };
    auto emit = [&](const std::string& name, const CsvTable& table) {
        write_csv(path_of(name), table);
        written.push_back(name);
    };

    export_forecast_table(s2, path_of("forecasts.csv"));
    written.push_back("forecasts.csv");

    const PairSet pair_set = build_pairs(s2, questions);

    struct ModelBlock {
        std::string model_id;
        std::vector<UpdatePair> pairs;
        std::optional<AccuracyShift> acc;
        std::string acc_what;
        std::optional<IntervalShift> width;
        std::string width_what;
        std::optional<StatResult> corr;
        std::string corr_what;
        std::optional<AverageBenchmark> bench;
        std::string bench_what;
    };
    std::vector<ModelBlock> blocks;
    for (const auto& mid : run.model_order) {
        ModelBlock blk;
        blk.model_id = mid;
        blk.pairs = pairs_for_model(pair_set.pairs, mid);
        if (blk.pairs.empty()) {
            blk.acc_what = blk.width_what = blk.corr_what = blk.bench_what = "no pairs";
            blocks.push_back(std::move(blk));
            continue;
        }
        auto attempt = [](auto& slot, std::string& what, auto&& fn) {
            try {
                slot = fn();
            } catch (const DegenerateSample& e) {
                what = e.what();
            } catch (const DegenerateInput& e) {
                what = e.what();
            } catch (const EmptyInput& e) {
                what = e.what();
            }
        };
        attempt(blk.acc, blk.acc_what, [&] { return accuracy_shift(blk.pairs); });
        attempt(blk.width, blk.width_what, [&] { return interval_shift(blk.pairs); });
        attempt(blk.corr, blk.corr_what,
                [&] { return deviation_adjustment(blk.pairs, config.deviation); });
        attempt(blk.bench, blk.bench_what, [&] { return average_benchmark(blk.pairs); });
        blocks.push_back(std::move(blk));
    }

    CsvTable prepost;
    prepost.header = {"label", "n", "mean_brier", "sd"};
    for (const auto& blk : blocks) {
        if (!blk.acc) continue;
        for (const ScoreSeries* s : {&blk.acc->pre, &blk.acc->post})
            prepost.rows.push_back({s->label, format_long(static_cast<long>(s->scores.size())),
                                    format_double(s->mean), format_double(s->sd)});
    }
    emit("pre_post_brier.csv", prepost);

    CsvTable widths;
    widths.header = {"model_id", "phase", "n", "mean_width_pct", "sd"};
    for (const auto& blk : blocks) {
        if (!blk.width) continue;
        const std::string n = format_long(static_cast<long>(blk.pairs.size()));
        widths.rows.push_back({blk.model_id, "initial", n,
                               format_double(blk.width->mean_width_pre),
                               format_double(blk.width->sd_width_pre)});
        widths.rows.push_back({blk.model_id, "updated", n,
                               format_double(blk.width->mean_width_post),
                               format_double(blk.width->sd_width_post)});
    }
    emit("interval_widths.csv", widths);

    CsvTable dev;
    dev.header = {"model_id", "mode", "n", "r", "df", "p_value", "note"};
    for (const auto& blk : blocks) {
        if (blk.corr)
            dev.rows.push_back({blk.model_id, deviation_token(config.deviation),
                                format_long(static_cast<long>(blk.pairs.size())),
                                format_double(blk.corr->statistic),
                                format_double(blk.corr->df1),
                                format_double(blk.corr->p_value), ""});
        else
            dev.rows.push_back({blk.model_id, deviation_token(config.deviation),
                                format_long(static_cast<long>(blk.pairs.size())), "", "", "",
                                "degenerate: " + blk.corr_what});
    }
    emit("deviation_adjustment.csv", dev);

    CsvTable bench;
    bench.header = {"model_id", "n",  "updated_mean_brier", "benchmark_mean_brier",
                    "t",        "df", "p_value",            "note"};
    for (const auto& blk : blocks) {
        std::vector<std::string> row{blk.model_id,
                                     format_long(static_cast<long>(blk.pairs.size()))};
        row.push_back(blk.acc ? format_double(blk.acc->post.mean) : std::string());
        if (blk.bench) {
            row.push_back(format_double(blk.bench->benchmark.mean));
            row.push_back(format_double(blk.bench->test.statistic));
            row.push_back(format_double(blk.bench->test.df1));
            row.push_back(format_double(blk.bench->test.p_value));
            row.push_back("");
        } else {
            row.insert(row.end(), {"", "", "", "", "degenerate: " + blk.bench_what});
        }
        bench.rows.push_back(std::move(row));
    }
    emit("average_benchmark.csv", bench);

    CsvTable updates;
    updates.header = {"model_id",     "question_index", "question_id",  "repetition",
                      "pre_low_pct",  "pre_high_pct",   "pre_mid_pct",  "post_low_pct",
                      "post_high_pct", "post_mid_pct",  "human_median_pct", "outcome",
                      "group"};
    for (const auto& blk : blocks)
        for (const auto& p : blk.pairs)
            updates.rows.push_back(
                {p.model_id, format_long(static_cast<long>(run.question_index.at(p.question_id))),
                 p.question_id, format_long(p.repetition),
                 format_pct2(p.pre.low.percent()), format_pct2(p.pre.high.percent()),
                 format_pct2(p.pre.midpoint().percent()), format_pct2(p.post.low.percent()),
                 format_pct2(p.post.high.percent()), format_pct2(p.post.midpoint().percent()),
                 format_pct2(p.human_median.percent()), format_long(p.outcome),
                 deviation_group(p)});
    emit("updates.csv", updates);

    CsvTable excl;
    excl.header = {"model_id", "question_id", "repetition", "reason"};
    for (const auto& e : pair_set.exclusions)
        excl.rows.push_back({e.model_id, e.question_id, format_long(e.repetition), e.reason});
    emit("exclusions.csv", excl);

    std::vector<StatRow> rows;
    for (const auto& blk : blocks)
        push_result(rows, blk.model_id + " accuracy",
                    blk.acc ? std::optional<StatResult>(blk.acc->test) : std::nullopt,
                    blk.acc ? "" : "degenerate: " + blk.acc_what);
    for (const auto& blk : blocks)
        push_result(rows, blk.model_id + " interval width",
                    blk.width ? std::optional<StatResult>(blk.width->test) : std::nullopt,
                    blk.width ? "lower tail tests narrowing"
                              : "degenerate: " + blk.width_what);
    for (const auto& blk : blocks)
        push_result(rows, blk.model_id + " update correlation", blk.corr,
                    blk.corr ? deviation_token(config.deviation) + " deviations"
                             : "degenerate: " + blk.corr_what);
    std::vector<std::size_t> block_rows(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) block_rows[i] = i;
    apply_bh(rows, block_rows);
    for (const auto& blk : blocks)
        push_result(rows, blk.model_id + " vs average benchmark",
                    blk.bench ? std::optional<StatResult>(blk.bench->test) : std::nullopt,
                    blk.bench ? "outside the adjustment block"
                              : "degenerate: " + blk.bench_what);
    emit("stats_study2.csv", stat_csv(rows));

    write_file(path_of("manifest.txt"), manifest_text(config));
    written.push_back("manifest.txt");

    const ValidationReport audit =
        validate_dataset(s2, questions, present_models(run), config.policy.repetitions);
    long initial_ok = 0, updated_ok = 0;
    for (const auto& r : s2) {
        if (r.status != Status::ok) continue;
        if (r.phase == Phase::s2_initial) ++initial_ok;
        if (r.phase == Phase::s2_updated) ++updated_ok;
    }
    std::string text;
    text += "updating study report\n\n";
    text += "inputs\n";
    text += "  bundle:     " + config.bundle_path + " (" +
            format_long(static_cast<long>(questions.size())) + " questions, " +
            format_long(static_cast<long>(run.bundle.models.size())) + " models)\n";
    text += "  transcript: " + config.transcript_log + " (" +
            format_long(static_cast<long>(run.entries.size())) + " entries)\n";
    text += "  config:     " + config_line(config) + "\n\n";
    text += "dataset\n" + audit_lines(audit);
    text += "  primary forecasts ok: " + format_long(initial_ok) + ", updated forecasts ok: " +
            format_long(updated_ok) + "\n";
    text += "\npairs\n";
    for (const auto& blk : blocks) {
        long excluded = 0;
        for (const auto& e : pair_set.exclusions)
            if (e.model_id == blk.model_id) ++excluded;
        text += "  " + blk.model_id + ": " + format_long(static_cast<long>(blk.pairs.size())) +
                " pairs, " + format_long(excluded) + " excluded\n";
    }
    text += "\nresults\n";
    for (const auto& blk : blocks) {
        text += "  " + blk.model_id + "\n";
        if (blk.acc)
            text += "    brier " + fixed_text(blk.acc->pre.mean, 2) + " (sd " +
                    fixed_text(blk.acc->pre.sd, 2) + ") -> " +
                    fixed_text(blk.acc->post.mean, 2) + " (sd " +
                    fixed_text(blk.acc->post.sd, 2) + "), " + t_line(blk.acc->test) + "\n";
        else
            text += "    brier shift degenerate: " + blk.acc_what + "\n";
        if (blk.width)
            text += "    interval width " + fixed_text(blk.width->mean_width_pre, 2) +
                    " (sd " + fixed_text(blk.width->sd_width_pre, 2) + ") -> " +
                    fixed_text(blk.width->mean_width_post, 2) + " (sd " +
                    fixed_text(blk.width->sd_width_post, 2) + "), " + t_line(blk.width->test) +
                    "\n";
        else
            text += "    interval width degenerate: " + blk.width_what + "\n";
        if (blk.corr)
            text += "    update correlation r = " + fixed_text(blk.corr->statistic, 2) +
                    ", p = " + pretty_p(blk.corr->p_value) + "\n";
        else
            text += "    update correlation degenerate: " + blk.corr_what + "\n";
        if (blk.bench && blk.acc)
            text += "    vs average benchmark " + fixed_text(blk.bench->benchmark.mean, 2) +
                    ": " + t_line(blk.bench->test) +
                    (blk.bench->test.statistic > 0.0 ? " (updated scores worse)"
                                                     : " (updated scores better)") +
                    "\n";
        else if (!blk.bench)
            text += "    vs average benchmark degenerate: " + blk.bench_what + "\n";
    }
    text += "\nadjustment block (" + bh_mode_token(config.bh_mode) + ")\n";
    for (std::size_t i = 0; i < block_rows.size(); ++i) {
        const StatRow& r = rows[i];
        if (!r.p_raw) continue;
        text += "  " + r.label + ": p " + pretty_p(*r.p_raw) + " -> " +
                pretty_p(chosen_bh(r, config.bh_mode)) + "\n";
    }
    text += "\nfiles\n";
    written.push_back("summary.txt");
    for (const auto& name : written) text += "  " + name + "\n";
    write_file(path_of("summary.txt"), text);
    return written;
}

}  // namespace silicrowd
