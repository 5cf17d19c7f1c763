#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "silicrowd/csv.hpp"
#include "silicrowd/fixture.hpp"
#include "silicrowd/parser.hpp"
#include "silicrowd/report.hpp"
#include "silicrowd/store.hpp"

using namespace silicrowd;

namespace {

struct RunArgs {
    RunConfig cfg;
    std::string mode = "replay";
    std::string bh = "paper";
    std::string agg = "pooled";
    std::string deviation = "signed";
    double kde_bw = 0.0;
    CLI::Option* kde_opt = nullptr;
};

void add_run_flags(CLI::App* cmd, RunArgs& a, bool with_study) {
    if (with_study)
        cmd->add_option("--study", a.cfg.study, "1 for the ensemble study, 2 for updating")
            ->required()
            ->check(CLI::IsMember({1, 2}));
    cmd->add_option("--bundle", a.cfg.bundle_path, "tournament bundle json")->required();
    cmd->add_option("--log", a.cfg.transcript_log, "transcript jsonl")->required();
    cmd->add_option("--mode", a.mode, "record or replay")
        ->check(CLI::IsMember({"record", "replay"}));
    cmd->add_option("--backend", a.cfg.backends,
                    "backend name (repeatable; replay default: every model in the log)");
    cmd->add_option("--reps", a.cfg.policy.repetitions, "repetitions per question")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--bins", a.cfg.bins, "calibration bins")->check(CLI::PositiveNumber);
    cmd->add_option("--bh-mode", a.bh, "paper or standard")
        ->check(CLI::IsMember({"paper", "standard", "paper_literal", "standard_step_up"}));
    cmd->add_option("--alpha", a.cfg.alpha, "significance level");
    cmd->add_option("--agg", a.agg, "pooled or mom")
        ->check(CLI::IsMember({"pooled", "mom", "median_of_medians"}));
    cmd->add_option("--out", a.cfg.output_dir, "output directory")->required();
    cmd->add_option("--mu0", a.cfg.mu0, "acquiescence reference, 0 or 50");
    a.kde_opt = cmd->add_option("--kde-bw", a.kde_bw, "kde bandwidth override")
                    ->check(CLI::PositiveNumber);
    cmd->add_flag("--welch", a.cfg.welch, "welch instead of the pooled two-sample test");
    cmd->add_option("--deviation", a.deviation, "signed or absolute")
        ->check(CLI::IsMember({"signed", "absolute"}));
}

RunConfig finalize_run(RunArgs& a) {
    a.cfg.mode = parse_run_mode(a.mode);
    a.cfg.bh_mode = (a.bh == "standard" || a.bh == "standard_step_up")
                        ? BhMode::standard_step_up
                        : BhMode::paper_literal;
    a.cfg.aggregation = a.agg == "pooled" ? AggregationMode::pooled
                                          : AggregationMode::median_of_medians;
    a.cfg.deviation =
        a.deviation == "absolute" ? DeviationMode::absolute_dev : DeviationMode::signed_dev;
    if (a.kde_opt->count()) a.cfg.kde_bandwidth = a.kde_bw;
    if (a.cfg.mu0 != 0.0 && a.cfg.mu0 != 50.0) throw DomainError("--mu0 must be 0 or 50");
    if (!(a.cfg.alpha > 0.0 && a.cfg.alpha < 1.0))
        throw DomainError("--alpha must be inside (0,1)");
    return a.cfg;
}

void run_study(const RunConfig& cfg) {
    const auto files = cfg.study == 2 ? run_study2(cfg) : run_study1(cfg);
    for (const auto& f : files)
        std::printf("%s\n", (std::filesystem::path(cfg.output_dir) / f).string().c_str());
}

std::vector<ForecastRecord> phase_filter(std::vector<ForecastRecord> records,
                                         const std::string& phase) {
    if (phase == "all") return records;
    const Phase want = parse_phase(phase);
    std::erase_if(records, [&](const ForecastRecord& r) { return r.phase != want; });
    return records;
}

Tail parse_tail(const std::string& token) {
    if (token == "two") return Tail::two_sided;
    if (token == "lower") return Tail::lower;
    if (token == "upper") return Tail::upper;
    throw FormatError("unknown tail: " + token);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forecasting tournament harness"};
    app.require_subcommand(1);

    auto* fix = app.add_subcommand("fixture-gen", "write the synthetic tournament fixture");
    auto fix_out = std::make_shared<std::string>();
    fix->add_option("--out", *fix_out, "output directory")->required();
    fix->callback([fix_out] {
        const FixturePaths p = generate_fixture(*fix_out);
        std::printf("%s\n%s\n%s\n", p.bundle.c_str(), p.study1_log.c_str(),
                    p.study2_log.c_str());
    });

    auto* ing = app.add_subcommand("ingest", "validate a bundle");
    auto ing_bundle = std::make_shared<std::string>();
    auto ing_norm = std::make_shared<std::string>();
    ing->add_option("--bundle", *ing_bundle, "tournament bundle json")->required();
    ing->add_option("--normalize", *ing_norm, "re-render the bundle to this path");
    ing->callback([ing_bundle, ing_norm] {
        const TournamentBundle bundle = load_bundle(*ing_bundle);
        std::printf("bundle ok: %s, %zu questions, %zu models\n", bundle.version.c_str(),
                    bundle.questions.size(), bundle.models.size());
        if (!ing_norm->empty()) save_bundle(*ing_norm, bundle);
    });

    auto* col = app.add_subcommand("collect", "record forecasts from http backends");
    auto col_bundle = std::make_shared<std::string>();
    auto col_log = std::make_shared<std::string>();
    auto col_backends = std::make_shared<std::vector<std::string>>();
    auto col_study = std::make_shared<int>(1);
    auto col_reps = std::make_shared<int>(3);
    col->add_option("--bundle", *col_bundle, "tournament bundle json")->required();
    col->add_option("--log", *col_log, "transcript jsonl to append to")->required();
    col->add_option("--backend", *col_backends, "backend name (repeatable)")->required();
    col->add_option("--study", *col_study, "1 or 2")->check(CLI::IsMember({1, 2}));
    col->add_option("--reps", *col_reps, "repetitions per question")
        ->check(CLI::PositiveNumber);
    col->callback([col_bundle, col_log, col_backends, col_study, col_reps] {
        const TournamentBundle bundle = load_bundle(*col_bundle);
        BackendPolicy policy;
        policy.repetitions = *col_reps;
        CollectContext ctx = CollectContext::real(*col_log);
        const TemplateId tpl =
            *col_study == 2 ? TemplateId::study2_initial : TemplateId::study1;
        for (const auto& name : *col_backends) {
            HttpBackend backend(name);
            long entries = 0;
            for (const auto& q : bundle.questions)
                entries += static_cast<long>(collect(backend, q, tpl, policy, ctx).size());
            std::printf("%s: %ld entries\n", name.c_str(), entries);
        }
    });

    auto* par = app.add_subcommand("parse", "classify a transcript into a forecast table");
    auto par_log = std::make_shared<std::string>();
    auto par_out = std::make_shared<std::string>();
    par->add_option("--log", *par_log, "transcript jsonl")->required();
    par->add_option("--out", *par_out, "forecast table csv")->required();
    par->callback([par_log, par_out] {
        const auto records = classify_batch(read_transcript(*par_log));
        export_forecast_table(records, *par_out);
        std::printf("%zu records\n", records.size());
    });

    auto* agg = app.add_subcommand("aggregate", "write per-question median forecasts");
    auto agg_bundle = std::make_shared<std::string>();
    auto agg_log = std::make_shared<std::string>();
    auto agg_out = std::make_shared<std::string>();
    auto agg_mode = std::make_shared<std::string>("pooled");
    auto agg_phase = std::make_shared<std::string>("s1");
    agg->add_option("--bundle", *agg_bundle, "tournament bundle json")->required();
    agg->add_option("--log", *agg_log, "transcript jsonl")->required();
    agg->add_option("--out", *agg_out, "output csv")->required();
    agg->add_option("--agg", *agg_mode, "pooled or mom")
        ->check(CLI::IsMember({"pooled", "mom", "median_of_medians"}));
    agg->add_option("--phase", *agg_phase, "s1, s2_initial, s2_updated or all")
        ->check(CLI::IsMember({"s1", "s2_initial", "s2_updated", "all"}));
    agg->callback([agg_bundle, agg_log, agg_out, agg_mode, agg_phase] {
        const TournamentBundle bundle = load_bundle(*agg_bundle);
        const auto records =
            phase_filter(classify_batch(read_transcript(*agg_log)), *agg_phase);
        const AggregationMode mode = *agg_mode == "pooled"
                                         ? AggregationMode::pooled
                                         : AggregationMode::median_of_medians;
        write_csv(*agg_out, aggregate_table(bundle, records, mode));
    });

    auto* sco = app.add_subcommand("score", "write mean Brier scores per series");
    auto sco_bundle = std::make_shared<std::string>();
    auto sco_log = std::make_shared<std::string>();
    auto sco_out = std::make_shared<std::string>();
    auto sco_mode = std::make_shared<std::string>("pooled");
    auto sco_phase = std::make_shared<std::string>("s1");
    sco->add_option("--bundle", *sco_bundle, "tournament bundle json")->required();
    sco->add_option("--log", *sco_log, "transcript jsonl")->required();
    sco->add_option("--out", *sco_out, "output csv")->required();
    sco->add_option("--agg", *sco_mode, "pooled or mom")
        ->check(CLI::IsMember({"pooled", "mom", "median_of_medians"}));
    sco->add_option("--phase", *sco_phase, "s1, s2_initial, s2_updated or all")
        ->check(CLI::IsMember({"s1", "s2_initial", "s2_updated", "all"}));
    sco->callback([sco_bundle, sco_log, sco_out, sco_mode, sco_phase] {
        const TournamentBundle bundle = load_bundle(*sco_bundle);
        const auto records =
            phase_filter(classify_batch(read_transcript(*sco_log)), *sco_phase);
        const AggregationMode mode = *sco_mode == "pooled"
                                         ? AggregationMode::pooled
                                         : AggregationMode::median_of_medians;
        write_csv(*sco_out, brier_table(bundle, records, mode));
    });

    auto* sta = app.add_subcommand("stats", "p-value adjustment and t-test helpers");
    auto sta_p = std::make_shared<std::vector<double>>();
    auto sta_labels = std::make_shared<std::vector<std::string>>();
    auto sta_out = std::make_shared<std::string>();
    auto sta_mean = std::make_shared<double>(0.0);
    auto sta_sd = std::make_shared<double>(0.0);
    auto sta_n = std::make_shared<long>(0);
    auto sta_mu0 = std::make_shared<double>(0.0);
    auto sta_tail = std::make_shared<std::string>("two");
    sta->add_option("--p", *sta_p, "raw p-value (repeatable)");
    sta->add_option("--label", *sta_labels, "label per p-value (repeatable)");
    sta->add_option("--out", *sta_out, "write the adjustment table here instead of stdout");
    auto* mean_opt = sta->add_option("--t-mean", *sta_mean, "one-sample t: sample mean");
    sta->add_option("--t-sd", *sta_sd, "one-sample t: sample sd");
    sta->add_option("--t-n", *sta_n, "one-sample t: sample size");
    sta->add_option("--mu0", *sta_mu0, "one-sample t: null mean");
    sta->add_option("--tail", *sta_tail, "two, lower or upper")
        ->check(CLI::IsMember({"two", "lower", "upper"}));
    sta->callback([sta_p, sta_labels, sta_out, sta_mean, sta_sd, sta_n, sta_mu0, sta_tail,
                   mean_opt] {
        bool did = false;
        if (!sta_p->empty()) {
            std::vector<std::string> labels = *sta_labels;
            if (labels.empty())
                for (std::size_t i = 0; i < sta_p->size(); ++i)
                    labels.push_back("p" + format_long(static_cast<long>(i + 1)));
            const PValueSet lit = bh_adjust(*sta_p, BhMode::paper_literal, labels);
            const PValueSet step = bh_adjust(*sta_p, BhMode::standard_step_up, labels);
            CsvTable t;
            t.header = {"label", "p_raw", "p_bh_paper", "p_bh_stepup"};
            for (std::size_t i = 0; i < sta_p->size(); ++i)
                t.rows.push_back({labels[i], format_double((*sta_p)[i]),
                                  format_double(lit.adjusted_p[i]),
                                  format_double(step.adjusted_p[i])});
            if (sta_out->empty())
                std::printf("%s", render_csv(t).c_str());
            else
                write_csv(*sta_out, t);
            did = true;
        }
        if (mean_opt->count()) {
            const StatResult r =
                t_one_sample_summary(*sta_mean, *sta_sd, *sta_n, *sta_mu0,
                                     parse_tail(*sta_tail));
            std::printf("t(%s) = %s, p = %s\n", format_double(r.df1).c_str(),
                        format_double(r.statistic).c_str(),
                        format_double(r.p_value).c_str());
            did = true;
        }
        if (!did) throw DomainError("stats needs --p values or --t-mean/--t-sd/--t-n");
    });

    auto* rep = app.add_subcommand("report", "run a full study pipeline");
    auto rep_args = std::make_shared<RunArgs>();
    add_run_flags(rep, *rep_args, true);
    rep->callback([rep_args] { run_study(finalize_run(*rep_args)); });

    auto* st1 = app.add_subcommand("study1", "run the ensemble study pipeline");
    auto st1_args = std::make_shared<RunArgs>();
    st1_args->cfg.study = 1;
    add_run_flags(st1, *st1_args, false);
    st1->callback([st1_args] { run_study(finalize_run(*st1_args)); });

    auto* st2 = app.add_subcommand("study2", "run the updating study pipeline");
    auto st2_args = std::make_shared<RunArgs>();
    st2_args->cfg.study = 2;
    add_run_flags(st2, *st2_args, false);
    st2->callback([st2_args] { run_study(finalize_run(*st2_args)); });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
