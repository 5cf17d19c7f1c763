// Acceptance gate: one pass/fail line per criterion, nonzero exit on any
// failure. Every tolerance is pinned here, next to the check that uses it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "silicrowd/aggregate.hpp"
#include "silicrowd/csv.hpp"
#include "silicrowd/fixture.hpp"
#include "silicrowd/parser.hpp"
#include "silicrowd/report.hpp"
#include "silicrowd/scoring.hpp"
#include "silicrowd/stats.hpp"
#include "silicrowd/update.hpp"

using namespace silicrowd;
using silicrowd::test::TestRng;

namespace {

int failures = 0;

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void report(bool ok, const std::string& name, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("[%s] %s (%s)\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
}

std::string fixed(double v, int decimals = 3) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

// --------------------------------------------------------------------------

void bh_three_tests() {
    const auto start = Clock::now();
    const std::vector<double> raw{0.026, 0.850, 0.002};
    const std::vector<double> want{0.039, 0.850, 0.006};
    bool ok = true;
    for (const BhMode mode : {BhMode::paper_literal, BhMode::standard_step_up}) {
        const PValueSet out = bh_adjust(raw, mode);
        for (std::size_t i = 0; i < want.size(); ++i)
            ok = ok && std::fabs(out.adjusted_p[i] - want[i]) < 5e-4;
    }
    const double ms = ms_since(start);
    ok = ok && ms < 1.0;
    report(ok, "bh adjustment, three tests",
           "0.026/0.850/0.002 -> 0.039/0.850/0.006 in both modes, " + fixed(ms) + " ms");
}

void bh_six_tests() {
    const std::vector<double> raw{0.001, 0.001, 0.001, 0.001, 0.001, 0.003};
    const PValueSet lit = bh_adjust(raw, BhMode::paper_literal);
    bool ok = true;
    for (int i = 0; i < 5; ++i) ok = ok && std::fabs(lit.adjusted_p[i] - 0.006) < 1e-12;
    ok = ok && std::fabs(lit.adjusted_p[5] - 0.003) < 1e-12;

    const PValueSet step = bh_adjust(raw, BhMode::standard_step_up);
    for (int i = 0; i < 5; ++i) ok = ok && std::fabs(step.adjusted_p[i] - 0.0012) < 1e-12;
    ok = ok && std::fabs(step.adjusted_p[5] - 0.003) < 1e-12;
    // step-up output never orders against the raw p values
    for (std::size_t i = 0; i < raw.size(); ++i)
        for (std::size_t j = 0; j < raw.size(); ++j)
            if (raw[i] < raw[j]) ok = ok && step.adjusted_p[i] <= step.adjusted_p[j] + 1e-15;

    report(ok, "bh adjustment, six tied tests",
           "literal 0.006 x5 + 0.003, step-up 0.0012 x5 + 0.003 and monotone");
}

void equivalence_bound() {
    const EquivalenceResult r =
        tost_equivalence_summary(0.0, 0.12, 31, 0.0, 0.19, 31, 0.5, 0.05);
    const bool ok = r.raw_bound >= 0.078 && r.raw_bound <= 0.082;
    report(ok, "equivalence bound from pooled sd",
           "sd 0.12/0.19 at n 31 each, d 0.5 -> bound " + fixed(r.raw_bound, 6));
}

void degrees_of_freedom() {
    TestRng rng(0xacce97);
    auto sample = [&](int n) {
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(rng.uniform(0.0, 1.0));
        return v;
    };
    const auto a31 = sample(31);
    const auto b31 = sample(31);
    const auto a93 = sample(93);
    const auto b93 = sample(93);
    bool ok = t_one_sample(a31, 0.25, Tail::two_sided).df1 == 30.0;
    ok = ok && t_two_sample_pooled(a31, b31, Tail::two_sided).df1 == 60.0;
    ok = ok && t_paired(a93, b93, Tail::two_sided).df1 == 92.0;
    std::vector<std::vector<double>> groups;
    for (int g = 0; g < 13; ++g) groups.push_back(sample(g < 10 ? 28 : 29));
    const StatResult f = anova_oneway(groups);
    ok = ok && f.df1 == 12.0 && f.df2 && *f.df2 == 354.0;
    report(ok, "degrees of freedom bookkeeping", "t 30/60/92 and F (12, 354), exact");
}

void distribution_kernel() {
    const auto start = Clock::now();
    const double p_t = p_from_t(-2.35, 30.0, Tail::two_sided);
    bool ok = std::fabs(p_t - 0.026) < 0.001;
    const double p_f = 1.0 - f_cdf(2.64, 12.0, 354.0);
    ok = ok && std::fabs(p_f - 0.002) < 0.0005;

    double worst = 0.0;
    const CsvTable t_oracle = read_csv(test::fixture_dir() + "/t_cdf_oracle.csv");
    for (const auto& row : t_oracle.rows)
        worst = std::max(worst, std::fabs(t_cdf(std::stod(row[0]), std::stod(row[1])) -
                                          std::stod(row[2])));
    const CsvTable f_oracle = read_csv(test::fixture_dir() + "/f_cdf_oracle.csv");
    for (const auto& row : f_oracle.rows)
        worst = std::max(worst, std::fabs(f_cdf(std::stod(row[0]), std::stod(row[1]),
                                                std::stod(row[2])) -
                                          std::stod(row[3])));
    ok = ok && worst <= 1e-9;
    const double ms = ms_since(start);
    ok = ok && ms < 1000.0;
    report(ok, "t and f distribution kernel",
           "p(t=-2.35, df 30) = " + fixed(p_t) + ", p(F=2.64; 12, 354) = " + fixed(p_f) +
               ", oracle gap " + fixed(worst * 1e9, 3) + "e-9, " + fixed(ms) + " ms");
}

void acquiescence_anchor() {
    const StatResult vs0 = t_one_sample_summary(57.35, 20.93, 1007, 0.0, Tail::two_sided);
    const StatResult vs50 = t_one_sample_summary(57.35, 20.93, 1007, 50.0, Tail::two_sided);
    bool ok = std::fabs(vs0.statistic - 86.20) <= 1.5;
    ok = ok && std::fabs(vs50.statistic - 11.14) <= 0.01;
    ok = ok && vs0.df1 == 1006.0;
    report(ok, "acquiescence t statistics",
           "vs 0: t(1006) = " + fixed(vs0.statistic, 2) + ", vs 50: t = " +
               fixed(vs50.statistic, 2));
}

void brier_benchmark() {
    const auto start = Clock::now();
    TestRng rng(0xb71e6);
    bool ok = true;
    for (int i = 0; i < 500 && ok; ++i)
        ok = brier(make_probability(0.5, Unit::fraction), rng.uniform_int(0, 1)) == 0.25;

    double worst_identity = 0.0;
    double worst_residual = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const int n = rng.uniform_int(5, 120);
        std::vector<double> f;
        std::vector<int> o;
        const bool bin_constant = trial % 4 == 0;
        for (int i = 0; i < n; ++i) {
            if (bin_constant) {
                const int bin = rng.uniform_int(0, 9);
                f.push_back((bin + 0.5) / 10.0);
            } else {
                f.push_back(rng.uniform());
            }
            o.push_back(rng.uniform_int(0, 1));
        }
        const MurphyDecomposition m = murphy(f, o, 10);
        const double bs = m.uncertainty + m.reliability - m.resolution + m.residual;
        worst_identity = std::max(worst_identity, std::fabs(m.brier - bs));
        if (bin_constant) worst_residual = std::max(worst_residual, std::fabs(m.residual));
    }
    ok = ok && worst_identity <= 1e-12 && worst_residual <= 1e-12;
    const double ms = ms_since(start);
    ok = ok && ms < 5000.0;
    report(ok, "brier benchmark and murphy identity",
           "flat 0.5 scores exactly 0.25, identity gap " + fixed(worst_identity, 15) +
               ", bin-constant residual " + fixed(worst_residual, 15) + ", " + fixed(ms) +
               " ms");
}

void median_properties() {
    TestRng rng(0x3ed1a2);
    bool ok = true;
    for (int trial = 0; trial < 10000 && ok; ++trial) {
        const int n = rng.uniform_int(1, 40);
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(rng.uniform());
        std::vector<double> sorted = v;
        std::sort(sorted.begin(), sorted.end());
        const double want = n % 2 == 1
                                ? sorted[static_cast<std::size_t>(n) / 2]
                                : (sorted[static_cast<std::size_t>(n) / 2 - 1] +
                                   sorted[static_cast<std::size_t>(n) / 2]) /
                                      2.0;
        const double got = median(v);
        ok = ok && got == want;
        ok = ok && got >= sorted.front() && got <= sorted.back();
        std::vector<double> shuffled = v;
        for (int i = n - 1; i > 0; --i)
            std::swap(shuffled[static_cast<std::size_t>(i)],
                      shuffled[static_cast<std::size_t>(rng.uniform_int(0, i))]);
        ok = ok && median(shuffled) == got;
    }

    // nine honest voices around 60, three wildly high ones
    const std::vector<double> majority{57, 58, 59, 59.5, 60, 60, 60, 61, 62};
    std::vector<ForecastRecord> crowd;
    int rep = 0;
    for (double pct : majority)
        crowd.push_back(test::ok_record("q01", "m" + std::to_string(++rep), 1, Phase::s1, pct));
    for (double pct : {97.0, 98.0, 99.0})
        crowd.push_back(test::ok_record("q01", "m" + std::to_string(++rep), 1, Phase::s1, pct));
    const AggregateTable agg = aggregate(crowd, AggregationMode::pooled);
    const double crowd_median = agg.per_question_crowd_median.at("q01").percent();
    ok = ok && std::fabs(crowd_median - median(majority)) <= 1e-9;
    report(ok, "median properties",
           "10000 lists match the sort oracle, biased-minority crowd median " +
               fixed(crowd_median, 2));
}

void parser_roundtrip() {
    bool ok = true;
    for (int i = 0; i <= 10000 && ok; ++i) {
        const double pct = i / 100.0;
        char text[96];
        std::snprintf(text, sizeof text, "My probability estimate is %.2f%%.", pct);
        const ParseOutcome point = parse_point(text);
        ok = point.kind == ParseKind::point && point.point &&
             std::fabs(point.point->percent() - pct) < 1e-9;
        if (!ok) break;
        const double hi = std::min(pct + 1.0, 100.0);
        std::snprintf(text, sizeof text, "Between %.2f%% and %.2f%%.", pct, hi);
        const ParseOutcome span = parse_interval(text);
        ok = span.kind == ParseKind::interval && span.interval &&
             std::fabs(span.interval->low.percent() - pct) < 1e-9 &&
             std::fabs(span.interval->high.percent() - hi) < 1e-9 && !span.swapped;
    }
    const ParseOutcome yes = parse_point("Yes, on balance.");
    const ParseOutcome no = parse_point("No chance at all.");
    ok = ok && yes.kind == ParseKind::yes_no_coded && yes.point->value() == 0.99;
    ok = ok && no.kind == ParseKind::yes_no_coded && no.point->value() == 0.01;
    const ParseOutcome rev = parse_interval("Between 60% and 40%.");
    ok = ok && rev.swapped && rev.interval->low.percent() == 40.0 &&
         rev.interval->high.percent() == 60.0;
    report(ok, "parser round trip",
           "10001 point and interval percents, yes/no coding, reversed bounds flagged");
}

void e2e_determinism() {
    const auto start = Clock::now();
    const std::string wd = test::work_dir("acceptance_e2e");
    const FixturePaths fx = generate_fixture(wd + "/fx");

    RunConfig cfg;
    cfg.bundle_path = fx.bundle;
    cfg.mode = RunMode::replay;

    bool ok = true;
    std::vector<std::string> names1, names2;
    cfg.study = 1;
    cfg.transcript_log = fx.study1_log;
    cfg.output_dir = wd + "/s1_a";
    names1 = run_study1(cfg);
    cfg.output_dir = wd + "/s1_b";
    run_study1(cfg);
    for (const auto& n : names1)
        ok = ok && read_file(wd + "/s1_a/" + n) == read_file(wd + "/s1_b/" + n);

    cfg.study = 2;
    cfg.transcript_log = fx.study2_log;
    cfg.output_dir = wd + "/s2_a";
    names2 = run_study2(cfg);
    cfg.output_dir = wd + "/s2_b";
    run_study2(cfg);
    for (const auto& n : names2)
        ok = ok && read_file(wd + "/s2_a/" + n) == read_file(wd + "/s2_b/" + n);

    const double ms = ms_since(start);
    ok = ok && ms < 30000.0;
    report(ok, "end to end replay determinism",
           std::to_string(names1.size()) + " + " + std::to_string(names2.size()) +
               " files byte-identical across consecutive runs, " + fixed(ms / 1000.0, 1) +
               " s");
}

void pair_accounting() {
    const std::string wd = test::work_dir("acceptance_pairs");
    const FixturePaths fx = generate_fixture(wd + "/fx");
    const TournamentBundle bundle = load_bundle(fx.bundle);
    const std::vector<ForecastRecord> records =
        classify_batch(read_transcript(fx.study2_log));
    long initial_ok = 0;
    for (const auto& r : records)
        if (r.phase == Phase::s2_initial && r.status == Status::ok) ++initial_ok;
    const PairSet pairs = build_pairs(records, bundle.questions);
    const std::size_t gpt = pairs_for_model(pairs.pairs, "gpt-4").size();
    const std::size_t claude = pairs_for_model(pairs.pairs, "claude-2").size();
    const bool ok = initial_ok == 186 && pairs.pairs.size() == 186 && gpt == 93 &&
                    claude == 93 && pairs.exclusions.empty();
    report(ok, "updating pair accounting",
           std::to_string(initial_ok) + " primary forecasts, " +
               std::to_string(gpt) + " + " + std::to_string(claude) + " pairs");
}

void tukey_kernel() {
    const double crit = studentized_range_critical(0.05, 3, 10.0);
    bool ok = std::fabs(crit - 3.88) <= 0.01;

    TestRng rng(0x70c3);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
        const int n = rng.uniform_int(5, 20);
        std::vector<double> a, b;
        for (int i = 0; i < n; ++i) a.push_back(rng.uniform(0.0, 1.0));
        for (int i = 0; i < n; ++i) b.push_back(rng.uniform(0.2, 1.2));
        const std::vector<TukeyPair> pairs = tukey_hsd({a, b}, 0.05);
        const StatResult t = t_two_sample_pooled(a, b, Tail::two_sided);
        worst = std::max(worst,
                         std::fabs(pairs[0].q - std::fabs(t.statistic) * std::sqrt(2.0)));
    }
    ok = ok && worst <= 1e-8;
    report(ok, "studentized range kernel",
           "q(0.05; 3, 10) = " + fixed(crit, 3) + ", two-group q vs t.sqrt2 gap " +
               fixed(worst * 1e9, 3) + "e-9");
}

}  // namespace

int main() {
    bh_three_tests();
    bh_six_tests();
    equivalence_bound();
    degrees_of_freedom();
    distribution_kernel();
    acquiescence_anchor();
    brier_benchmark();
    median_properties();
    parser_roundtrip();
    e2e_determinism();
    pair_accounting();
    tukey_kernel();
    if (failures) std::printf("%d criteria failed\n", failures);
    return failures ? 1 : 0;
}
