#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <string>
#include <vector>

#include <json.hpp>

#include "helpers.hpp"
#include "silicrowd/csv.hpp"
#include "silicrowd/stats.hpp"

using namespace silicrowd;
using namespace silicrowd::test;

namespace {

std::vector<double> rng_vector(TestRng& rng, int n, double lo, double hi) {
    std::vector<double> v;
    v.reserve(n);
    for (int i = 0; i < n; ++i) v.push_back(rng.uniform(lo, hi));
    return v;
}

}  // namespace

TEST_SUITE("stats") {

TEST_CASE("moments") {
    const std::vector<double> v = {1.0, 2.0, 3.0, 4.0, 5.0};
    CHECK(mean_of(v) == doctest::Approx(3.0));
    CHECK(sample_sd(v) == doctest::Approx(std::sqrt(2.5)));
    CHECK_THROWS_AS(sample_sd({7.0}), DegenerateSample);
    CHECK_THROWS_AS(mean_of({}), EmptyInput);
}

TEST_CASE("incomplete beta hits closed forms") {
    CHECK(incomplete_beta(1.0, 1.0, 0.37) == doctest::Approx(0.37).epsilon(1e-12));
    // I_x(2,2) = x^2 (3 - 2x)
    CHECK(incomplete_beta(2.0, 2.0, 0.25) ==
          doctest::Approx(0.0625 * 2.5).epsilon(1e-12));
    CHECK(incomplete_beta(5.0, 3.0, 0.0) == 0.0);
    CHECK(incomplete_beta(5.0, 3.0, 1.0) == 1.0);
    CHECK_THROWS_AS(incomplete_beta(5.0, 3.0, 1.5), DomainError);
    CHECK_THROWS_AS(incomplete_beta(-1.0, 3.0, 0.5), DomainError);
}

TEST_CASE("t cdf matches the committed oracle within 1e-9") {
    const auto table = read_csv(fixture_dir() + std::string("/t_cdf_oracle.csv"));
    REQUIRE(table.rows.size() == 100);
    for (const auto& row : table.rows) {
        const double t = std::stod(row[0]);
        const double df = std::stod(row[1]);
        const double expected = std::stod(row[2]);
        CHECK(std::fabs(t_cdf(t, df) - expected) <= 1e-9);
    }
}

TEST_CASE("f cdf matches the committed oracle within 1e-9") {
    const auto table = read_csv(fixture_dir() + std::string("/f_cdf_oracle.csv"));
    REQUIRE(table.rows.size() == 100);
    for (const auto& row : table.rows) {
        const double f = std::stod(row[0]);
        const double df1 = std::stod(row[1]);
        const double df2 = std::stod(row[2]);
        const double expected = std::stod(row[3]);
        CHECK(std::fabs(f_cdf(f, df1, df2) - expected) <= 1e-9);
    }
}

TEST_CASE("t cdf structure") {
    CHECK(t_cdf(0.0, 7.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(t_cdf(1.8, 12.0) + t_cdf(-1.8, 12.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(t_cdf(2.0, 30.0) > t_cdf(1.0, 30.0));
    CHECK_THROWS_AS(t_cdf(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(f_cdf(1.0, 0.0, 5.0), DomainError);
    CHECK(f_cdf(-1.0, 3.0, 5.0) == 0.0);
}

TEST_CASE("tail conversions") {
    const double p2 = p_from_t(-2.35, 30.0, Tail::two_sided);
    CHECK(std::fabs(p2 - 0.025546022569503606) <= 1e-9);
    CHECK(p_from_t(2.35, 30.0, Tail::two_sided) == doctest::Approx(p2).epsilon(1e-12));
    CHECK(p_from_t(-2.35, 30.0, Tail::lower) ==
          doctest::Approx(p2 / 2.0).epsilon(1e-9));
    CHECK(p_from_t(-2.35, 30.0, Tail::upper) ==
          doctest::Approx(1.0 - p2 / 2.0).epsilon(1e-9));
    CHECK(tail_token(Tail::two_sided) == "two_sided");
    CHECK(tail_token(Tail::lower) == "lower");
    CHECK(tail_token(Tail::upper) == "upper");
}

TEST_CASE("one-sample t") {
    std::vector<double> v = {1.0, 2.0, 3.0, 4.0, 5.0};
    const StatResult zero = t_one_sample(v, 3.0, Tail::two_sided);
    CHECK(zero.statistic == doctest::Approx(0.0));
    CHECK(zero.p_value == doctest::Approx(1.0));

    const StatResult r = t_one_sample(v, 2.0, Tail::two_sided);
    CHECK(r.statistic == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.df1 == 4.0);
    CHECK(std::fabs(r.p_value - 0.230199641080499) <= 1e-9);
    CHECK(r.method == "t_one_sample");
    REQUIRE(r.effect_size.has_value());  // Cohen's d against mu0
    CHECK(*r.effect_size == doctest::Approx(1.0 / std::sqrt(2.5)).epsilon(1e-12));

    const StatResult s =
        t_one_sample_summary(mean_of(v), sample_sd(v), 5, 2.0, Tail::two_sided);
    CHECK(s.statistic == doctest::Approx(r.statistic).epsilon(1e-12));
    CHECK(s.p_value == doctest::Approx(r.p_value).epsilon(1e-12));

    TestRng rng(11);
    const StatResult wide = t_one_sample(rng_vector(rng, 31, 0.0, 0.4), 0.25,
                                         Tail::two_sided);
    CHECK(wide.df1 == 30.0);

    CHECK_THROWS_AS(t_one_sample({1.0}, 0.0, Tail::two_sided), DegenerateSample);
    CHECK_THROWS_AS(t_one_sample({2.0, 2.0, 2.0}, 0.0, Tail::two_sided),
                    DegenerateSample);
}

TEST_CASE("acquiescence summary anchors") {
    const StatResult vs0 = t_one_sample_summary(57.35, 20.93, 1007, 0.0, Tail::two_sided);
    CHECK(std::fabs(vs0.statistic - 86.95187054733840) <= 1e-9);
    const StatResult vs50 =
        t_one_sample_summary(57.35, 20.93, 1007, 50.0, Tail::two_sided);
    CHECK(std::fabs(vs50.statistic - 11.14378811722646) <= 1e-9);
    CHECK(vs50.df1 == 1006.0);
}

TEST_CASE("pooled two-sample t matches the committed oracle within 1e-9") {
    const std::string text = read_file(fixture_dir() + std::string("/two_sample_oracle.json"));
    const auto j = nlohmann::json::parse(text);
    REQUIRE(j.at("cases").size() >= 5);
    for (const auto& c : j.at("cases")) {
        const std::vector<double> a = c.at("a").get<std::vector<double>>();
        const std::vector<double> b = c.at("b").get<std::vector<double>>();
        const StatResult r = t_two_sample_pooled(a, b, Tail::two_sided);
        CHECK(std::fabs(r.statistic - std::stod(c.at("t").get<std::string>())) <= 1e-9);
        CHECK(r.df1 == c.at("df").get<double>());
        CHECK(std::fabs(r.p_value - std::stod(c.at("p").get<std::string>())) <= 1e-9);
    }
}

TEST_CASE("two-sample df bookkeeping") {
    TestRng rng(23);
    const auto a = rng_vector(rng, 31, 0.0, 0.5);
    const auto b = rng_vector(rng, 31, 0.1, 0.6);
    const StatResult pooled = t_two_sample_pooled(a, b, Tail::two_sided);
    CHECK(pooled.df1 == 60.0);
    CHECK(pooled.method == "t_two_sample_pooled");

    // equal sizes: Welch's statistic coincides with the pooled one
    const StatResult welch = t_two_sample_welch(a, b, Tail::two_sided);
    CHECK(welch.statistic == doctest::Approx(pooled.statistic).epsilon(1e-12));
    CHECK(welch.df1 <= pooled.df1 + 1e-9);
    CHECK(welch.method == "t_two_sample_welch");

    CHECK_THROWS_AS(t_two_sample_pooled({1.0}, {2.0, 3.0}, Tail::two_sided),
                    DegenerateSample);
}

TEST_CASE("paired t equals one-sample on differences") {
    TestRng rng(31);
    std::vector<double> pre = rng_vector(rng, 93, 0.05, 0.45);
    std::vector<double> post;
    for (double v : pre) post.push_back(v - 0.03 + rng.uniform(-0.05, 0.05));

    const StatResult paired = t_paired(post, pre, Tail::two_sided);
    CHECK(paired.df1 == 92.0);
    std::vector<double> diff;
    for (std::size_t i = 0; i < pre.size(); ++i) diff.push_back(post[i] - pre[i]);
    const StatResult direct = t_one_sample(diff, 0.0, Tail::two_sided);
    CHECK(paired.statistic == doctest::Approx(direct.statistic).epsilon(1e-12));
    CHECK(paired.p_value == doctest::Approx(direct.p_value).epsilon(1e-12));
    CHECK_THROWS_AS(t_paired({1.0, 2.0}, {1.0}, Tail::two_sided), LengthMismatch);
}

TEST_CASE("equivalence bound and verdicts") {
    CHECK(std::fabs(pooled_sd(0.12, 31, 0.19, 31) - 0.15890248582070703) <= 1e-12);

    const EquivalenceResult close =
        tost_equivalence_summary(0.20, 0.12, 31, 0.19, 0.19, 31, 0.5, 0.05);
    CHECK(close.d_bound == 0.5);
    CHECK(std::fabs(close.raw_bound - 0.07945124291035352) <= 1e-12);
    CHECK(close.raw_bound > 0.078);
    CHECK(close.raw_bound < 0.082);
    CHECK(close.df == 60.0);
    CHECK(std::fabs(close.t_lower - 2.216264230790536) <= 1e-9);
    CHECK(std::fabs(close.t_upper - (-1.720739706215369)) <= 1e-9);
    CHECK(close.p_lower < 0.05);
    CHECK(close.p_upper < 0.05);
    CHECK(close.equivalent);

    const EquivalenceResult far =
        tost_equivalence_summary(0.40, 0.12, 31, 0.19, 0.19, 31, 0.5, 0.05);
    CHECK_FALSE(far.equivalent);

    // vector form agrees with the summary form
    TestRng rng(47);
    const auto a = rng_vector(rng, 31, 0.1, 0.4);
    const auto b = rng_vector(rng, 31, 0.1, 0.4);
    const EquivalenceResult v = tost_equivalence(a, b, 0.5, 0.05);
    const EquivalenceResult s = tost_equivalence_summary(
        mean_of(a), sample_sd(a), 31, mean_of(b), sample_sd(b), 31, 0.5, 0.05);
    CHECK(v.raw_bound == doctest::Approx(s.raw_bound).epsilon(1e-12));
    CHECK(v.t_lower == doctest::Approx(s.t_lower).epsilon(1e-12));
    CHECK(v.p_upper == doctest::Approx(s.p_upper).epsilon(1e-12));
}

TEST_CASE("anova on a hand-checked example") {
    const std::vector<std::vector<double>> groups = {
        {1.0, 2.0, 3.0}, {2.0, 3.0, 4.0}, {4.0, 5.0, 6.0}};
    const StatResult r = anova_oneway(groups);
    CHECK(r.statistic == doctest::Approx(7.0).epsilon(1e-12));
    CHECK(r.df1 == 2.0);
    REQUIRE(r.df2.has_value());
    CHECK(*r.df2 == 6.0);
    CHECK(r.p_value == doctest::Approx(1.0 - f_cdf(7.0, 2.0, 6.0)).epsilon(1e-12));
    CHECK(r.method == "anova_oneway");

    CHECK_THROWS_AS(anova_oneway({{1.0, 1.0}, {1.0, 1.0}}), DegenerateInput);
    CHECK_THROWS_AS(anova_oneway({{1.0, 2.0}}), DegenerateInput);
}

TEST_CASE("anova df matches the thirteen-group layout") {
    TestRng rng(53);
    std::vector<std::vector<double>> groups;
    for (int g = 0; g < 13; ++g) {
        const int n = g < 10 ? 28 : 29;  // 10*28 + 3*29 = 367
        groups.push_back(rng_vector(rng, n, 0.1 + 0.01 * g, 0.4 + 0.01 * g));
    }
    const StatResult r = anova_oneway(groups);
    CHECK(r.df1 == 12.0);
    REQUIRE(r.df2.has_value());
    CHECK(*r.df2 == 354.0);
    const double p_anchor = 1.0 - f_cdf(2.64, 12.0, 354.0);
    CHECK(std::fabs(p_anchor - 0.0021385642337798726) <= 1e-9);
}

TEST_CASE("studentized range cdf and critical value") {
    CHECK(studentized_range_cdf(0.0, 3, 10.0) == 0.0);
    CHECK(studentized_range_cdf(2.0, 3, 10.0) < studentized_range_cdf(4.0, 3, 10.0));
    const double crit = studentized_range_critical(0.05, 3, 10.0);
    CHECK(std::fabs(crit - 3.88) <= 0.01);
    CHECK(studentized_range_cdf(crit, 3, 10.0) == doctest::Approx(0.95).epsilon(1e-4));
    CHECK_THROWS_AS(studentized_range_cdf(1.0, 1, 10.0), DomainError);
}

TEST_CASE("two-group tukey equals the pooled t times sqrt(2)") {
    TestRng rng(61);
    for (int trial = 0; trial < 5; ++trial) {
        const auto a = rng_vector(rng, 8 + trial, 0.0, 1.0);
        const auto b = rng_vector(rng, 11, 0.2, 1.2);
        const auto pairs = tukey_hsd({a, b}, 0.05);
        REQUIRE(pairs.size() == 1);
        const StatResult t = t_two_sample_pooled(a, b, Tail::two_sided);
        CHECK(std::fabs(pairs[0].q - std::fabs(t.statistic) * std::sqrt(2.0)) <= 1e-8);
        CHECK(pairs[0].mean_diff == doctest::Approx(mean_of(a) - mean_of(b)));
        CHECK(pairs[0].significant == (pairs[0].p_value < 0.05));
    }
}

TEST_CASE("tukey enumerates ordered pairs") {
    TestRng rng(67);
    std::vector<std::vector<double>> groups;
    for (int g = 0; g < 4; ++g)
        groups.push_back(rng_vector(rng, 6, 0.2 * g, 0.2 * g + 1.0));
    const auto pairs = tukey_hsd(groups, 0.05);
    REQUIRE(pairs.size() == 6);
    CHECK(pairs[0].group_a == 0);
    CHECK(pairs[0].group_b == 1);
    CHECK(pairs[5].group_a == 2);
    CHECK(pairs[5].group_b == 3);
    for (const auto& p : pairs) {
        CHECK(p.p_value >= 0.0);
        CHECK(p.p_value <= 1.0);
    }
}

TEST_CASE("bh adjustment on the three-test block") {
    const std::vector<double> raw = {0.026, 0.850, 0.002};
    for (BhMode mode : {BhMode::paper_literal, BhMode::standard_step_up}) {
        const PValueSet out = bh_adjust(raw, mode);
        REQUIRE(out.adjusted_p.size() == 3);
        CHECK(out.adjusted_p[0] == doctest::Approx(0.039).epsilon(1e-12));
        CHECK(out.adjusted_p[1] == doctest::Approx(0.850).epsilon(1e-12));
        CHECK(out.adjusted_p[2] == doctest::Approx(0.006).epsilon(1e-12));
    }
}

TEST_CASE("bh adjustment on the tied six-test block") {
    const std::vector<double> raw = {0.001, 0.001, 0.001, 0.001, 0.001, 0.003};

    const PValueSet literal = bh_adjust(raw, BhMode::paper_literal);
    for (int i = 0; i < 5; ++i)
        CHECK(literal.adjusted_p[i] == doctest::Approx(0.006).epsilon(1e-12));
    CHECK(literal.adjusted_p[5] == doctest::Approx(0.003).epsilon(1e-12));

    const PValueSet stepup = bh_adjust(raw, BhMode::standard_step_up);
    for (int i = 0; i < 5; ++i)
        CHECK(stepup.adjusted_p[i] == doctest::Approx(0.0012).epsilon(1e-12));
    CHECK(stepup.adjusted_p[5] == doctest::Approx(0.003).epsilon(1e-12));

    // step-up output is monotone along the sorted raw order; the literal
    // reading is not, which is the point of keeping both
    CHECK(stepup.adjusted_p[0] <= stepup.adjusted_p[5]);
    CHECK(literal.adjusted_p[0] > literal.adjusted_p[5]);
}

TEST_CASE("bh guard rails") {
    CHECK(bh_adjust({}, BhMode::standard_step_up).adjusted_p.empty());
    const PValueSet one = bh_adjust({0.04}, BhMode::paper_literal, {"only"});
    CHECK(one.adjusted_p[0] == doctest::Approx(0.04));
    CHECK(one.labels[0] == "only");
    CHECK_THROWS_AS(bh_adjust({1.5}, BhMode::paper_literal), OutOfRange);
    CHECK_THROWS_AS(bh_adjust({0.5, 0.2}, BhMode::paper_literal, {"a"}),
                    LengthMismatch);
    CHECK(bh_mode_token(BhMode::paper_literal) == "paper_literal");
    CHECK(bh_mode_token(BhMode::standard_step_up) == "standard_step_up");
}

TEST_CASE("pearson correlation") {
    const StatResult r =
        pearson_r({1.0, 2.0, 3.0, 4.0}, {2.0, 4.0, 5.0, 4.0});
    CHECK(std::fabs(r.statistic - 0.7181848464596079) <= 1e-12);
    CHECK(r.df1 == 2.0);
    CHECK(std::fabs(r.p_value - 0.2818151535403921) <= 1e-9);
    REQUIRE(r.effect_size.has_value());
    CHECK(*r.effect_size == doctest::Approx(r.statistic));
    CHECK(r.method == "pearson_r");

    const StatResult perfect = pearson_r({1.0, 2.0, 3.0}, {2.0, 4.0, 6.0});
    CHECK(perfect.statistic == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(perfect.p_value == 0.0);

    const StatResult anti = pearson_r({1.0, 2.0, 3.0}, {6.0, 4.0, 2.0});
    CHECK(anti.statistic == doctest::Approx(-1.0).epsilon(1e-12));

    CHECK_THROWS_AS(pearson_r({1.0, 1.0, 1.0}, {2.0, 3.0, 4.0}), DegenerateSample);
    CHECK_THROWS_AS(pearson_r({1.0, 2.0}, {1.0}), LengthMismatch);
}

}  // TEST_SUITE
