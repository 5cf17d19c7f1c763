#include <doctest.h>

#include <cmath>
#include <vector>

#include "helpers.hpp"
#include "silicrowd/update.hpp"

using namespace silicrowd;
using namespace silicrowd::test;

namespace {

std::vector<Question> two_questions() {
    return {basic_question("q01", Outcome::yes, 61.0),
            basic_question("q02", Outcome::no, 38.0)};
}

std::vector<ForecastRecord> full_records() {
    std::vector<ForecastRecord> r;
    for (const std::string qid : {"q01", "q02"})
        for (int rep = 1; rep <= 2; ++rep) {
            const double base = qid == "q01" ? 50.0 : 30.0;
            r.push_back(interval_record(qid, "m", rep, Phase::s2_initial, base,
                                        base + 20.0));
            r.push_back(interval_record(qid, "m", rep, Phase::s2_updated, base + 5.0,
                                        base + 15.0));
        }
    return r;
}

UpdatePair make_pair(const std::string& qid, int rep, double pre_lo, double pre_hi,
                     double post_lo, double post_hi, double human_pct, int outcome) {
    UpdatePair p;
    p.question_id = qid;
    p.model_id = "m";
    p.repetition = rep;
    p.pre = make_interval(make_probability(pre_lo, Unit::percent),
                          make_probability(pre_hi, Unit::percent));
    p.post = make_interval(make_probability(post_lo, Unit::percent),
                           make_probability(post_hi, Unit::percent));
    p.human_median = make_probability(human_pct, Unit::percent);
    p.outcome = outcome;
    return p;
}

}  // namespace

TEST_SUITE("update") {

TEST_CASE("pair building joins the two phases per repetition") {
    const PairSet set = build_pairs(full_records(), two_questions());
    REQUIRE(set.pairs.size() == 4);
    CHECK(set.exclusions.empty());
    const UpdatePair& p = set.pairs.front();
    CHECK(p.question_id == "q01");
    CHECK(p.repetition == 1);
    CHECK(p.pre.midpoint().percent() == doctest::Approx(60.0));
    CHECK(p.post.midpoint().percent() == doctest::Approx(60.0));
    CHECK(p.human_median.percent() == doctest::Approx(61.0));
    CHECK(p.outcome == 1);
}

TEST_CASE("incomplete or failed repetitions land in exclusions") {
    auto records = full_records();
    records.erase(records.begin() + 1);  // q01 rep1 loses its updated record
    ForecastRecord& refused = records[1];  // now q01 rep2 initial
    refused.status = Status::refusal;
    refused.probability.reset();
    refused.interval.reset();

    const PairSet set = build_pairs(records, two_questions());
    CHECK(set.pairs.size() == 2);
    REQUIRE(set.exclusions.size() == 2);
    CHECK(set.exclusions[0].question_id == "q01");
    CHECK(set.exclusions[0].repetition == 1);
    CHECK(set.exclusions[0].reason == "no updated forecast record");
    CHECK(set.exclusions[1].reason == "initial forecast Refusal");

    // s1 rows are ignored entirely
    auto with_s1 = full_records();
    with_s1.push_back(ok_record("q01", "m", 1, Phase::s1, 50.0));
    CHECK(build_pairs(with_s1, two_questions()).pairs.size() == 4);
}

TEST_CASE("duplicate phase records are a hard error") {
    auto records = full_records();
    records.push_back(records[0]);
    CHECK_THROWS_AS(build_pairs(records, two_questions()), FormatError);
}

TEST_CASE("a missing human median is a hard error naming the question") {
    auto questions = two_questions();
    questions[1].human_median_timeline.clear();
    try {
        build_pairs(full_records(), questions);
        CHECK(false);
    } catch (const MissingPlaceholder& e) {
        CHECK(std::string(e.what()).find("q02") != std::string::npos);
    }
}

TEST_CASE("model filter") {
    PairSet set = build_pairs(full_records(), two_questions());
    for (auto& p : set.pairs) p.model_id = p.question_id == "q01" ? "a" : "b";
    CHECK(pairs_for_model(set.pairs, "a").size() == 2);
    CHECK(pairs_for_model(set.pairs, "b").size() == 2);
    CHECK(pairs_for_model(set.pairs, "c").empty());
}

TEST_CASE("accuracy shift is a paired t on run-level brier") {
    std::vector<UpdatePair> pairs = {
        make_pair("q01", 1, 50.0, 70.0, 60.0, 80.0, 61.0, 1),
        make_pair("q01", 2, 40.0, 60.0, 55.0, 75.0, 61.0, 1),
        make_pair("q02", 1, 30.0, 50.0, 20.0, 40.0, 38.0, 0),
    };
    const AccuracyShift shift = accuracy_shift(pairs);
    CHECK(shift.pre.label == "m initial");
    CHECK(shift.post.label == "m updated");
    REQUIRE(shift.pre.scores.size() == 3);
    CHECK(shift.pre.scores.at("q01#1") == doctest::Approx(0.16).epsilon(1e-12));
    CHECK(shift.post.scores.at("q01#1") == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(shift.pre.scores.at("q02#1") == doctest::Approx(0.16).epsilon(1e-12));

    std::vector<double> pre = {0.16, 0.25, 0.16}, post = {0.09, 0.1225, 0.09};
    const StatResult direct = t_paired(post, pre, Tail::two_sided);
    CHECK(shift.test.statistic == doctest::Approx(direct.statistic).epsilon(1e-9));
    CHECK(shift.test.df1 == 2.0);
    CHECK_THROWS_AS(accuracy_shift({pairs[0]}), DegenerateSample);
}

TEST_CASE("interval shift tracks width narrowing") {
    std::vector<UpdatePair> pairs = {
        make_pair("q01", 1, 40.0, 60.0, 50.0, 60.0, 61.0, 1),   // 20 -> 10
        make_pair("q01", 2, 30.0, 62.0, 40.0, 56.0, 61.0, 1),   // 32 -> 16
        make_pair("q02", 1, 35.0, 51.0, 30.0, 38.0, 38.0, 0),   // 16 -> 8
    };
    const IntervalShift shift = interval_shift(pairs);
    CHECK(shift.mean_width_pre == doctest::Approx((20.0 + 32.0 + 16.0) / 3.0));
    CHECK(shift.mean_width_post == doctest::Approx((10.0 + 16.0 + 8.0) / 3.0));
    CHECK(shift.sd_width_pre == doctest::Approx(sample_sd({20.0, 32.0, 16.0})));
    CHECK(shift.test.tail == Tail::lower);
    CHECK(shift.test.statistic < 0.0);
    CHECK(shift.test.p_value < 0.1);
}

TEST_CASE("deviation adjustment correlates moves with crowd distance") {
    // post midpoints track the human median at a fixed proportional rate with
    // distinct gaps, so the signed correlation is strong and positive
    std::vector<UpdatePair> pairs;
    const double humans[] = {70.0, 30.0, 55.0, 42.0, 66.0};
    for (int i = 0; i < 5; ++i) {
        const double pre_mid = 50.0;
        const double gap = humans[i] - pre_mid;
        const double post_mid = pre_mid + 0.6 * gap + (i % 2 == 0 ? 0.8 : -0.8);
        pairs.push_back(make_pair("q0" + std::to_string(i + 1), 1, pre_mid - 5.0,
                                  pre_mid + 5.0, post_mid - 4.0, post_mid + 4.0,
                                  humans[i], 1));
    }
    const StatResult signed_r = deviation_adjustment(pairs, DeviationMode::signed_dev);
    CHECK(signed_r.statistic > 0.9);
    CHECK(signed_r.df1 == 3.0);
    CHECK(signed_r.p_value < 0.05);

    const StatResult abs_r = deviation_adjustment(pairs, DeviationMode::absolute_dev);
    CHECK(abs_r.statistic > 0.0);
    CHECK(abs_r.statistic <= 1.0);
    CHECK(abs_r.statistic != doctest::Approx(signed_r.statistic));

    CHECK_THROWS_AS(deviation_adjustment({pairs[0], pairs[1]}, DeviationMode::signed_dev),
                    DegenerateSample);
}

TEST_CASE("average benchmark scores the midpoint of machine and crowd") {
    std::vector<UpdatePair> pairs = {
        make_pair("q01", 1, 50.0, 70.0, 58.0, 70.0, 80.0, 1),
        make_pair("q01", 2, 40.0, 60.0, 52.0, 68.0, 80.0, 1),
        make_pair("q02", 1, 30.0, 50.0, 28.0, 44.0, 20.0, 0),
    };
    const AverageBenchmark bench = average_benchmark(pairs);
    CHECK(bench.benchmark.label == "m human-machine average");
    // pair 1: (0.60 + 0.80) / 2 = 0.70 against outcome 1
    CHECK(bench.benchmark.scores.at("q01#1") == doctest::Approx(0.09).epsilon(1e-12));
    // pair 3: (0.40 + 0.20) / 2 = 0.30 against outcome 0
    CHECK(bench.benchmark.scores.at("q02#1") == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(bench.test.df1 == 2.0);
    CHECK(bench.test.tail == Tail::two_sided);
}

TEST_CASE("deviation grouping uses the twenty-point band") {
    CHECK(deviation_group(make_pair("q", 1, 60.0, 80.0, 60.0, 80.0, 40.0, 1)) ==
          "above");  // gap +30
    CHECK(deviation_group(make_pair("q", 1, 10.0, 20.0, 10.0, 20.0, 60.0, 1)) ==
          "below");  // gap -45
    CHECK(deviation_group(make_pair("q", 1, 40.0, 60.0, 40.0, 60.0, 45.0, 1)) ==
          "within");  // gap +5
    CHECK(deviation_group(make_pair("q", 1, 40.0, 60.0, 40.0, 60.0, 30.0, 1)) ==
          "within");  // gap exactly +20 stays within
    CHECK(deviation_group(make_pair("q", 1, 39.0, 61.0, 40.0, 60.0, 29.9, 1)) ==
          "above");  // gap +20.1
}

}  // TEST_SUITE
