#pragma once

#include <optional>
#include <string>
#include <vector>

#include "silicrowd/core.hpp"

namespace silicrowd {

enum class Tail { two_sided, lower, upper };
std::string tail_token(Tail t);

struct StatResult {
    double statistic = 0.0;
    double df1 = 0.0;
    std::optional<double> df2;       // set for F tests
    double p_value = 1.0;
    Tail tail = Tail::two_sided;
    std::optional<double> effect_size;
    std::string method;
};

enum class BhMode { paper_literal, standard_step_up };
std::string bh_mode_token(BhMode m);

struct PValueSet {
    std::vector<std::string> labels;
    std::vector<double> raw_p;
    std::vector<double> adjusted_p;
    BhMode mode = BhMode::standard_step_up;
};

struct EquivalenceResult {
    double d_bound = 0.0;
    double raw_bound = 0.0;      // d_bound times pooled sd, in the data's units
    double t_lower = 0.0;        // against -raw_bound, upper-tailed
    double p_lower = 1.0;
    double t_upper = 0.0;        // against +raw_bound, lower-tailed
    double p_upper = 1.0;
    double df = 0.0;
    bool equivalent = false;
};

struct TukeyPair {
    std::size_t group_a = 0;
    std::size_t group_b = 0;
    double mean_diff = 0.0;      // mean_a - mean_b
    double q = 0.0;
    double p_value = 1.0;
    bool significant = false;
};

// Basic moments. sample_sd uses the n-1 divisor.
double mean_of(const std::vector<double>& v);
double sample_sd(const std::vector<double>& v);

// Regularized incomplete beta I_x(a,b), Lentz continued fraction.
double incomplete_beta(double a, double b, double x);
// Student t CDF and F CDF; absolute error within 1e-10 for df up to 2000.
double t_cdf(double t, double df);
double f_cdf(double f, double df1, double df2);
double p_from_t(double t, double df, Tail tail);

StatResult t_one_sample(const std::vector<double>& values, double mu0, Tail tail);
StatResult t_one_sample_summary(double mean, double sd, long n, double mu0, Tail tail);
StatResult t_two_sample_pooled(const std::vector<double>& a, const std::vector<double>& b,
                               Tail tail);
StatResult t_two_sample_welch(const std::vector<double>& a, const std::vector<double>& b,
                              Tail tail);
StatResult t_paired(const std::vector<double>& a, const std::vector<double>& b, Tail tail);

double pooled_sd(double sd_a, long n_a, double sd_b, long n_b);
EquivalenceResult tost_equivalence(const std::vector<double>& a, const std::vector<double>& b,
                                   double d_bound, double alpha);
EquivalenceResult tost_equivalence_summary(double mean_a, double sd_a, long n_a,
                                           double mean_b, double sd_b, long n_b,
                                           double d_bound, double alpha);

StatResult anova_oneway(const std::vector<std::vector<double>>& groups);
std::vector<TukeyPair> tukey_hsd(const std::vector<std::vector<double>>& groups,
                                 double alpha = 0.05);
// CDF of the studentized range for k groups and df error degrees of freedom.
double studentized_range_cdf(double q, int k, double df);
double studentized_range_critical(double alpha, int k, double df);

PValueSet bh_adjust(const std::vector<double>& raw_p, BhMode mode,
                    std::vector<std::string> labels = {});

StatResult pearson_r(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace silicrowd
