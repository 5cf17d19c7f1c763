#include "silicrowd/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace silicrowd {

std::string tail_token(Tail t) {
    switch (t) {
        case Tail::two_sided: return "two_sided";
        case Tail::lower: return "lower";
        case Tail::upper: return "upper";
    }
    throw DomainError("unknown tail");
}

std::string bh_mode_token(BhMode m) {
    switch (m) {
        case BhMode::paper_literal: return "paper_literal";
        case BhMode::standard_step_up: return "standard_step_up";
    }
    throw DomainError("unknown bh mode");
}

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw EmptyInput("mean of empty vector");
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    if (v.size() < 2) throw DegenerateSample("sample sd needs n >= 2");
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// ---------------------------------------------------------------------------
// Special-function kernel
// ---------------------------------------------------------------------------

namespace {

// Continued fraction for the incomplete beta (Lentz).
double beta_cf(double a, double b, double x) {
    constexpr int kMaxIter = 500;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIter; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kEps) return h;
    }
    return h;  // converged to double precision long before kMaxIter in practice
}

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double std_normal_pdf(double x) {
    return std::exp(-0.5 * x * x) / std::sqrt(2.0 * 3.14159265358979323846);
}

template <typename F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::fabs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a);
    const double fm = f(m);
    const double fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, 40);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("incomplete_beta: a, b must be positive");
    if (!(x >= 0.0) || !(x <= 1.0)) throw DomainError("incomplete_beta: x outside [0,1]");
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_cf(a, b, x) / a;
    return 1.0 - front * beta_cf(b, a, 1.0 - x) / b;
}

double t_cdf(double t, double df) {
    if (!(df > 0.0) || !std::isfinite(df)) throw DomainError("t_cdf: df must be positive");
    if (!std::isfinite(t)) return t > 0 ? 1.0 : 0.0;
    if (t == 0.0) return 0.5;
    const double x = df / (df + t * t);
    const double half_tail = 0.5 * incomplete_beta(0.5 * df, 0.5, x);
    return t < 0.0 ? half_tail : 1.0 - half_tail;
}

double f_cdf(double f, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) throw DomainError("f_cdf: dfs must be positive");
    if (!std::isfinite(f)) return f > 0 ? 1.0 : 0.0;
    if (f <= 0.0) return 0.0;
    const double x = df1 * f / (df1 * f + df2);
    return incomplete_beta(0.5 * df1, 0.5 * df2, x);
}

double p_from_t(double t, double df, Tail tail) {
    const double lower = t_cdf(t, df);
    switch (tail) {
        case Tail::lower: return lower;
        case Tail::upper: return 1.0 - lower;
        case Tail::two_sided: return std::min(1.0, 2.0 * std::min(lower, 1.0 - lower));
    }
    throw DomainError("unknown tail");
}

// ---------------------------------------------------------------------------
// t tests
// ---------------------------------------------------------------------------

StatResult t_one_sample(const std::vector<double>& values, double mu0, Tail tail) {
    if (values.size() < 2) throw DegenerateSample("one-sample t needs n >= 2");
    const double sd = sample_sd(values);
    if (sd == 0.0) throw DegenerateSample("one-sample t needs nonzero sd");
    return t_one_sample_summary(mean_of(values), sd, static_cast<long>(values.size()), mu0,
                                tail);
}

StatResult t_one_sample_summary(double mean, double sd, long n, double mu0, Tail tail) {
    if (n < 2) throw DegenerateSample("one-sample t needs n >= 2");
    if (!(sd > 0.0)) throw DegenerateSample("one-sample t needs positive sd");
    StatResult r;
    r.statistic = (mean - mu0) / (sd / std::sqrt(static_cast<double>(n)));
    r.df1 = static_cast<double>(n - 1);
    r.tail = tail;
    r.p_value = p_from_t(r.statistic, r.df1, tail);
    r.effect_size = (mean - mu0) / sd;  // Cohen's d
    r.method = "t_one_sample";
    return r;
}

namespace {

struct TwoSampleParts {
    double mean_a, mean_b, var_a, var_b;
    double na, nb;
};

TwoSampleParts two_sample_parts(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw DegenerateSample("two-sample t needs n >= 2 in each group");
    TwoSampleParts p;
    p.mean_a = mean_of(a);
    p.mean_b = mean_of(b);
    const double sa = sample_sd(a);
    const double sb = sample_sd(b);
    p.var_a = sa * sa;
    p.var_b = sb * sb;
    p.na = static_cast<double>(a.size());
    p.nb = static_cast<double>(b.size());
    return p;
}

}  // namespace

StatResult t_two_sample_pooled(const std::vector<double>& a, const std::vector<double>& b,
                               Tail tail) {
    const TwoSampleParts p = two_sample_parts(a, b);
    const double df = p.na + p.nb - 2.0;
    const double pooled_var = ((p.na - 1.0) * p.var_a + (p.nb - 1.0) * p.var_b) / df;
    if (!(pooled_var > 0.0)) throw DegenerateSample("pooled t needs nonzero pooled variance");
    const double se = std::sqrt(pooled_var * (1.0 / p.na + 1.0 / p.nb));
    StatResult r;
    r.statistic = (p.mean_a - p.mean_b) / se;
    r.df1 = df;
    r.tail = tail;
    r.p_value = p_from_t(r.statistic, df, tail);
    r.effect_size = (p.mean_a - p.mean_b) / std::sqrt(pooled_var);
    r.method = "t_two_sample_pooled";
    return r;
}

StatResult t_two_sample_welch(const std::vector<double>& a, const std::vector<double>& b,
                              Tail tail) {
    const TwoSampleParts p = two_sample_parts(a, b);
    const double wa = p.var_a / p.na;
    const double wb = p.var_b / p.nb;
    if (!(wa + wb > 0.0)) throw DegenerateSample("welch t needs nonzero variance");
    const double se = std::sqrt(wa + wb);
    const double df = (wa + wb) * (wa + wb) /
                      (wa * wa / (p.na - 1.0) + wb * wb / (p.nb - 1.0));
    StatResult r;
    r.statistic = (p.mean_a - p.mean_b) / se;
    r.df1 = df;
    r.tail = tail;
    r.p_value = p_from_t(r.statistic, df, tail);
    r.method = "t_two_sample_welch";
    return r;
}

StatResult t_paired(const std::vector<double>& a, const std::vector<double>& b, Tail tail) {
    if (a.size() != b.size()) throw LengthMismatch("paired t needs equal lengths");
    if (a.size() < 2) throw DegenerateSample("paired t needs n >= 2");
    std::vector<double> diff(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diff[i] = a[i] - b[i];
    const double sd = sample_sd(diff);
    if (!(sd > 0.0)) throw DegenerateSample("paired t needs nonzero difference variance");
    StatResult r = t_one_sample_summary(mean_of(diff), sd, static_cast<long>(diff.size()),
                                        0.0, tail);
    r.method = "t_paired";
    return r;
}

// ---------------------------------------------------------------------------
// TOST equivalence
// ---------------------------------------------------------------------------

double pooled_sd(double sd_a, long n_a, double sd_b, long n_b) {
    if (n_a < 2 || n_b < 2) throw DegenerateSample("pooled sd needs n >= 2 in each group");
    const double df = static_cast<double>(n_a + n_b - 2);
    return std::sqrt(((n_a - 1) * sd_a * sd_a + (n_b - 1) * sd_b * sd_b) / df);
}

EquivalenceResult tost_equivalence_summary(double mean_a, double sd_a, long n_a,
                                           double mean_b, double sd_b, long n_b,
                                           double d_bound, double alpha) {
    const double sp = pooled_sd(sd_a, n_a, sd_b, n_b);
    if (!(sp > 0.0)) throw DegenerateSample("tost needs nonzero pooled sd");
    const double df = static_cast<double>(n_a + n_b - 2);
    const double se = sp * std::sqrt(1.0 / n_a + 1.0 / n_b);
    const double diff = mean_a - mean_b;
    EquivalenceResult r;
    r.d_bound = d_bound;
    r.raw_bound = d_bound * sp;
    r.df = df;
    r.t_lower = (diff + r.raw_bound) / se;
    r.p_lower = p_from_t(r.t_lower, df, Tail::upper);
    r.t_upper = (diff - r.raw_bound) / se;
    r.p_upper = p_from_t(r.t_upper, df, Tail::lower);
    r.equivalent = r.p_lower < alpha && r.p_upper < alpha;
    return r;
}

EquivalenceResult tost_equivalence(const std::vector<double>& a, const std::vector<double>& b,
                                   double d_bound, double alpha) {
    if (a.size() < 2 || b.size() < 2) throw DegenerateSample("tost needs n >= 2 in each group");
    return tost_equivalence_summary(mean_of(a), sample_sd(a), static_cast<long>(a.size()),
                                    mean_of(b), sample_sd(b), static_cast<long>(b.size()),
                                    d_bound, alpha);
}

// ---------------------------------------------------------------------------
// ANOVA and Tukey HSD
// ---------------------------------------------------------------------------

namespace {

struct AnovaParts {
    double ms_within = 0.0;
    double df_within = 0.0;
    double ms_between = 0.0;
    double df_between = 0.0;
    std::vector<double> means;
    std::vector<double> sizes;
};

AnovaParts anova_parts(const std::vector<std::vector<double>>& groups) {
    if (groups.size() < 2) throw DegenerateInput("anova needs at least 2 groups");
    AnovaParts p;
    double total_n = 0.0, grand_sum = 0.0;
    for (const auto& g : groups) {
        if (g.empty()) throw DegenerateInput("anova groups must be non-empty");
        p.means.push_back(mean_of(g));
        p.sizes.push_back(static_cast<double>(g.size()));
        total_n += static_cast<double>(g.size());
        grand_sum += std::accumulate(g.begin(), g.end(), 0.0);
    }
    const double k = static_cast<double>(groups.size());
    if (!(total_n > k)) throw DegenerateInput("anova needs total N > group count");
    const double grand_mean = grand_sum / total_n;
    double ss_between = 0.0, ss_within = 0.0;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        ss_between += p.sizes[i] * (p.means[i] - grand_mean) * (p.means[i] - grand_mean);
        for (double x : groups[i]) ss_within += (x - p.means[i]) * (x - p.means[i]);
    }
    p.df_between = k - 1.0;
    p.df_within = total_n - k;
    p.ms_between = ss_between / p.df_between;
    p.ms_within = ss_within / p.df_within;
    if (!(p.ms_within > 0.0)) throw DegenerateInput("anova needs nonzero within-group variance");
    return p;
}

}  // namespace

StatResult anova_oneway(const std::vector<std::vector<double>>& groups) {
    const AnovaParts p = anova_parts(groups);
    StatResult r;
    r.statistic = p.ms_between / p.ms_within;
    r.df1 = p.df_between;
    r.df2 = p.df_within;
    r.tail = Tail::upper;
    r.p_value = 1.0 - f_cdf(r.statistic, p.df_between, p.df_within);
    r.method = "anova_oneway";
    return r;
}

double studentized_range_cdf(double q, int k, double df) {
    if (k < 2) throw DomainError("studentized range needs k >= 2");
    if (!(df > 0.0)) throw DomainError("studentized range needs df > 0");
    if (q <= 0.0) return 0.0;

    auto range_cdf = [k](double w) {
        // CDF of the range of k standard normals.
        if (w <= 0.0) return 0.0;
        auto inner = [k, w](double u) {
            const double span = std_normal_cdf(u + w) - std_normal_cdf(u);
            return std_normal_pdf(u) * std::pow(span, k - 1);
        };
        return k * adaptive_simpson(inner, -8.5, 8.5, 1e-11);
    };

    // Integrate over the distribution of s = sqrt(chi2_df / df).
    const double ln_c = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) -
                        (0.5 * df - 1.0) * std::log(2.0);
    auto outer = [&](double s) {
        if (s <= 0.0) return 0.0;
        const double ln_f = ln_c + (df - 1.0) * std::log(s) - 0.5 * df * s * s;
        if (ln_f < -700.0) return 0.0;
        return std::exp(ln_f) * range_cdf(q * s);
    };
    const double spread = 12.0 / std::sqrt(df);
    const double lo = std::max(0.0, 1.0 - spread);
    const double hi = 1.0 + spread;
    const double p = adaptive_simpson(outer, lo, hi, 1e-10);
    return std::min(1.0, std::max(0.0, p));
}

double studentized_range_critical(double alpha, int k, double df) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must be in (0,1)");
    const double target = 1.0 - alpha;
    double lo = 0.0, hi = 2.0;
    while (studentized_range_cdf(hi, k, df) < target) {
        hi *= 2.0;
        if (hi > 1e4) throw DomainError("studentized range critical value out of range");
    }
    for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (studentized_range_cdf(mid, k, df) < target) lo = mid;
        else hi = mid;
        if (hi - lo < 1e-10) break;
    }
    return 0.5 * (lo + hi);
}

std::vector<TukeyPair> tukey_hsd(const std::vector<std::vector<double>>& groups,
                                 double alpha) {
    const AnovaParts p = anova_parts(groups);
    std::vector<TukeyPair> pairs;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        for (std::size_t j = i + 1; j < groups.size(); ++j) {
            TukeyPair pr;
            pr.group_a = i;
            pr.group_b = j;
            pr.mean_diff = p.means[i] - p.means[j];
            // Tukey-Kramer standard error for unequal sizes
            const double se = std::sqrt(0.5 * p.ms_within *
                                        (1.0 / p.sizes[i] + 1.0 / p.sizes[j]));
            pr.q = std::fabs(pr.mean_diff) / se;
            pr.p_value = 1.0 - studentized_range_cdf(pr.q, static_cast<int>(groups.size()),
                                                     p.df_within);
            pr.p_value = std::min(1.0, std::max(0.0, pr.p_value));
            pr.significant = pr.p_value < alpha;
            pairs.push_back(pr);
        }
    }
    return pairs;
}

// ---------------------------------------------------------------------------
// Benjamini-Hochberg
// ---------------------------------------------------------------------------

PValueSet bh_adjust(const std::vector<double>& raw_p, BhMode mode,
                    std::vector<std::string> labels) {
    for (double p : raw_p)
        if (!(p >= 0.0 && p <= 1.0))
            throw OutOfRange("bh_adjust: p-value outside [0,1]");
    if (!labels.empty() && labels.size() != raw_p.size())
        throw LengthMismatch("bh_adjust: labels/raw_p length mismatch");

    const std::size_t m = raw_p.size();
    PValueSet out;
    out.labels = std::move(labels);
    out.raw_p = raw_p;
    out.mode = mode;
    out.adjusted_p.assign(m, 1.0);
    if (m == 0) return out;

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return raw_p[a] < raw_p[b]; });

    if (mode == BhMode::paper_literal) {
        // Tied p-values all take the smallest rank among the tie; no
        // monotonicity enforcement afterwards.
        std::vector<std::size_t> rank(m, 0);
        for (std::size_t pos = 0; pos < m; ++pos) {
            std::size_t r = pos + 1;
            if (pos > 0 && raw_p[order[pos]] == raw_p[order[pos - 1]])
                r = rank[order[pos - 1]];
            rank[order[pos]] = r;
        }
        for (std::size_t i = 0; i < m; ++i)
            out.adjusted_p[i] =
                std::min(1.0, raw_p[i] * static_cast<double>(m) / static_cast<double>(rank[i]));
    } else {
        double running = 1.0;
        for (std::size_t pos = m; pos-- > 0;) {
            const std::size_t idx = order[pos];
            const double candidate =
                raw_p[idx] * static_cast<double>(m) / static_cast<double>(pos + 1);
            running = std::min(running, candidate);
            out.adjusted_p[idx] = std::min(1.0, running);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Pearson correlation
// ---------------------------------------------------------------------------

StatResult pearson_r(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw LengthMismatch("pearson_r needs equal lengths");
    if (x.size() < 3) throw DegenerateSample("pearson_r needs n >= 3");
    const double mx = mean_of(x);
    const double my = mean_of(y);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (!(sxx > 0.0) || !(syy > 0.0))
        throw DegenerateSample("pearson_r needs nonzero variance in both variables");
    const double r = sxy / std::sqrt(sxx * syy);
    const double n = static_cast<double>(x.size());
    StatResult res;
    res.statistic = r;
    res.df1 = n - 2.0;
    res.tail = Tail::two_sided;
    const double denom = 1.0 - r * r;
    if (denom <= 0.0) {
        res.p_value = 0.0;
    } else {
        const double t = r * std::sqrt((n - 2.0) / denom);
        res.p_value = p_from_t(t, n - 2.0, Tail::two_sided);
    }
    res.effect_size = r;
    res.method = "pearson_r";
    return res;
}

}  // namespace silicrowd
