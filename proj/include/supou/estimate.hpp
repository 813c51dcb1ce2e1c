#ifndef SUPOU_ESTIMATE_HPP
#define SUPOU_ESTIMATE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "supou/rng.hpp"

namespace supou {

struct Estimate {
    double value = 0.0;
    double stderror = 0.0;
};

namespace detail {

// Central power sums from raw power sums of the (already mean-shifted) data.
struct PowerSums {
    long double n = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0;
    long double central2() const { return s2 - s1 * s1 / n; }
    long double central3() const { return s3 - 3 * s2 * s1 / n + 2 * s1 * s1 * s1 / (n * n); }
    long double central4() const {
        return s4 - 4 * s3 * s1 / n + 6 * s2 * s1 * s1 / (n * n) - 3 * s1 * s1 * s1 * s1 / (n * n * n);
    }
};

// k-statistics (Fisher): unbiased cumulant estimators.
inline long double kstat_from_sums(const PowerSums& p, int m) {
    const long double n = p.n;
    switch (m) {
        case 1: return p.s1 / n;
        case 2: return p.central2() / (n - 1);
        case 3: return n * p.central3() / ((n - 1) * (n - 2));
        case 4: {
            const long double s2 = p.central2(), s4 = p.central4();
            return (n * (n + 1) * s4 - 3 * (n - 1) * s2 * s2) / ((n - 1) * (n - 2) * (n - 3));
        }
        default: throw std::invalid_argument("k_statistics: m in 1..4 supported");
    }
}

} // namespace detail

// Unbiased k-statistic of order m with leave-one-out jackknife standard error.
// Shift-invariance of k_m (m >= 2) lets us center the data once, which keeps
// the raw power sums well conditioned.
inline Estimate k_statistics(std::span<const double> samples, int m) {
    if (m < 1 || m > 4) throw std::invalid_argument("k_statistics: m in 1..4 supported");
    const std::size_t n = samples.size();
    const std::size_t min_n = (m <= 2) ? 10 : 100;
    if (n < min_n) throw std::invalid_argument("k_statistics: insufficient sample size");

    long double grand = 0.0L;
    for (double x : samples) grand += x;
    grand /= static_cast<long double>(n);

    detail::PowerSums full;
    full.n = static_cast<long double>(n);
    for (double xd : samples) {
        const long double x = static_cast<long double>(xd) - grand;
        const long double x2 = x * x;
        full.s1 += x;
        full.s2 += x2;
        full.s3 += x2 * x;
        full.s4 += x2 * x2;
    }

    const long double theta = detail::kstat_from_sums(full, m) + (m == 1 ? grand : 0.0L);

    // jackknife over single removals, O(n) via the raw sums
    long double mean_loo = 0.0L;
    std::vector<long double> loo(n);
    for (std::size_t i = 0; i < n; ++i) {
        const long double x = static_cast<long double>(samples[i]) - grand;
        const long double x2 = x * x;
        detail::PowerSums p;
        p.n = static_cast<long double>(n - 1);
        p.s1 = full.s1 - x;
        p.s2 = full.s2 - x2;
        p.s3 = full.s3 - x2 * x;
        p.s4 = full.s4 - x2 * x2;
        loo[i] = detail::kstat_from_sums(p, m);
        mean_loo += loo[i];
    }
    mean_loo /= static_cast<long double>(n);
    long double var = 0.0L;
    for (std::size_t i = 0; i < n; ++i) {
        const long double d = loo[i] - mean_loo;
        var += d * d;
    }
    var *= static_cast<long double>(n - 1) / static_cast<long double>(n);
    return Estimate{static_cast<double>(theta), static_cast<double>(std::sqrt(static_cast<double>(var)))};
}

// mean |x|^q with its (exact-jackknife) standard error sd/sqrt(n)
inline Estimate empirical_abs_moment(std::span<const double> samples, double q) {
    if (!(q > 0.0)) throw std::invalid_argument("empirical_abs_moment: q > 0 required");
    if (samples.empty()) throw std::invalid_argument("empirical_abs_moment: empty sample");
    const std::size_t n = samples.size();
    long double s = 0.0L, s2 = 0.0L;
    for (double x : samples) {
        const long double v = std::pow(std::fabs(x), q);
        s += v;
        s2 += v * v;
    }
    const long double mean = s / static_cast<long double>(n);
    if (n == 1) return Estimate{static_cast<double>(mean), 0.0};
    const long double var = (s2 - static_cast<long double>(n) * mean * mean) / static_cast<long double>(n - 1);
    const double se = std::sqrt(std::max(0.0, static_cast<double>(var)) / static_cast<double>(n));
    return Estimate{static_cast<double>(mean), se};
}

struct ScalingPoint {
    std::int64_t n = 0;
    double log_n = 0.0;
    double moment = 0.0;
    double moment_se = 0.0;
    double log_moment = 0.0;
};

struct ScalingFit {
    double q = 0.0;
    std::vector<ScalingPoint> grid;
    double slope = 0.0;      // tau-hat(q)
    double intercept = 0.0;
    double slope_se = 0.0;
    double r_squared = 0.0;
};

// Grid acceptance rule: at least 4 horizons spanning at least 10^1.5 in n.
inline constexpr double scaling_min_span = 31.6227766016838;

// OLS of log moment on log n. Points carry (n, moment, se).
inline ScalingFit fit_scaling(const std::vector<std::pair<std::int64_t, Estimate>>& points, double q) {
    std::vector<std::int64_t> ns;
    for (const auto& [n, est] : points) {
        if (n < 1) throw std::invalid_argument("fit_scaling: horizons must be >= 1");
        if (!(est.value > 0.0)) throw std::invalid_argument("fit_scaling: moments must be positive");
        ns.push_back(n);
    }
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    if (ns.size() < 4) throw std::invalid_argument("fit_scaling: need at least 4 distinct horizons");
    if (static_cast<double>(ns.back()) / static_cast<double>(ns.front()) < scaling_min_span)
        throw std::invalid_argument("fit_scaling: horizon grid span too small");

    ScalingFit fit;
    fit.q = q;
    double sx = 0.0, sy = 0.0;
    for (const auto& [n, est] : points) {
        ScalingPoint p;
        p.n = n;
        p.log_n = std::log(static_cast<double>(n));
        p.moment = est.value;
        p.moment_se = est.stderror;
        p.log_moment = std::log(est.value);
        fit.grid.push_back(p);
        sx += p.log_n;
        sy += p.log_moment;
    }
    const double np = static_cast<double>(fit.grid.size());
    const double mx = sx / np, my = sy / np;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : fit.grid) {
        sxx += (p.log_n - mx) * (p.log_n - mx);
        sxy += (p.log_n - mx) * (p.log_moment - my);
        syy += (p.log_moment - my) * (p.log_moment - my);
    }
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (const auto& p : fit.grid) {
        const double r = p.log_moment - fit.intercept - fit.slope * p.log_n;
        rss += r * r;
    }
    if (fit.grid.size() > 2) fit.slope_se = std::sqrt(rss / (np - 2.0) / sxx);
    fit.r_squared = syy > 0.0 ? 1.0 - rss / syy : 1.0;
    return fit;
}

enum class Verdict { intermittent, not_detected, inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::intermittent: return "intermittent";
        case Verdict::not_detected: return "not-detected";
        case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

struct IntermittencyVerdict {
    double p = 0.0, r = 0.0;
    double ratio_p = 0.0, ratio_r = 0.0;  // tau-hat(q)/q
    double difference = 0.0;
    double stderror = 0.0;
    Verdict verdict = Verdict::inconclusive;
};

inline constexpr double intermittency_z = 3.0;           // detection threshold
inline constexpr double intermittency_resolution = 0.05; // relative resolving power for a clean negative

// Detection rule on tau(r)/r - tau(p)/p: a positive difference beyond
// z standard errors is "intermittent"; if instead the error band is narrow
// relative to the ratio scale and shows no such increase, "not-detected";
// bands too wide to tell either way are "inconclusive".
inline IntermittencyVerdict intermittency_check(const ScalingFit& fit_p, const ScalingFit& fit_r) {
    if (!(fit_p.q < fit_r.q)) throw std::invalid_argument("intermittency_check: p < r required");
    IntermittencyVerdict out;
    out.p = fit_p.q;
    out.r = fit_r.q;
    out.ratio_p = fit_p.slope / fit_p.q;
    out.ratio_r = fit_r.slope / fit_r.q;
    out.difference = out.ratio_r - out.ratio_p;
    const double se_p = fit_p.slope_se / fit_p.q;
    const double se_r = fit_r.slope_se / fit_r.q;
    out.stderror = std::sqrt(se_p * se_p + se_r * se_r);
    const double scale = std::max({std::fabs(out.ratio_p), std::fabs(out.ratio_r), 1e-12});
    if (out.difference > intermittency_z * out.stderror)
        out.verdict = Verdict::intermittent;
    else if (intermittency_z * out.stderror <= intermittency_resolution * scale)
        out.verdict = Verdict::not_detected;
    else
        out.verdict = Verdict::inconclusive;
    return out;
}

struct ConfidenceInterval {
    double lo = 0.0;
    double hi = 0.0;
};

struct NormalityReport {
    std::size_t sample_size = 0;
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    double ks_distance = 0.0;  // against the standard normal, samples as given
    ConfidenceInterval skewness_ci;
    ConfidenceInterval excess_kurtosis_ci;
    ConfidenceInterval ks_ci;
};

inline double standard_normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

// Asymptotic Kolmogorov critical value at level alpha for sample size n.
inline double ks_critical_value(std::size_t n, double alpha) {
    // c(alpha) = sqrt(-log(alpha/2)/2)
    return std::sqrt(-0.5 * std::log(alpha / 2.0)) / std::sqrt(static_cast<double>(n));
}

namespace detail {

struct MomentStats {
    double skew = 0.0;
    double exkurt = 0.0;
};

inline MomentStats moment_stats(std::span<const double> x) {
    long double s1 = 0.0L;
    for (double v : x) s1 += v;
    const long double mean = s1 / static_cast<long double>(x.size());
    long double c2 = 0.0L, c3 = 0.0L, c4 = 0.0L;
    for (double v : x) {
        const long double d = v - mean;
        const long double d2 = d * d;
        c2 += d2;
        c3 += d2 * d;
        c4 += d2 * d2;
    }
    const long double n = static_cast<long double>(x.size());
    c2 /= n;
    c3 /= n;
    c4 /= n;
    MomentStats out;
    out.skew = static_cast<double>(c3 / std::pow(static_cast<double>(c2), 1.5));
    out.exkurt = static_cast<double>(c4 / (c2 * c2) - 3.0L);
    return out;
}

inline double ks_statistic_sorted(const std::vector<double>& sorted) {
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = standard_normal_cdf(sorted[i]);
        d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
        d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
    }
    return d;
}

} // namespace detail

// Marginal-normality diagnostics of a (pre-standardized) ensemble; percentile
// bootstrap confidence intervals at the 95% level.
inline NormalityReport normality_diagnostics(std::span<const double> samples,
                                             std::uint64_t bootstrap_seed = 12345,
                                             int bootstrap_rounds = 200) {
    if (samples.size() < 500)
        throw std::invalid_argument("normality_diagnostics: sample size >= 500 required");
    NormalityReport rep;
    rep.sample_size = samples.size();
    const auto ms = detail::moment_stats(samples);
    rep.skewness = ms.skew;
    rep.excess_kurtosis = ms.exkurt;
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    rep.ks_distance = detail::ks_statistic_sorted(sorted);

    std::vector<double> bs_skew, bs_kurt, bs_ks;
    std::vector<double> resample(samples.size());
    RngStream rng(bootstrap_seed, 0x626f6f74ULL);
    for (int b = 0; b < bootstrap_rounds; ++b) {
        for (std::size_t i = 0; i < resample.size(); ++i) {
            const std::size_t j = static_cast<std::size_t>(rng.next_u64() % samples.size());
            resample[i] = samples[j];
        }
        const auto m = detail::moment_stats(resample);
        bs_skew.push_back(m.skew);
        bs_kurt.push_back(m.exkurt);
        std::sort(resample.begin(), resample.end());
        bs_ks.push_back(detail::ks_statistic_sorted(resample));
    }
    auto percentile_ci = [](std::vector<double>& v) {
        std::sort(v.begin(), v.end());
        const auto lo = static_cast<std::size_t>(0.025 * static_cast<double>(v.size() - 1));
        const auto hi = static_cast<std::size_t>(std::ceil(0.975 * static_cast<double>(v.size() - 1)));
        return ConfidenceInterval{v[lo], v[hi]};
    };
    rep.skewness_ci = percentile_ci(bs_skew);
    rep.excess_kurtosis_ci = percentile_ci(bs_kurt);
    rep.ks_ci = percentile_ci(bs_ks);
    return rep;
}

} // namespace supou

#endif // SUPOU_ESTIMATE_HPP
