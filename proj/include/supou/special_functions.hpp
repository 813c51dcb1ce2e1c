#ifndef SUPOU_SPECIAL_FUNCTIONS_HPP
#define SUPOU_SPECIAL_FUNCTIONS_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

namespace supou {

namespace detail {

// Lanczos g=7, n=9 coefficient set; relative error below 1e-13 over the
// positive real axis in double precision.
inline constexpr double lanczos_g = 7.0;
inline constexpr double lanczos_coeff[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,      -176.61502916214059,    12.507343278686905,
    -0.13857109526572012,    9.9843695780195716e-6,  1.5056327351493116e-7};

inline double lanczos_series(double x) {
    double s = lanczos_coeff[0];
    for (int i = 1; i < 9; ++i) s += lanczos_coeff[i] / (x + i);
    return s;
}

} // namespace detail

// Gamma function on (0, inf).
inline double special_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("special_gamma: requires x > 0");
    if (x < 0.5) {
        // reflection through Gamma(x)Gamma(1-x) = pi/sin(pi x)
        constexpr double pi = 3.141592653589793238462643383279502884;
        return pi / (std::sin(pi * x) * special_gamma(1.0 - x));
    }
    const double z = x - 1.0;
    const double t = z + detail::lanczos_g + 0.5;
    constexpr double sqrt_two_pi = 2.506628274631000502415765284811045253;
    return sqrt_two_pi * std::pow(t, z + 0.5) * std::exp(-t) * detail::lanczos_series(z);
}

// log Gamma on (0, inf), Lanczos-based; avoids overflow of special_gamma.
inline double special_log_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("special_log_gamma: requires x > 0");
    if (x < 0.5) {
        constexpr double pi = 3.141592653589793238462643383279502884;
        return std::log(pi / std::sin(pi * x)) - special_log_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    const double t = z + detail::lanczos_g + 0.5;
    constexpr double log_sqrt_two_pi = 0.918938533204672741780329736405617639;
    return log_sqrt_two_pi + (z + 0.5) * std::log(t) - t + std::log(detail::lanczos_series(z));
}

// Riemann zeta for s > 1 by Euler-Maclaurin acceleration:
//   zeta(s) = sum_{k<N} k^-s + N^{1-s}/(s-1) + N^-s/2
//           + sum_j B_{2j}/(2j)! * (s)_{2j-1} * N^{-s-2j+1}
// With N=20 and 7 Bernoulli terms the truncation error is far below 1e-14
// for every s > 1.
inline double special_zeta(double s) {
    if (!(s > 1.0)) throw std::domain_error("special_zeta: requires s > 1");
    constexpr int N = 20;
    // B_2, B_4, ..., B_14
    constexpr double bernoulli[7] = {1.0 / 6.0,  -1.0 / 30.0, 1.0 / 42.0, -1.0 / 30.0,
                                     5.0 / 66.0, -691.0 / 2730.0, 7.0 / 6.0};
    double sum = 0.0;
    for (int k = 1; k < N; ++k) sum += std::pow(static_cast<double>(k), -s);
    const double ns = std::pow(static_cast<double>(N), -s);
    sum += ns * N / (s - 1.0) + 0.5 * ns;
    double rising = s;            // (s)_{2j-1} = s (s+1) ... (s+2j-2)
    double npow = ns / N;         // N^{-s-1}, then N^{-s-3}, ...
    double factorial = 2.0;       // (2j)!
    for (int j = 1; j <= 7; ++j) {
        sum += bernoulli[j - 1] / factorial * rising * npow;
        // prepare next term
        rising *= (s + 2.0 * j - 1.0) * (s + 2.0 * j);
        factorial *= (2.0 * j + 1.0) * (2.0 * j + 2.0);
        npow /= static_cast<double>(N) * N;
    }
    return sum;
}

namespace detail {

// Regularized lower incomplete gamma P(a,x) by power series (x < a+1).
inline double gamma_p_series(double a, double x) {
    double ap = a;
    double del = 1.0 / a;
    double sum = del;
    for (int i = 0; i < 1000; ++i) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::fabs(del) < std::fabs(sum) * 1e-16)
            return sum * std::exp(-x + a * std::log(x) - special_log_gamma(a));
    }
    throw std::runtime_error("gamma_p_series: no convergence");
}

// Regularized upper incomplete gamma Q(a,x) by Lentz continued fraction (x >= a+1).
inline double gamma_q_cf(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / 1e-30;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 1000; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < 1e-16)
            return std::exp(-x + a * std::log(x) - special_log_gamma(a)) * h;
    }
    throw std::runtime_error("gamma_q_cf: no convergence");
}

} // namespace detail

// Regularized lower incomplete gamma P(a,x) = gamma(a,x)/Gamma(a), a > 0, x >= 0.
inline double regularized_gamma_p(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("regularized_gamma_p: a > 0, x >= 0 required");
    if (x == 0.0) return 0.0;
    if (x < a + 1.0) return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_cf(a, x);
}

// gamma(a,x) / x^a, continuous down to x = 0 where it equals 1/a. Evaluating
// the ratio directly keeps tail-integral formulas stable for x near 0.
inline double lower_gamma_ratio(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::domain_error("lower_gamma_ratio: a > 0, x >= 0 required");
    if (x == 0.0) return 1.0 / a;
    if (x < a + 1.0) {
        // e^-x / a * (1 + sum_n x^n / ((a+1)...(a+n)))
        double term = 1.0;
        double sum = 1.0;
        double ap = a;
        for (int i = 0; i < 1000; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (term < sum * 1e-16) break;
        }
        return std::exp(-x) * sum / a;
    }
    return (1.0 - detail::gamma_q_cf(a, x)) * std::exp(special_log_gamma(a) - a * std::log(x));
}

} // namespace supou

#endif // SUPOU_SPECIAL_FUNCTIONS_HPP
