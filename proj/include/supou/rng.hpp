#ifndef SUPOU_RNG_HPP
#define SUPOU_RNG_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include "supou/special_functions.hpp"

namespace supou {

// Counter-based stream: output u64 #n is splitmix64_mix(key + n*GOLDEN) where
// the key is derived from (master_seed, stream_id) by two finalizer rounds.
// Every draw is a pure function of (master_seed, stream_id, counter), so
// replications are reproducible bit-for-bit at any thread count, and streams
// with distinct ids are decorrelated by the 64-bit mixing.
class RngStream {
public:
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
        : counter_(0), have_gauss_(false), gauss_cache_(0.0) {
        const std::uint64_t a = mix64(master_seed ^ 0x5851F42D4C957F2DULL);
        const std::uint64_t b = mix64(stream_id ^ 0x14057B7EF767814FULL);
        key_ = mix64(a ^ (b << 1 | b >> 63));
    }

    std::uint64_t master_key() const { return key_; }

    std::uint64_t next_u64() {
        counter_ += 0x9E3779B97F4A7C15ULL;
        return mix64(key_ + counter_);
    }

    // uniform on [0, 1), 53-bit resolution
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform on (0, 1], safe under log()
    double next_double_pos() { return 1.0 - next_double(); }

    // standard normal, polar method, second variate cached
    double next_gaussian() {
        if (have_gauss_) {
            have_gauss_ = false;
            return gauss_cache_;
        }
        double u, v, s;
        do {
            u = 2.0 * next_double() - 1.0;
            v = 2.0 * next_double() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double r = std::sqrt(-2.0 * std::log(s) / s);
        gauss_cache_ = v * r;
        have_gauss_ = true;
        return u * r;
    }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
    std::uint64_t key_;
    std::uint64_t counter_;
    bool have_gauss_;
    double gauss_cache_;
};

inline double sample_exponential(RngStream& rng, double rate) {
    if (!(rate > 0.0)) throw std::invalid_argument("sample_exponential: rate > 0 required");
    return -std::log(rng.next_double_pos()) / rate;
}

// Marsaglia-Tsang for shape >= 1; shape < 1 boosted via G(a) = G(a+1) U^{1/a}.
inline double sample_gamma(RngStream& rng, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0))
        throw std::invalid_argument("sample_gamma: shape > 0 and rate > 0 required");
    double boost = 1.0;
    if (shape < 1.0) {
        boost = std::pow(rng.next_double_pos(), 1.0 / shape);
        shape += 1.0;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = rng.next_gaussian();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = rng.next_double_pos();
        if (u < 1.0 - 0.0331 * x * x * x * x) return boost * d * v / rate;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return boost * d * v / rate;
    }
}

// Knuth below mean 10, Hormann's transformed rejection above.
inline long sample_poisson(RngStream& rng, double mean) {
    if (mean < 0.0) throw std::invalid_argument("sample_poisson: mean >= 0 required");
    if (mean == 0.0) return 0;
    if (mean < 10.0) {
        const double threshold = std::exp(-mean);
        long k = 0;
        double prod = rng.next_double();
        while (prod > threshold) {
            ++k;
            prod *= rng.next_double();
        }
        return k;
    }
    const double log_mean = std::log(mean);
    const double b = 0.931 + 2.53 * std::sqrt(mean);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = rng.next_double() - 0.5;
        const double v = rng.next_double();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<long>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double k = kf;
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = -mean + k * log_mean - special_log_gamma(k + 1.0);
        if (lhs <= rhs) return static_cast<long>(kf);
    }
}

// Inverse Gaussian in the (delta, gamma) parametrization of the cgf
// delta(gamma - sqrt(gamma^2 - 2w)); mean delta/gamma, shape delta^2.
// Michael-Schucany-Haas transformation with the standard root selection.
inline double sample_inverse_gaussian(RngStream& rng, double delta, double gamma) {
    if (!(delta > 0.0) || !(gamma > 0.0))
        throw std::invalid_argument("sample_inverse_gaussian: delta > 0, gamma > 0 required");
    const double mean = delta / gamma;
    const double shape = delta * delta;
    const double z = rng.next_gaussian();
    const double y = z * z;
    const double x1 = mean + mean * mean * y / (2.0 * shape) -
                      (mean / (2.0 * shape)) * std::sqrt(4.0 * mean * shape * y + mean * mean * y * y);
    const double u = rng.next_double();
    if (u <= mean / (mean + x1)) return x1;
    return mean * mean / x1;
}

// One-sided (positive) stable with Laplace transform E exp(-s S) = exp(-s^kappa),
// Kanter's representation: S = (A(U)/E)^{(1-kappa)/kappa}, U ~ U(0,pi), E ~ Exp(1).
inline double sample_positive_stable(RngStream& rng, double kappa) {
    if (!(kappa > 0.0 && kappa < 1.0))
        throw std::invalid_argument("sample_positive_stable: kappa in (0,1) required");
    constexpr double pi = 3.141592653589793238462643383279502884;
    const double u = pi * rng.next_double_pos();
    const double e = sample_exponential(rng, 1.0);
    const double a = std::pow(std::sin(kappa * u), kappa) *
                     std::pow(std::sin((1.0 - kappa) * u), 1.0 - kappa) / std::sin(u);
    // A(u) = a^{1/(1-kappa)}; S = (A/E)^{(1-kappa)/kappa}
    return std::pow(a, 1.0 / kappa) * std::pow(e, -(1.0 - kappa) / kappa);
}

} // namespace supou

#endif // SUPOU_RNG_HPP
