#ifndef SUPOU_MARGINALS_HPP
#define SUPOU_MARGINALS_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace supou {

// Self-decomposable marginal laws of OU type processes. Each family carries
// exactly one convolution parameter (the "delta-like" parameter): cumulants of
// order m >= 2 are proportional to it, with family constants C_m that the rest
// of the library consumes.
//
//   Gamma(alpha, beta):   cgf  -alpha log(1 - w/beta),            delta-like: alpha
//   IG(delta, gamma):     cgf  delta (gamma - sqrt(gamma^2 - 2w)), delta-like: delta
//   VG(kappa, alpha, beta, mu):
//                         cgf  mu w + 2 kappa log(gamma^2 / (alpha^2 - (beta + w)^2)),
//                         gamma^2 = alpha^2 - beta^2,             delta-like: kappa
//   NIG(alpha, beta, delta, mu):
//                         cgf  mu w + delta (gamma - sqrt(alpha^2 - (beta + w)^2)),
//                         delta-like: delta
//   TS(kappa, delta, gamma):
//                         cgf  delta gamma - delta (gamma^{1/kappa} - 2w)^kappa,
//                         kappa in (0,1),                         delta-like: delta
//
// w = i*zeta throughout; cumulants are plain d^m/dw^m at w = 0.

enum class FamilyKind { Gamma, InverseGaussian, VarianceGamma, NormalInverseGaussian, TemperedStable };

inline const char* family_name(FamilyKind k) {
    switch (k) {
        case FamilyKind::Gamma: return "gamma";
        case FamilyKind::InverseGaussian: return "ig";
        case FamilyKind::VarianceGamma: return "vg";
        case FamilyKind::NormalInverseGaussian: return "nig";
        case FamilyKind::TemperedStable: return "ts";
    }
    return "?";
}

namespace detail {

// Principal-branch log/sqrt/pow with an explicit branch-cut guard: arguments
// whose phase is within 1e-10 of the cut (the non-positive real axis) are a
// domain error rather than a silent wrap to the other sheet.
inline constexpr double branch_cut_phase_tol = 1e-10;
inline constexpr double pi_const = 3.141592653589793238462643383279502884;

inline void check_branch(const std::complex<double>& z, const char* what) {
    if (z.real() == 0.0 && z.imag() == 0.0)
        throw std::domain_error(std::string(what) + ": argument at branch point");
    if (std::fabs(std::arg(z)) > pi_const - branch_cut_phase_tol)
        throw std::domain_error(std::string(what) + ": argument within 1e-10 of the branch cut");
}

inline std::complex<double> checked_log(const std::complex<double>& z) {
    check_branch(z, "cgf log");
    return std::log(z);
}

inline std::complex<double> checked_sqrt(const std::complex<double>& z) {
    check_branch(z, "cgf sqrt");
    return std::sqrt(z);
}

inline std::complex<double> checked_pow(const std::complex<double>& z, double a) {
    check_branch(z, "cgf pow");
    return std::exp(a * std::log(z));
}

} // namespace detail

class MarginalFamily {
public:
    static MarginalFamily gamma(double alpha, double beta) {
        require(alpha > 0.0, "gamma: alpha > 0 required");
        require(beta > 0.0, "gamma: beta > 0 required");
        return MarginalFamily(FamilyKind::Gamma, {alpha, beta, 0.0, 0.0});
    }
    static MarginalFamily inverse_gaussian(double delta, double gamma) {
        require(delta > 0.0, "ig: delta > 0 required");
        require(gamma > 0.0, "ig: gamma > 0 required");
        return MarginalFamily(FamilyKind::InverseGaussian, {delta, gamma, 0.0, 0.0});
    }
    static MarginalFamily variance_gamma(double kappa, double alpha, double beta, double mu) {
        require(kappa > 0.0, "vg: kappa > 0 required");
        require(alpha > std::fabs(beta), "vg: alpha > |beta| required");
        return MarginalFamily(FamilyKind::VarianceGamma, {kappa, alpha, beta, mu});
    }
    static MarginalFamily normal_inverse_gaussian(double alpha, double beta, double delta, double mu) {
        require(alpha >= std::fabs(beta), "nig: alpha >= |beta| required");
        require(alpha > 0.0, "nig: alpha > 0 required");
        require(delta > 0.0, "nig: delta > 0 required");
        return MarginalFamily(FamilyKind::NormalInverseGaussian, {alpha, beta, delta, mu});
    }
    static MarginalFamily tempered_stable(double kappa, double delta, double gamma) {
        require(kappa > 0.0 && kappa < 1.0, "ts: kappa in (0,1) required");
        require(delta > 0.0, "ts: delta > 0 required");
        require(gamma > 0.0, "ts: gamma > 0 required");
        return MarginalFamily(FamilyKind::TemperedStable, {kappa, delta, gamma, 0.0});
    }

    FamilyKind kind() const { return kind_; }
    const std::array<double, 4>& params() const { return p_; }

    // The convolution parameter of the family.
    double delta_like() const {
        switch (kind_) {
            case FamilyKind::Gamma: return p_[0];            // alpha
            case FamilyKind::InverseGaussian: return p_[0];  // delta
            case FamilyKind::VarianceGamma: return p_[0];    // kappa
            case FamilyKind::NormalInverseGaussian: return p_[2]; // delta
            case FamilyKind::TemperedStable: return p_[1];   // delta
        }
        return 0.0;
    }

    // Same family with the delta-like parameter replaced. For the location
    // families (VG, NIG) mu is rescaled proportionally so that superposition
    // schedules keep the component means summable.
    MarginalFamily with_delta_like(double value) const {
        require(value > 0.0, "with_delta_like: positive value required");
        const double ratio = value / delta_like();
        switch (kind_) {
            case FamilyKind::Gamma: return gamma(value, p_[1]);
            case FamilyKind::InverseGaussian: return inverse_gaussian(value, p_[1]);
            case FamilyKind::VarianceGamma: return variance_gamma(value, p_[1], p_[2], p_[3] * ratio);
            case FamilyKind::NormalInverseGaussian:
                return normal_inverse_gaussian(p_[0], p_[1], value, p_[3] * ratio);
            case FamilyKind::TemperedStable: return tempered_stable(p_[0], value, p_[2]);
        }
        throw std::logic_error("with_delta_like: unreachable");
    }

    std::string describe() const;

private:
    MarginalFamily(FamilyKind k, std::array<double, 4> p) : kind_(k), p_(p) {}
    static void require(bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    }
    FamilyKind kind_;
    std::array<double, 4> p_;
};

inline std::string MarginalFamily::describe() const {
    auto fmt = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%g", v);
        return std::string(buf);
    };
    switch (kind_) {
        case FamilyKind::Gamma:
            return "gamma(alpha=" + fmt(p_[0]) + ",beta=" + fmt(p_[1]) + ")";
        case FamilyKind::InverseGaussian:
            return "ig(delta=" + fmt(p_[0]) + ",gamma=" + fmt(p_[1]) + ")";
        case FamilyKind::VarianceGamma:
            return "vg(kappa=" + fmt(p_[0]) + ",alpha=" + fmt(p_[1]) + ",beta=" + fmt(p_[2]) +
                   ",mu=" + fmt(p_[3]) + ")";
        case FamilyKind::NormalInverseGaussian:
            return "nig(alpha=" + fmt(p_[0]) + ",beta=" + fmt(p_[1]) + ",delta=" + fmt(p_[2]) +
                   ",mu=" + fmt(p_[3]) + ")";
        case FamilyKind::TemperedStable:
            return "ts(kappa=" + fmt(p_[0]) + ",delta=" + fmt(p_[1]) + ",gamma=" + fmt(p_[2]) + ")";
    }
    return "?";
}

// log E exp{i zeta X} on the family's strip of analyticity.
inline std::complex<double> cgf(const MarginalFamily& f, std::complex<double> zeta) {
    using detail::checked_log;
    using detail::checked_pow;
    using detail::checked_sqrt;
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> w = i * zeta;
    const auto& p = f.params();
    switch (f.kind()) {
        case FamilyKind::Gamma: {
            const double alpha = p[0], beta = p[1];
            return -alpha * checked_log(1.0 - w / beta);
        }
        case FamilyKind::InverseGaussian: {
            const double delta = p[0], gamma = p[1];
            return delta * (gamma - checked_sqrt(gamma * gamma - 2.0 * w));
        }
        case FamilyKind::VarianceGamma: {
            // factored form keeps each log on its own branch over the strip
            const double kappa = p[0], alpha = p[1], beta = p[2], mu = p[3];
            const double gamma_sq = alpha * alpha - beta * beta;
            return mu * w + 2.0 * kappa * (std::log(gamma_sq) - checked_log(alpha - beta - w) -
                                           checked_log(alpha + beta + w));
        }
        case FamilyKind::NormalInverseGaussian: {
            const double alpha = p[0], beta = p[1], delta = p[2], mu = p[3];
            const double gamma = std::sqrt(alpha * alpha - beta * beta);
            return mu * w + delta * (gamma - checked_sqrt(alpha * alpha - (beta + w) * (beta + w)));
        }
        case FamilyKind::TemperedStable: {
            const double kappa = p[0], delta = p[1], gamma = p[2];
            const double g1k = std::pow(gamma, 1.0 / kappa);
            return delta * gamma - delta * checked_pow(g1k - 2.0 * w, kappa);
        }
    }
    throw std::logic_error("cgf: unreachable");
}

namespace detail {

// Derivatives at w=0 of h(w) = sqrt(alpha^2 - (beta+w)^2) from the exact
// recursion obtained by Leibniz-differentiating h^2 = alpha^2 - (beta+w)^2:
//   m=1: 2 h h' = -2(beta+w)
//   m=2: 2 h h'' + 2 h'^2 = -2
//   m>2: sum_{j=0..m} C(m,j) h^(j) h^(m-j) = 0
inline std::vector<double> nig_sqrt_derivatives(double alpha, double beta, int m_max) {
    std::vector<double> h(static_cast<std::size_t>(m_max) + 1, 0.0);
    const double gamma = std::sqrt(alpha * alpha - beta * beta);
    h[0] = gamma;
    if (m_max >= 1) h[1] = -beta / gamma;
    if (m_max >= 2) h[2] = -(1.0 + h[1] * h[1]) / gamma;
    std::vector<double> binom(static_cast<std::size_t>(m_max) + 1, 0.0);
    for (int m = 3; m <= m_max; ++m) {
        // C(m, j) row
        binom[0] = 1.0;
        for (int j = 1; j <= m; ++j)
            binom[static_cast<std::size_t>(j)] =
                binom[static_cast<std::size_t>(j - 1)] * (m - j + 1) / j;
        double s = 0.0;
        for (int j = 1; j < m; ++j)
            s += binom[static_cast<std::size_t>(j)] * h[static_cast<std::size_t>(j)] *
                 h[static_cast<std::size_t>(m - j)];
        h[static_cast<std::size_t>(m)] = -s / (2.0 * gamma);
    }
    return h;
}

} // namespace detail

// Exact m-th cumulant, closed forms / exact derivative recursions per family.
inline double cumulant(const MarginalFamily& f, int m) {
    if (m < 1) throw std::invalid_argument("cumulant: m >= 1 required");
    const auto& p = f.params();
    switch (f.kind()) {
        case FamilyKind::Gamma: {
            // kappa_m = alpha (m-1)! / beta^m
            const double alpha = p[0], beta = p[1];
            double fact = 1.0;
            for (int j = 2; j < m; ++j) fact *= j;
            return alpha * fact / std::pow(beta, m);
        }
        case FamilyKind::InverseGaussian: {
            // kappa_m = delta (2m-3)!! / gamma^(2m-1)
            const double delta = p[0], gamma = p[1];
            double dfact = 1.0;
            for (int j = 2 * m - 3; j >= 3; j -= 2) dfact *= j;
            return delta * dfact / std::pow(gamma, 2 * m - 1);
        }
        case FamilyKind::VarianceGamma: {
            // kappa_m = 2 kappa (m-1)! [ (alpha-beta)^-m + (-1)^m (alpha+beta)^-m ],  m >= 2
            const double kappa = p[0], alpha = p[1], beta = p[2], mu = p[3];
            if (m == 1) return mu + 2.0 * kappa * (1.0 / (alpha - beta) - 1.0 / (alpha + beta));
            double fact = 1.0;
            for (int j = 2; j < m; ++j) fact *= j;
            const double sgn = (m % 2 == 0) ? 1.0 : -1.0;
            return 2.0 * kappa * fact *
                   (std::pow(alpha - beta, -m) + sgn * std::pow(alpha + beta, -m));
        }
        case FamilyKind::NormalInverseGaussian: {
            const double alpha = p[0], beta = p[1], delta = p[2], mu = p[3];
            const auto h = detail::nig_sqrt_derivatives(alpha, beta, m);
            const double base = -delta * h[static_cast<std::size_t>(m)];
            return m == 1 ? mu + base : base;
        }
        case FamilyKind::TemperedStable: {
            // kappa_m = delta 2^m (-1)^{m+1} prod_{j=0..m-1}(kappa-j) gamma^{1-m/kappa}
            const double kappa = p[0], delta = p[1], gamma = p[2];
            double prod = 1.0;
            for (int j = 0; j < m; ++j) prod *= kappa - j;
            const double sgn = (m % 2 == 0) ? -1.0 : 1.0;
            return delta * std::pow(2.0, m) * sgn * prod * std::pow(gamma, 1.0 - m / kappa);
        }
    }
    throw std::logic_error("cumulant: unreachable");
}

// C_m = kappa_m / delta-like, m >= 2. Independent of the delta-like value.
inline double unit_cumulant(const MarginalFamily& f, int m) {
    if (m < 2)
        throw std::invalid_argument("unit_cumulant: m >= 2 required (the mean is not convolution-proportional)");
    return cumulant(f, m) / f.delta_like();
}

// Analytic mean, used for exact centering of simulated paths.
inline double mean_value(const MarginalFamily& f) { return cumulant(f, 1); }

struct CumulantVector {
    std::vector<int> orders;
    std::vector<double> values;    // kappa_m
    std::vector<double> per_unit;  // C_m for m >= 2, NaN for m = 1
};

inline CumulantVector cumulant_vector(const MarginalFamily& f, int m_max) {
    if (m_max < 1) throw std::invalid_argument("cumulant_vector: m_max >= 1 required");
    CumulantVector cv;
    for (int m = 1; m <= m_max; ++m) {
        cv.orders.push_back(m);
        cv.values.push_back(cumulant(f, m));
        cv.per_unit.push_back(m >= 2 ? unit_cumulant(f, m)
                                     : std::numeric_limits<double>::quiet_NaN());
    }
    return cv;
}

} // namespace supou

#endif // SUPOU_MARGINALS_HPP
