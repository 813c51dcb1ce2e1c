#include <catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "supou/marginals.hpp"

using namespace supou;
using cplx = std::complex<double>;

namespace {

// Independent oracle: m-th cumulant from central finite differences of the
// cgf along real zeta, Richardson-extrapolated over a step sweep. Never uses
// the closed-form cumulant path.
double fd_stencil(const MarginalFamily& f, int m, double h) {
    cplx acc(0.0, 0.0);
    double binom = 1.0;
    for (int j = 0; j <= m; ++j) {
        const double offset = (m / 2.0 - j) * h;
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        acc += sign * binom * cgf(f, cplx(offset, 0.0));
        binom = binom * (m - j) / (j + 1.0);
    }
    // kappa_m = (-i)^m d^m/dzeta^m cgf
    const cplx im_pow = std::pow(cplx(0.0, -1.0), m);
    return (im_pow * acc).real() / std::pow(h, m);
}

double analyticity_scale(const MarginalFamily& f) {
    const auto& p = f.params();
    switch (f.kind()) {
        case FamilyKind::Gamma: return p[1];
        case FamilyKind::InverseGaussian: return p[1] * p[1] / 2.0;
        case FamilyKind::VarianceGamma: return p[1] - std::fabs(p[2]);
        case FamilyKind::NormalInverseGaussian: return p[0] - std::fabs(p[1]);
        case FamilyKind::TemperedStable: return std::pow(p[2], 1.0 / p[0]) / 2.0;
    }
    return 1.0;
}

// Ridders-style step sweep: shrink h geometrically, extrapolate the h^2 error
// series through a Neville tableau, and keep the entry where successive
// estimates agree best (the truncation/roundoff sweet spot).
double fd_cumulant(const MarginalFamily& f, int m) {
    constexpr int ntab = 14;
    constexpr double con = 1.25, con2 = con * con;
    // keep the stencil extent m/2 * h well inside the analyticity radius
    double h = analyticity_scale(f) / m;
    double tab[ntab][ntab];
    tab[0][0] = fd_stencil(f, m, h);
    double best = tab[0][0];
    double err = std::numeric_limits<double>::max();
    for (int i = 1; i < ntab; ++i) {
        h /= con;
        tab[0][i] = fd_stencil(f, m, h);
        double fac = con2;
        for (int j = 1; j <= i; ++j) {
            tab[j][i] = (tab[j - 1][i] * fac - tab[j - 1][i - 1]) / (fac - 1.0);
            fac *= con2;
            const double errt = std::max(std::fabs(tab[j][i] - tab[j - 1][i]),
                                         std::fabs(tab[j][i] - tab[j - 1][i - 1]));
            if (errt <= err) {
                err = errt;
                best = tab[j][i];
            }
        }
        if (std::fabs(tab[i][i] - tab[i - 1][i - 1]) >= 2.0 * err) break;
    }
    return best;
}

std::vector<MarginalFamily> reference_families() {
    return {MarginalFamily::gamma(3.0, 2.0),
            MarginalFamily::inverse_gaussian(1.3, 2.1),
            MarginalFamily::variance_gamma(1.7, 3.0, 1.1, 0.4),
            MarginalFamily::normal_inverse_gaussian(2.0, -0.7, 1.9, -0.3),
            MarginalFamily::tempered_stable(0.6, 1.4, 0.9)};
}

} // namespace

TEST_CASE("construction domain checks") {
    CHECK_THROWS_AS(MarginalFamily::gamma(0.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MarginalFamily::gamma(1.0, -2.0), std::invalid_argument);
    CHECK_THROWS_AS(MarginalFamily::inverse_gaussian(-1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MarginalFamily::variance_gamma(1.0, 1.0, 1.5, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(MarginalFamily::normal_inverse_gaussian(1.0, 2.0, 1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(MarginalFamily::tempered_stable(1.0, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(MarginalFamily::tempered_stable(0.5, 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("cgf vanishes at zero for every family") {
    for (const auto& f : reference_families()) {
        const cplx v = cgf(f, cplx(0.0, 0.0));
        CHECK(std::abs(v) < 1e-14);
    }
}

TEST_CASE("cgf first-order coefficient is the mean") {
    // d/d(i zeta) cgf at 0 for Gamma(2,1) equals alpha/beta = 2
    const auto f = MarginalFamily::gamma(2.0, 1.0);
    CHECK(fd_cumulant(f, 1) == Catch::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("closed-form cumulants, fixed values") {
    CHECK(cumulant(MarginalFamily::gamma(3.0, 2.0), 2) == Catch::Approx(0.75).epsilon(1e-14));
    CHECK(cumulant(MarginalFamily::inverse_gaussian(1.0, 1.0), 1) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK(cumulant(MarginalFamily::inverse_gaussian(1.0, 2.0), 1) == Catch::Approx(0.5).epsilon(1e-14));
    // alpha^2 / gamma^3 with gamma = sqrt(alpha^2 - beta^2) = 2
    CHECK(cumulant(MarginalFamily::normal_inverse_gaussian(2.0, 0.0, 1.0, 0.0), 2) ==
          Catch::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("cumulants match 50-digit references") {
    // reference_families() cumulants computed with 50-digit Taylor expansion
    const std::vector<std::vector<double>> expected = {
        {1.5, 0.75, 0.75, 1.125, 2.25, 5.625},
        {0.619047619047619042584, 0.14037360976136485039, 0.0954922515383434275619,
         0.1082678588870106796875, 0.1718537442650963024274, 0.3507219270716250773277},
        {1.360205391527599585258, 1.144088814038603242003, 0.8927344755872983275765,
         1.637558462529883082124, 3.225074220450648632521, 8.758278007131553424392},
        {-1.009901481869219529497, 1.155720768203857668803, -0.6914568698655558141093,
         1.677282435652711708825, -3.917475468268584934802, 14.19923988173297956498},
        {1.802246851263842015707, 1.718568102058430429337, 5.735711019661636324593,
         32.81640357125239869018, 265.9882063766093624869, 2790.021418820726833629}};
    const auto families = reference_families();
    for (std::size_t i = 0; i < families.size(); ++i)
        for (int m = 1; m <= 6; ++m)
            CHECK(cumulant(families[i], m) ==
                  Catch::Approx(expected[i][static_cast<std::size_t>(m - 1)]).epsilon(1e-12));
}

TEST_CASE("cumulants agree with the finite-difference oracle, m = 1..6") {
    for (const auto& f : reference_families())
        for (int m = 1; m <= 6; ++m) {
            INFO(f.describe() << " m=" << m);
            CHECK(cumulant(f, m) == Catch::Approx(fd_cumulant(f, m)).epsilon(1e-6));
        }
}

TEST_CASE("unit cumulants") {
    CHECK(unit_cumulant(MarginalFamily::gamma(5.0, 1.0), 3) == Catch::Approx(2.0).epsilon(1e-14));
    CHECK(unit_cumulant(MarginalFamily::gamma(7.0, 2.0), 2) == Catch::Approx(0.25).epsilon(1e-14));
    CHECK(unit_cumulant(MarginalFamily::inverse_gaussian(3.0, 1.0), 2) == Catch::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(unit_cumulant(MarginalFamily::gamma(1.0, 1.0), 1), std::invalid_argument);
}

TEST_CASE("unit cumulants invariant under scaling of the convolution parameter") {
    for (const auto& f : reference_families())
        for (double c : {0.1, 1.0, 10.0}) {
            const auto scaled = f.with_delta_like(c * f.delta_like());
            for (int m = 2; m <= 6; ++m) {
                INFO(f.describe() << " c=" << c << " m=" << m);
                CHECK(unit_cumulant(scaled, m) ==
                      Catch::Approx(unit_cumulant(f, m)).epsilon(1e-12));
            }
        }
}

TEST_CASE("convolution closure in the delta-like parameter") {
    const std::vector<cplx> grid = {cplx(0.05, 0.0), cplx(-0.11, 0.02), cplx(0.08, -0.03),
                                    cplx(0.02, 0.04)};
    for (const auto& f : reference_families()) {
        const double d = f.delta_like();
        const auto f1 = f.with_delta_like(0.4 * d);
        const auto f2 = f.with_delta_like(0.6 * d);
        const double scale = analyticity_scale(f);
        for (const auto& z : grid) {
            const cplx zeta = z * scale;
            const cplx lhs = cgf(f1, zeta) + cgf(f2, zeta);
            const cplx rhs = cgf(f, zeta);
            INFO(f.describe());
            CHECK(std::abs(lhs - rhs) < 1e-12 * (1.0 + std::abs(rhs)));
        }
    }
}

TEST_CASE("branch-cut proximity is a domain error") {
    const auto g = MarginalFamily::gamma(1.0, 1.0);
    // i*zeta = 2 beta puts 1 - i zeta / beta on the negative real axis
    CHECK_THROWS_AS(cgf(g, cplx(0.0, -2.0)), std::domain_error);
    const auto ig = MarginalFamily::inverse_gaussian(1.0, 1.0);
    // gamma^2 - 2 i zeta < 0 along the same direction
    CHECK_THROWS_AS(cgf(ig, cplx(0.0, -1.0)), std::domain_error);
    // just inside the strip is fine
    CHECK_NOTHROW(cgf(g, cplx(0.0, -0.99)));
}

TEST_CASE("cumulant vector bundles orders and per-unit constants") {
    const auto cv = cumulant_vector(MarginalFamily::gamma(2.0, 1.0), 4);
    REQUIRE(cv.orders.size() == 4);
    CHECK(cv.values[0] == Catch::Approx(2.0));
    CHECK(std::isnan(cv.per_unit[0]));
    CHECK(cv.per_unit[1] == Catch::Approx(1.0));
    CHECK(cv.per_unit[2] == Catch::Approx(2.0));
    CHECK(cv.values[3] == Catch::Approx(12.0));  // alpha * 3! / beta^4
}
