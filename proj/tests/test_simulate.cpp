#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "supou/estimate.hpp"
#include "supou/simulate.hpp"

using namespace supou;

namespace {

std::vector<double> draw_many(std::size_t count, std::uint64_t seed,
                              double (*sampler)(RngStream&)) {
    RngStream rng(seed, 0);
    std::vector<double> out(count);
    for (auto& x : out) x = sampler(rng);
    return out;
}

double sample_mean(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_var(const std::vector<double>& v) {
    const double m = sample_mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / static_cast<double>(v.size() - 1);
}

} // namespace

TEST_CASE("rng streams are reproducible and distinct") {
    RngStream a(42, 7), b(42, 7), c(42, 8), d(43, 7);
    bool all_equal = true, bc_differ = false, bd_differ = false;
    for (int i = 0; i < 1000; ++i) {
        const auto va = a.next_u64(), vb = b.next_u64(), vc = c.next_u64(), vd = d.next_u64();
        all_equal = all_equal && (va == vb);
        bc_differ = bc_differ || (vb != vc);
        bd_differ = bd_differ || (vb != vd);
    }
    CHECK(all_equal);
    CHECK(bc_differ);
    CHECK(bd_differ);
}

TEST_CASE("uniform and gaussian moments") {
    RngStream rng(1, 0);
    const std::size_t n = 200000;
    double su = 0.0, su2 = 0.0, sg = 0.0, sg2 = 0.0, sg4 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.next_double();
        const double g = rng.next_gaussian();
        su += u;
        su2 += u * u;
        sg += g;
        sg2 += g * g;
        sg4 += g * g * g * g;
    }
    const double nd = static_cast<double>(n);
    CHECK(su / nd == Catch::Approx(0.5).margin(4.0 * std::sqrt(1.0 / 12.0 / nd)));
    CHECK(su2 / nd == Catch::Approx(1.0 / 3.0).margin(0.004));
    CHECK(sg / nd == Catch::Approx(0.0).margin(4.0 / std::sqrt(nd)));
    CHECK(sg2 / nd == Catch::Approx(1.0).margin(4.0 * std::sqrt(2.0 / nd)));
    CHECK(sg4 / nd == Catch::Approx(3.0).margin(4.0 * std::sqrt(96.0 / nd)));
}

TEST_CASE("gamma sampler moments") {
    for (auto [shape, rate] : std::vector<std::pair<double, double>>{{0.5, 1.0}, {2.7, 1.7}}) {
        RngStream rng(2, 0);
        const std::size_t n = 200000;
        std::vector<double> v(n);
        for (auto& x : v) x = sample_gamma(rng, shape, rate);
        const double mean = shape / rate, var = shape / (rate * rate);
        INFO("shape=" << shape);
        CHECK(sample_mean(v) == Catch::Approx(mean).margin(4.0 * std::sqrt(var / n)));
        CHECK(sample_var(v) == Catch::Approx(var).epsilon(0.05));
    }
}

TEST_CASE("poisson sampler across both branches") {
    for (double mean : {0.3, 3.0, 25.0}) {
        RngStream rng(3, 0);
        const std::size_t n = 200000;
        double s = 0.0, s2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double k = static_cast<double>(sample_poisson(rng, mean));
            s += k;
            s2 += k * k;
        }
        const double nd = static_cast<double>(n);
        const double m = s / nd;
        const double var = s2 / nd - m * m;
        INFO("mean=" << mean);
        CHECK(m == Catch::Approx(mean).margin(4.0 * std::sqrt(mean / nd)));
        CHECK(var == Catch::Approx(mean).epsilon(0.03));
    }
    RngStream rng(3, 1);
    CHECK(sample_poisson(rng, 0.0) == 0);
}

TEST_CASE("inverse gaussian sampler moments") {
    RngStream rng(4, 0);
    const double delta = 1.0, gamma = 2.0;
    const std::size_t n = 200000;
    std::vector<double> v(n);
    for (auto& x : v) x = sample_inverse_gaussian(rng, delta, gamma);
    // mean delta/gamma = 0.5, variance delta/gamma^3
    CHECK(sample_mean(v) == Catch::Approx(0.5).margin(4.0 * std::sqrt(0.125 / n)));
    CHECK(sample_var(v) == Catch::Approx(0.125).epsilon(0.05));
}

TEST_CASE("stationary draws match the marginal cumulants") {
    const std::size_t n = 200000;
    const auto families = {MarginalFamily::gamma(2.0, 1.0),
                           MarginalFamily::inverse_gaussian(1.0, 2.0),
                           MarginalFamily::variance_gamma(1.7, 3.0, 1.1, 0.4),
                           MarginalFamily::normal_inverse_gaussian(2.0, 0.0, 1.0, 0.0),
                           MarginalFamily::tempered_stable(0.5, 1.0, 2.0)};
    std::uint64_t seed = 100;
    for (const auto& f : families) {
        RngStream rng(seed++, 0);
        std::vector<double> v(n);
        for (auto& x : v) x = sample_stationary(f, rng);
        const double mean = cumulant(f, 1), var = cumulant(f, 2);
        INFO(f.describe());
        CHECK(sample_mean(v) == Catch::Approx(mean).margin(4.0 * std::sqrt(var / n)));
        CHECK(sample_var(v) == Catch::Approx(var).epsilon(0.08));
    }
}

TEST_CASE("tempered stable sampler beyond the inverse gaussian point") {
    // tilt-rejection path; exact in law but flagged approximate
    const auto f = MarginalFamily::tempered_stable(0.3, 0.8, 1.2);
    CHECK_FALSE(has_exact_stationary_sampler(f));
    RngStream rng(5, 0);
    const std::size_t n = 50000;
    std::vector<double> v(n);
    for (auto& x : v) x = sample_stationary(f, rng);
    CHECK(sample_mean(v) ==
          Catch::Approx(cumulant(f, 1)).margin(5.0 * std::sqrt(cumulant(f, 2) / n)));
    // kappa = 1/2 coincides with IG and is exact
    CHECK(has_exact_stationary_sampler(MarginalFamily::tempered_stable(0.5, 1.0, 1.0)));
}

TEST_CASE("exactness predicates") {
    CHECK(has_exact_innovation_sampler(MarginalFamily::gamma(1.0, 1.0)));
    CHECK_FALSE(has_exact_innovation_sampler(MarginalFamily::inverse_gaussian(1.0, 1.0)));
    CHECK_FALSE(has_exact_innovation_sampler(MarginalFamily::normal_inverse_gaussian(2, 0, 1, 0)));
}

TEST_CASE("gamma innovation cumulants match the compound-Poisson identity") {
    // kappa_m(W) = C_m alpha (1 - rho^m)
    const std::size_t n = 150000;
    std::uint64_t seed = 200;
    for (double rho : {0.2, 0.5, 0.9}) {
        const auto f = MarginalFamily::gamma(2.0, 1.0);
        RngStream rng(seed++, 0);
        std::vector<double> w(n);
        for (auto& x : w) x = sample_innovation(f, rho, rng);
        for (int m : {2, 3}) {
            const double target = unit_cumulant(f, m) * f.delta_like() * (1.0 - std::pow(rho, m));
            const Estimate k = k_statistics(w, m);
            INFO("rho=" << rho << " m=" << m);
            CHECK(k.value == Catch::Approx(target).margin(4.0 * k.stderror));
        }
    }
    // fixed-value checks
    {
        RngStream rng(300, 0);
        std::vector<double> w(n);
        const auto f = MarginalFamily::gamma(2.0, 1.0);
        for (auto& x : w) x = sample_innovation(f, std::exp(-0.5), rng);
        const Estimate k2 = k_statistics(w, 2);
        CHECK(k2.value == Catch::Approx(1.2642411176571154).margin(4.0 * k2.stderror));
    }
    {
        RngStream rng(301, 0);
        std::vector<double> w(n);
        const auto f = MarginalFamily::gamma(1.0, 1.0);
        for (auto& x : w) x = sample_innovation(f, 0.5, rng);
        const Estimate k3 = k_statistics(w, 3);
        CHECK(k3.value == Catch::Approx(1.75).margin(4.0 * k3.stderror));
    }
}

TEST_CASE("innovation variance vanishes as rho approaches one") {
    // kappa_2(W) = C_2 delta (1 - rho^2); draws are mostly zero near rho = 1,
    // so the variance estimator needs room there
    const auto f = MarginalFamily::gamma(1.0, 1.0);
    const std::size_t n = 50000;
    double prev = 1e30;
    for (double rho : {0.5, 0.9, 0.99}) {
        RngStream rng(6, 0);
        std::vector<double> w(n);
        for (auto& x : w) x = sample_innovation(f, rho, rng);
        const double var = sample_var(w);
        CHECK(var < prev);
        CHECK(var == Catch::Approx(1.0 - rho * rho).epsilon(0.25));
        prev = var;
    }
}

TEST_CASE("surrogate innovations match their first three cumulants") {
    const auto f = MarginalFamily::inverse_gaussian(1.5, 1.2);
    const double rho = 0.6;
    RngStream rng(7, 0);
    const std::size_t n = 150000;
    std::vector<double> w(n);
    for (auto& x : w) x = sample_innovation(f, rho, rng);
    const double k1t = (1.0 - rho) * cumulant(f, 1);
    for (int m : {1, 2, 3}) {
        const double target = m == 1 ? k1t : cumulant(f, m) * (1.0 - std::pow(rho, m));
        const Estimate k = k_statistics(w, m);
        INFO("m=" << m);
        CHECK(k.value == Catch::Approx(target).margin(4.0 * k.stderror));
    }
    // symmetric case falls back to a normal surrogate with the right variance
    const auto nig = MarginalFamily::normal_inverse_gaussian(2.0, 0.0, 1.0, 0.0);
    RngStream rng2(8, 0);
    std::vector<double> w2(n);
    for (auto& x : w2) x = sample_innovation(nig, rho, rng2);
    const Estimate k2 = k_statistics(w2, 2);
    const Estimate k3 = k_statistics(w2, 3);
    CHECK(k2.value == Catch::Approx(cumulant(nig, 2) * (1.0 - rho * rho)).margin(4.0 * k2.stderror));
    CHECK(k3.value == Catch::Approx(0.0).margin(4.0 * k3.stderror));
}

TEST_CASE("single-component path has exponential lag-one correlation") {
    const auto spec = SupouSpec(MarginalFamily::gamma(2.0, 1.0), 1.0, 0.75, 1);
    RngStream rng(9, 0);
    const auto path = simulate_superposition(spec, 200000, rng);
    double s0 = 0.0, s1 = 0.0, cross = 0.0;
    const std::size_t n = path.values.size();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        s0 += path.values[i];
        s1 += path.values[i + 1];
        cross += path.values[i] * path.values[i + 1];
    }
    const double nd = static_cast<double>(n - 1);
    const double mean0 = s0 / nd, mean1 = s1 / nd;
    double var = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) var += (path.values[i] - mean0) * (path.values[i] - mean0);
    var /= nd;
    const double corr = (cross / nd - mean0 * mean1) / var;
    CHECK(corr == Catch::Approx(std::exp(-1.0)).margin(4.0 * std::sqrt((1.0 - 0.135) / nd)));
    CHECK_FALSE(path.approximate);
}

TEST_CASE("superposition is stationary from the first step") {
    const auto spec = SupouSpec(MarginalFamily::gamma(1.0, 1.0), 1.0, 0.75, 4);
    const SimulationPlan plan(spec);
    const std::int64_t R = 4000, n = 64;
    const auto paths = run_replications(R, 999, 1, [&](RngStream& rng, std::int64_t r) {
        return plan.simulate(n, rng, static_cast<std::uint64_t>(r));
    });
    const double mean = plan.mean();
    const double var0 = covariance_R(0.0, spec).value;
    for (std::size_t idx : {std::size_t(0), std::size_t(n / 2 - 1), std::size_t(n - 1)}) {
        std::vector<double> slice(static_cast<std::size_t>(R));
        for (std::size_t r = 0; r < slice.size(); ++r) slice[r] = paths[r].values[idx];
        INFO("i=" << idx + 1);
        CHECK(sample_mean(slice) ==
              Catch::Approx(mean).margin(4.0 * std::sqrt(var0 / static_cast<double>(R))));
        CHECK(sample_var(slice) == Catch::Approx(var0).epsilon(0.12));
    }
}

TEST_CASE("path sample telescopes and handles n = 1") {
    const auto spec = SupouSpec(MarginalFamily::gamma(1.5, 2.0), 0.7, 0.8, 8);
    RngStream rng(10, 0);
    const auto path = simulate_superposition(spec, 128, rng);
    REQUIRE(path.values.size() == 128);
    for (std::size_t i = 1; i < path.values.size(); ++i) {
        const double lhs = path.centered_partial_sums[i] - path.centered_partial_sums[i - 1];
        const double rhs = path.values[i] - path.mean;
        CHECK(std::fabs(lhs - rhs) <=
              4e-16 * (std::fabs(path.centered_partial_sums[i]) + std::fabs(rhs) + 1.0));
    }
    RngStream rng1(10, 1);
    const auto one = simulate_superposition(spec, 1, rng1);
    REQUIRE(one.centered_partial_sums.size() == 1);
    CHECK(one.centered_partial_sums[0] == one.values[0] - one.mean);
}

TEST_CASE("replication ensembles are deterministic and thread-invariant") {
    const auto spec = SupouSpec(MarginalFamily::gamma(1.0, 1.0), 1.0, 0.75, 16);
    const SimulationPlan plan(spec);
    const auto run = [&](int threads, std::uint64_t seed) {
        return replicate_terminal_sums(plan, 64, 200, seed, threads);
    };
    const auto e1 = run(1, 4242);
    const auto e2 = run(1, 4242);
    const auto e8 = run(8, 4242);
    const auto ed = run(1, 4243);
    CHECK(e1 == e2);
    CHECK(e1 == e8);
    CHECK(e1 != ed);
}

TEST_CASE("ensemble variance of the partial sum matches the exact cumulant") {
    const auto spec = SupouSpec(MarginalFamily::gamma(1.0, 1.0), 1.0, 0.75, 64);
    const SimulationPlan plan(spec);
    const std::int64_t n = 256, R = 2000;
    const auto sums = replicate_terminal_sums(plan, n, R, 31337, 1);
    const Estimate k2 = k_statistics(sums, 2);
    const double target = exact_cumulant(spec, 2, n).value;
    CHECK(k2.value == Catch::Approx(target).margin(4.0 * k2.stderror));
}

TEST_CASE("ensemble variance of stationary values matches R(0)") {
    const auto spec = SupouSpec(MarginalFamily::gamma(1.0, 1.0), 1.0, 0.75, 100);
    const SimulationPlan plan(spec);
    const auto values = run_replications(20000, 777, 1, [&](RngStream& rng, std::int64_t r) {
        return plan.simulate(3, rng, static_cast<std::uint64_t>(r)).values.back();
    });
    const Estimate k2 = k_statistics(values, 2);
    CHECK(k2.value == Catch::Approx(covariance_R(0.0, spec).value).margin(4.0 * k2.stderror));
}
