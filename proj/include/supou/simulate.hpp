#ifndef SUPOU_SIMULATE_HPP
#define SUPOU_SIMULATE_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <type_traits>
#include <utility>
#include <vector>

#include "supou/analytics.hpp"
#include "supou/marginals.hpp"
#include "supou/parallel.hpp"
#include "supou/rng.hpp"

namespace supou {

// One OU component: marginal law (already carrying its component-scale
// convolution parameter) and mean-reversion rate.
struct Component {
    MarginalFamily family;
    double lambda;
};

inline std::vector<Component> components_of(const SupouSpec& spec) {
    std::vector<Component> out;
    out.reserve(static_cast<std::size_t>(spec.k_max()));
    for (std::int64_t k = 1; k <= spec.k_max(); ++k)
        out.push_back(Component{spec.family().with_delta_like(spec.delta_k(k)), spec.lambda_k(k)});
    return out;
}

// Exactness predicates. TS needs kappa = 1/2 (where it coincides with IG) for
// an exact stationary draw; the innovation law W with cgf k(u) - k(rho u) has
// an exact sampler only for Gamma (compound Poisson).
inline bool has_exact_stationary_sampler(const MarginalFamily& f) {
    return !(f.kind() == FamilyKind::TemperedStable && f.params()[0] != 0.5);
}

inline bool has_exact_innovation_sampler(const MarginalFamily& f) {
    return f.kind() == FamilyKind::Gamma;
}

// One draw from the stationary marginal law.
inline double sample_stationary(const MarginalFamily& f, RngStream& rng) {
    const auto& p = f.params();
    switch (f.kind()) {
        case FamilyKind::Gamma:
            return sample_gamma(rng, p[0], p[1]);
        case FamilyKind::InverseGaussian:
            return sample_inverse_gaussian(rng, p[0], p[1]);
        case FamilyKind::VarianceGamma: {
            // gamma-subordinated normal: X = mu + beta V + sqrt(V) Z,
            // V ~ Gamma(2 kappa, gamma^2/2)
            const double kappa = p[0], alpha = p[1], beta = p[2], mu = p[3];
            const double v = sample_gamma(rng, 2.0 * kappa, (alpha * alpha - beta * beta) / 2.0);
            return mu + beta * v + std::sqrt(v) * rng.next_gaussian();
        }
        case FamilyKind::NormalInverseGaussian: {
            // IG-subordinated normal: V ~ IG(delta, gamma)
            const double alpha = p[0], beta = p[1], delta = p[2], mu = p[3];
            const double gamma = std::sqrt(alpha * alpha - beta * beta);
            const double v = sample_inverse_gaussian(rng, delta, gamma);
            return mu + beta * v + std::sqrt(v) * rng.next_gaussian();
        }
        case FamilyKind::TemperedStable: {
            const double kappa = p[0], delta = p[1], gamma = p[2];
            if (kappa == 0.5) return sample_inverse_gaussian(rng, delta, gamma);
            // exponential tilting of a Kanter positive-stable draw; acceptance
            // rate exp(-delta gamma), so this degrades for large delta*gamma
            const double scale = 2.0 * std::pow(delta, 1.0 / kappa);
            const double theta = std::pow(gamma, 1.0 / kappa) / 2.0;
            for (long it = 0; it < 100000000L; ++it) {
                const double s = scale * sample_positive_stable(rng, kappa);
                if (std::log(rng.next_double_pos()) < -theta * s) return s;
            }
            throw std::runtime_error("sample_stationary: tempered stable rejection did not accept");
        }
    }
    throw std::logic_error("sample_stationary: unreachable");
}

namespace detail {

// Per-component sampling plan, precomputed once and shared (read-only) by all
// replications.
struct ComponentPlan {
    double lambda = 0.0;
    double rho = 0.0;
    double mean = 0.0;           // stationary mean
    bool exact_innovation = false;
    // Gamma compound-Poisson innovation: N ~ Poisson(alpha lambda),
    // W = sum_i exp(-lambda U_i) J_i, J_i ~ Exp(beta)
    double pois_mean = 0.0;
    double beta = 0.0;
    // surrogate innovation (non-Gamma): shifted gamma matched to the first
    // three innovation cumulants, or a normal when the third vanishes
    bool gaussian_surrogate = false;
    double sg_shift = 0.0;
    double sg_scale = 0.0;
    double sg_shape = 0.0;
    double g_mean = 0.0;
    double g_sd = 0.0;
    // stationary draw
    MarginalFamily family;
    explicit ComponentPlan(MarginalFamily f) : family(std::move(f)) {}
};

inline ComponentPlan make_component_plan(const Component& c) {
    ComponentPlan plan(c.family);
    plan.lambda = c.lambda;
    plan.rho = std::exp(-c.lambda);
    plan.mean = mean_value(c.family);
    plan.exact_innovation = has_exact_innovation_sampler(c.family);
    if (plan.exact_innovation) {
        plan.pois_mean = c.family.params()[0] * c.lambda;  // alpha * ln(1/rho)
        plan.beta = c.family.params()[1];
        return plan;
    }
    // innovation cumulants: kappa_1 = (1-rho) mean, kappa_m = kappa_m(X)(1-rho^m)
    const double k1 = -std::expm1(-c.lambda) * plan.mean;
    const double k2 = cumulant(c.family, 2) * (-std::expm1(-2.0 * c.lambda));
    const double k3 = cumulant(c.family, 3) * (-std::expm1(-3.0 * c.lambda));
    if (std::fabs(k3) < 1e-12 * std::pow(k2, 1.5)) {
        plan.gaussian_surrogate = true;
        plan.g_mean = k1;
        plan.g_sd = std::sqrt(k2);
    } else {
        plan.sg_scale = k3 / (2.0 * k2);
        plan.sg_shape = k2 / (plan.sg_scale * plan.sg_scale);
        plan.sg_shift = k1 - plan.sg_shape * plan.sg_scale;
    }
    return plan;
}

inline double sample_innovation_from_plan(const ComponentPlan& plan, RngStream& rng) {
    if (plan.exact_innovation) {
        const long jumps = sample_poisson(rng, plan.pois_mean);
        double w = 0.0;
        for (long i = 0; i < jumps; ++i) {
            const double u = rng.next_double();
            w += std::exp(-plan.lambda * u) * sample_exponential(rng, plan.beta);
        }
        return w;
    }
    if (plan.gaussian_surrogate) return plan.g_mean + plan.g_sd * rng.next_gaussian();
    return plan.sg_shift + plan.sg_scale * sample_gamma(rng, plan.sg_shape, 1.0);
}

} // namespace detail

// One draw of the innovation W with cgf kappa(u) - kappa(rho u). Exact
// (compound Poisson) for Gamma; for the other families a surrogate matched to
// the first three innovation cumulants, flagged by has_exact_innovation_sampler.
inline double sample_innovation(const MarginalFamily& f, double rho, RngStream& rng) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::invalid_argument("sample_innovation: rho in (0,1) required");
    const auto plan = detail::make_component_plan(Component{f, -std::log(rho)});
    return detail::sample_innovation_from_plan(plan, rng);
}

struct PathSample {
    std::vector<double> values;                // X(1..n), 0-based storage
    std::vector<double> centered_partial_sums; // S(i) - E S(i)
    std::uint64_t replication_id = 0;
    double mean = 0.0;                         // analytic E X(i), used for centering
    bool approximate = false;                  // any component used a surrogate sampler
};

// Shared, read-only simulation plan for repeated replications.
class SimulationPlan {
public:
    explicit SimulationPlan(const std::vector<Component>& components) {
        plans_.reserve(components.size());
        for (const auto& c : components) {
            if (!(c.lambda > 0.0)) throw std::invalid_argument("simulate: component lambda > 0 required");
            plans_.push_back(detail::make_component_plan(c));
            mean_ += plans_.back().mean;
            approximate_ = approximate_ || !has_exact_stationary_sampler(c.family) ||
                           !has_exact_innovation_sampler(c.family);
        }
        if (plans_.empty()) throw std::invalid_argument("simulate: at least one component required");
    }
    explicit SimulationPlan(const SupouSpec& spec) : SimulationPlan(components_of(spec)) {}

    double mean() const { return mean_; }
    bool approximate() const { return approximate_; }
    std::size_t component_count() const { return plans_.size(); }

    PathSample simulate(std::int64_t n, RngStream& rng, std::uint64_t replication_id = 0) const {
        if (n < 1) throw std::invalid_argument("simulate: n >= 1 required");
        PathSample out;
        out.replication_id = replication_id;
        out.mean = mean_;
        out.approximate = approximate_;
        out.values.assign(static_cast<std::size_t>(n), 0.0);
        for (const auto& plan : plans_) {
            double x = sample_stationary(plan.family, rng);
            for (std::size_t i = 0; i < out.values.size(); ++i) {
                x = plan.rho * x + detail::sample_innovation_from_plan(plan, rng);
                out.values[i] += x;
            }
        }
        out.centered_partial_sums.resize(out.values.size());
        double s = 0.0;
        for (std::size_t i = 0; i < out.values.size(); ++i) {
            s += out.values[i] - mean_;
            out.centered_partial_sums[i] = s;
        }
        return out;
    }

private:
    std::vector<detail::ComponentPlan> plans_;
    double mean_ = 0.0;
    bool approximate_ = false;
};

inline PathSample simulate_superposition(const std::vector<Component>& components, std::int64_t n,
                                         RngStream& rng) {
    return SimulationPlan(components).simulate(n, rng);
}

inline PathSample simulate_superposition(const SupouSpec& spec, std::int64_t n, RngStream& rng) {
    return SimulationPlan(spec).simulate(n, rng);
}

// R independent replications; replication r draws from RngStream(master_seed, r)
// and writes into slot r, so the ensemble is identical at any thread count.
template <class Fn>
auto run_replications(std::int64_t R, std::uint64_t master_seed, int threads, Fn&& fn)
    -> std::vector<std::invoke_result_t<Fn&, RngStream&, std::int64_t>> {
    using T = std::invoke_result_t<Fn&, RngStream&, std::int64_t>;
    if (R < 1) throw std::invalid_argument("run_replications: R >= 1 required");
    std::vector<T> out(static_cast<std::size_t>(R));
    parallel_chunks(R, 1, threads, [&](std::int64_t, std::int64_t b, std::int64_t e) {
        for (std::int64_t r = b; r < e; ++r) {
            RngStream rng(master_seed, static_cast<std::uint64_t>(r));
            out[static_cast<std::size_t>(r)] = fn(rng, r);
        }
    });
    return out;
}

// Terminal centered partial sums S(n) - E S(n) across R replications.
inline std::vector<double> replicate_terminal_sums(const SimulationPlan& plan, std::int64_t n,
                                                   std::int64_t R, std::uint64_t master_seed,
                                                   int threads = 1) {
    return run_replications(R, master_seed, threads, [&](RngStream& rng, std::int64_t r) {
        return plan.simulate(n, rng, static_cast<std::uint64_t>(r)).centered_partial_sums.back();
    });
}

} // namespace supou

#endif // SUPOU_SIMULATE_HPP
