#ifndef SUPOU_EXPERIMENT_HPP
#define SUPOU_EXPERIMENT_HPP

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "supou/analytics.hpp"
#include "supou/csv.hpp"
#include "supou/estimate.hpp"
#include "supou/marginals.hpp"
#include "supou/simulate.hpp"
#include "supou/version.hpp"

namespace supou {

using ordered_json = nlohmann::ordered_json;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ToleranceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    int threads = 0;  // 0: hardware concurrency
    bool dump_paths = false;
    std::string expect_experiment;  // subcommand cross-check, empty to skip
};

// ---------------------------------------------------------------------------
// Strict config schema: unknown keys anywhere are an error, so a typo in an
// H/lambda sweep cannot silently fall back to a default.
// ---------------------------------------------------------------------------

namespace detail {

inline void check_keys(const ordered_json& j, const std::set<std::string>& allowed,
                       const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& item : j.items())
        if (!allowed.count(item.key()))
            throw ConfigError(where + ": unknown key '" + item.key() + "'");
}

inline double require_number(const ordered_json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    if (!j.at(key).is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    return j.at(key).get<double>();
}

inline std::int64_t require_integer(const ordered_json& j, const std::string& key,
                                    const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    if (!j.at(key).is_number_integer()) throw ConfigError(where + ": '" + key + "' must be an integer");
    return j.at(key).get<std::int64_t>();
}

} // namespace detail

inline MarginalFamily parse_family(const ordered_json& j) {
    using detail::check_keys;
    using detail::require_number;
    if (!j.contains("kind")) throw ConfigError("family: missing key 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    try {
        if (kind == "gamma") {
            check_keys(j, {"kind", "alpha", "beta"}, "family");
            return MarginalFamily::gamma(require_number(j, "alpha", "family"),
                                         require_number(j, "beta", "family"));
        }
        if (kind == "ig") {
            check_keys(j, {"kind", "delta", "gamma"}, "family");
            return MarginalFamily::inverse_gaussian(require_number(j, "delta", "family"),
                                                    require_number(j, "gamma", "family"));
        }
        if (kind == "vg") {
            check_keys(j, {"kind", "kappa", "alpha", "beta", "mu"}, "family");
            return MarginalFamily::variance_gamma(
                require_number(j, "kappa", "family"), require_number(j, "alpha", "family"),
                require_number(j, "beta", "family"), require_number(j, "mu", "family"));
        }
        if (kind == "nig") {
            check_keys(j, {"kind", "alpha", "beta", "delta", "mu"}, "family");
            return MarginalFamily::normal_inverse_gaussian(
                require_number(j, "alpha", "family"), require_number(j, "beta", "family"),
                require_number(j, "delta", "family"), require_number(j, "mu", "family"));
        }
        if (kind == "ts") {
            check_keys(j, {"kind", "kappa", "delta", "gamma"}, "family");
            return MarginalFamily::tempered_stable(require_number(j, "kappa", "family"),
                                                   require_number(j, "delta", "family"),
                                                   require_number(j, "gamma", "family"));
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    throw ConfigError("family: unknown kind '" + kind + "'");
}

inline SupouSpec parse_spec(const ordered_json& j) {
    detail::check_keys(j, {"family", "lambda", "hurst", "k_max"}, "spec");
    if (!j.contains("family")) throw ConfigError("spec: missing key 'family'");
    MarginalFamily family = parse_family(j.at("family"));
    try {
        return SupouSpec(std::move(family), detail::require_number(j, "lambda", "spec"),
                         detail::require_number(j, "hurst", "spec"),
                         detail::require_integer(j, "k_max", "spec"));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
}

struct ExperimentConfig {
    std::string experiment;
    ordered_json raw;  // verbatim echo for the manifest
    std::optional<SupouSpec> spec;
    std::optional<MarginalFamily> family;  // constants experiment
    std::vector<std::int64_t> horizons;
    std::vector<int> orders;
    std::vector<double> q_list;
    std::vector<double> t_grid;
    std::vector<double> hurst_grid;
    std::int64_t n = 0;
    std::int64_t replications = 0;
    std::uint64_t master_seed = 0;
    std::int64_t k_max_factor = 0;  // cumulants: k_max = factor * n when > 0
    std::int64_t qmc_points = 1 << 17;
    double tolerance = 1e-4;
    bool dump_paths = false;
    bool use_exact_moments = false;
    std::string out_dir;
};

inline ExperimentConfig parse_config(const ordered_json& j) {
    using detail::check_keys;
    using detail::require_integer;
    ExperimentConfig cfg;
    cfg.raw = j;
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    if (!j.contains("experiment")) throw ConfigError("config: missing key 'experiment'");
    cfg.experiment = j.at("experiment").get<std::string>();

    auto read_int_list = [&](const char* key, std::vector<std::int64_t>& out, std::int64_t lo) {
        if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
        for (const auto& v : j.at(key)) {
            if (!v.is_number_integer()) throw ConfigError(std::string(key) + ": integer entries required");
            const std::int64_t x = v.get<std::int64_t>();
            if (x < lo) throw ConfigError(std::string(key) + ": entries must be >= " + std::to_string(lo));
            out.push_back(x);
        }
        if (out.empty()) throw ConfigError(std::string(key) + ": must be non-empty");
    };
    auto read_double_list = [&](const char* key, std::vector<double>& out) {
        if (!j.contains(key)) throw ConfigError(std::string("config: missing key '") + key + "'");
        for (const auto& v : j.at(key)) {
            if (!v.is_number()) throw ConfigError(std::string(key) + ": numeric entries required");
            out.push_back(v.get<double>());
        }
        if (out.empty()) throw ConfigError(std::string(key) + ": must be non-empty");
    };
    auto opt_seed = [&]() {
        if (j.contains("master_seed")) {
            if (!j.at("master_seed").is_number_unsigned() && !j.at("master_seed").is_number_integer())
                throw ConfigError("master_seed: unsigned integer required");
            cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
        }
    };
    auto opt_out_dir = [&]() {
        if (j.contains("out_dir")) cfg.out_dir = j.at("out_dir").get<std::string>();
    };

    if (cfg.experiment == "cumulants") {
        check_keys(j, {"experiment", "spec", "horizons", "orders", "k_max_factor", "qmc_points", "out_dir"},
                   "config");
        cfg.spec = parse_spec(j.at("spec"));
        read_int_list("horizons", cfg.horizons, 1);
        std::vector<std::int64_t> tmp;
        read_int_list("orders", tmp, 2);
        for (auto m : tmp) {
            if (m > 6) throw ConfigError("orders: entries must be in 2..6");
            cfg.orders.push_back(static_cast<int>(m));
        }
        if (j.contains("k_max_factor")) cfg.k_max_factor = require_integer(j, "k_max_factor", "config");
        if (j.contains("qmc_points")) cfg.qmc_points = require_integer(j, "qmc_points", "config");
        opt_out_dir();
    } else if (cfg.experiment == "covariance") {
        check_keys(j, {"experiment", "spec", "t_grid", "out_dir"}, "config");
        cfg.spec = parse_spec(j.at("spec"));
        read_double_list("t_grid", cfg.t_grid);
        for (double t : cfg.t_grid)
            if (t < 0.0) throw ConfigError("t_grid: entries must be >= 0");
        opt_out_dir();
    } else if (cfg.experiment == "scaling") {
        check_keys(j,
                   {"experiment", "spec", "horizons", "q", "replications", "master_seed",
                    "use_exact_moments", "k_max_factor", "out_dir"},
                   "config");
        cfg.spec = parse_spec(j.at("spec"));
        read_int_list("horizons", cfg.horizons, 1);
        read_double_list("q", cfg.q_list);
        for (double q : cfg.q_list)
            if (!(q > 0.0)) throw ConfigError("q: entries must be positive");
        if (j.contains("use_exact_moments")) cfg.use_exact_moments = j.at("use_exact_moments").get<bool>();
        if (j.contains("k_max_factor")) cfg.k_max_factor = require_integer(j, "k_max_factor", "config");
        if (!cfg.use_exact_moments) {
            cfg.replications = require_integer(j, "replications", "config");
            if (cfg.replications < 1) throw ConfigError("replications: must be >= 1");
            if (!j.contains("master_seed")) throw ConfigError("config: missing key 'master_seed'");
        } else if (j.contains("replications")) {
            cfg.replications = require_integer(j, "replications", "config");
        }
        opt_seed();
        opt_out_dir();
    } else if (cfg.experiment == "clt") {
        check_keys(j, {"experiment", "spec", "n", "replications", "master_seed", "out_dir"}, "config");
        cfg.spec = parse_spec(j.at("spec"));
        cfg.n = require_integer(j, "n", "config");
        if (cfg.n < 1) throw ConfigError("n: must be >= 1");
        cfg.replications = require_integer(j, "replications", "config");
        if (cfg.replications < 500) throw ConfigError("replications: clt needs at least 500");
        if (!j.contains("master_seed")) throw ConfigError("config: missing key 'master_seed'");
        opt_seed();
        opt_out_dir();
    } else if (cfg.experiment == "constants") {
        check_keys(j, {"experiment", "family", "orders", "hurst_grid", "tolerance", "qmc_points", "out_dir"},
                   "config");
        if (!j.contains("family")) throw ConfigError("config: missing key 'family'");
        cfg.family = parse_family(j.at("family"));
        std::vector<std::int64_t> tmp;
        read_int_list("orders", tmp, 2);
        for (auto m : tmp) {
            if (m > 6) throw ConfigError("orders: entries must be in 2..6");
            cfg.orders.push_back(static_cast<int>(m));
        }
        read_double_list("hurst_grid", cfg.hurst_grid);
        for (double h : cfg.hurst_grid)
            if (!(h > 0.5 && h < 1.0)) throw ConfigError("hurst out of (0.5,1)");
        if (j.contains("tolerance")) cfg.tolerance = j.at("tolerance").get<double>();
        if (j.contains("qmc_points")) cfg.qmc_points = require_integer(j, "qmc_points", "config");
        opt_out_dir();
    } else if (cfg.experiment == "simulate") {
        check_keys(j, {"experiment", "spec", "n", "replications", "master_seed", "dump_paths", "out_dir"},
                   "config");
        cfg.spec = parse_spec(j.at("spec"));
        cfg.n = require_integer(j, "n", "config");
        if (cfg.n < 1) throw ConfigError("n: must be >= 1");
        cfg.replications = require_integer(j, "replications", "config");
        if (cfg.replications < 1) throw ConfigError("replications: must be >= 1");
        if (!j.contains("master_seed")) throw ConfigError("config: missing key 'master_seed'");
        if (j.contains("dump_paths")) cfg.dump_paths = j.at("dump_paths").get<bool>();
        opt_seed();
        opt_out_dir();
    } else {
        throw ConfigError("config: unknown experiment '" + cfg.experiment + "'");
    }
    return cfg;
}

// ---------------------------------------------------------------------------
// Runners
// ---------------------------------------------------------------------------

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

struct RunOutputs {
    std::vector<std::string> files;
    ordered_json diagnostics = ordered_json::object();
};

inline void emit_plot_cumulants(const std::filesystem::path& dir, const CumulantReport& report,
                                RunOutputs& outputs) {
    for (int m : report.orders) {
        const std::string name = "plot_cumulants_m" + std::to_string(m) + ".csv";
        CsvWriter w((dir / name).string(), {"n", "value", "stderr", "theory_value"});
        for (const auto& row : report.rows)
            if (row.m == m) w.row() << row.n << row.ratio << 0.0 << 1.0;
        outputs.files.push_back(name);
    }
}

inline RunOutputs run_cumulants(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                                int threads) {
    RunOutputs outputs;
    std::vector<std::pair<std::int64_t, SupouSpec>> specs_by_n;
    for (std::int64_t n : cfg.horizons) {
        const SupouSpec spec = cfg.k_max_factor > 0 ? cfg.spec->with_k_max(cfg.k_max_factor * n)
                                                    : *cfg.spec;
        specs_by_n.emplace_back(n, spec);
    }
    DmOptions dm_opts;
    dm_opts.points = cfg.qmc_points;
    const CumulantReport report = make_cumulant_report(specs_by_n, cfg.orders, threads, dm_opts);
    {
        CsvWriter w((dir / "cumulants_results.csv").string(),
                    {"m", "n", "exact", "tail_bound", "asymptotic", "ratio"});
        for (const auto& row : report.rows)
            w.row() << row.m << row.n << row.exact << row.tail << row.asymptotic << row.ratio;
        outputs.files.push_back("cumulants_results.csv");
    }
    double max_tail_ratio = 0.0;
    for (const auto& row : report.rows)
        if (row.exact != 0.0) max_tail_ratio = std::max(max_tail_ratio, std::fabs(row.tail / row.exact));
    outputs.diagnostics["max_tail_over_exact"] = max_tail_ratio;
    emit_plot_cumulants(dir, report, outputs);
    return outputs;
}

inline RunOutputs run_covariance(const ExperimentConfig& cfg, const std::filesystem::path& dir, int) {
    RunOutputs outputs;
    CsvWriter w((dir / "covariance_results.csv").string(),
                {"t", "covariance", "tail_bound", "lstar", "lstar_tail"});
    double max_tail = 0.0;
    for (double t : cfg.t_grid) {
        const TailValue r = covariance_R(t, *cfg.spec);
        if (t > 0.0) {
            const TailValue l = slowly_varying_lstar(t, *cfg.spec);
            w.row() << t << r.value << r.tail << l.value << l.tail;
        } else {
            w.row() << t << r.value << r.tail << 0.0 << 0.0;
        }
        if (r.value != 0.0) max_tail = std::max(max_tail, std::fabs(r.tail / r.value));
    }
    outputs.files.push_back("covariance_results.csv");
    outputs.diagnostics["max_tail_over_value"] = max_tail;
    return outputs;
}

// Even-order absolute moments from exact cumulants (centered, so odd
// moment-cumulant terms with kappa_1 vanish).
inline double exact_even_moment(const SupouSpec& spec, int q, std::int64_t n, int threads) {
    if (q == 2) return exact_cumulant(spec, 2, n, threads).total();
    if (q == 4) {
        const auto k = exact_cumulant_multi(spec, {2, 4}, n, threads);
        const double k2 = k[0].total(), k4 = k[1].total();
        return k4 + 3.0 * k2 * k2;
    }
    if (q == 6) {
        const auto k = exact_cumulant_multi(spec, {2, 3, 4, 6}, n, threads);
        const double k2 = k[0].total(), k3 = k[1].total(), k4 = k[2].total(), k6 = k[3].total();
        return k6 + 15.0 * k4 * k2 + 10.0 * k3 * k3 + 15.0 * k2 * k2 * k2;
    }
    throw ConfigError("use_exact_moments: q must be one of 2, 4, 6");
}

inline RunOutputs run_scaling(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                              int threads) {
    RunOutputs outputs;
    std::vector<std::int64_t> horizons = cfg.horizons;
    std::sort(horizons.begin(), horizons.end());
    horizons.erase(std::unique(horizons.begin(), horizons.end()), horizons.end());

    std::vector<double> qs = cfg.q_list;
    std::sort(qs.begin(), qs.end());

    // moments[q_index][horizon_index]
    std::vector<std::vector<Estimate>> moments(qs.size(),
                                               std::vector<Estimate>(horizons.size()));
    if (cfg.use_exact_moments) {
        for (std::size_t qi = 0; qi < qs.size(); ++qi) {
            const double qd = qs[qi];
            const int q = static_cast<int>(qd);
            if (static_cast<double>(q) != qd) throw ConfigError("use_exact_moments: q must be an even integer");
            for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
                const SupouSpec spec = cfg.k_max_factor > 0
                                           ? cfg.spec->with_k_max(cfg.k_max_factor * horizons[hi])
                                           : *cfg.spec;
                moments[qi][hi] = Estimate{exact_even_moment(spec, q, horizons[hi], threads), 0.0};
            }
        }
    } else {
        const SimulationPlan plan(*cfg.spec);
        const std::int64_t n_max = horizons.back();
        const auto ensembles = run_replications(
            cfg.replications, cfg.master_seed, threads, [&](RngStream& rng, std::int64_t r) {
                const PathSample path = plan.simulate(n_max, rng, static_cast<std::uint64_t>(r));
                std::vector<double> at_horizons(horizons.size());
                for (std::size_t hi = 0; hi < horizons.size(); ++hi)
                    at_horizons[hi] =
                        path.centered_partial_sums[static_cast<std::size_t>(horizons[hi] - 1)];
                return at_horizons;
            });
        std::vector<double> column(static_cast<std::size_t>(cfg.replications));
        for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
            for (std::size_t r = 0; r < column.size(); ++r) column[r] = ensembles[r][hi];
            for (std::size_t qi = 0; qi < qs.size(); ++qi)
                moments[qi][hi] = empirical_abs_moment(column, qs[qi]);
        }
        outputs.diagnostics["approximate_samplers"] = plan.approximate();
    }

    CsvWriter w((dir / "scaling_results.csv").string(),
                {"q", "n", "moment", "stderr", "log_n", "log_moment"});
    std::vector<ScalingFit> fits;
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
        std::vector<std::pair<std::int64_t, Estimate>> pts;
        for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
            pts.emplace_back(horizons[hi], moments[qi][hi]);
            w.row() << qs[qi] << horizons[hi] << moments[qi][hi].value << moments[qi][hi].stderror
                    << std::log(static_cast<double>(horizons[hi])) << std::log(moments[qi][hi].value);
        }
        try {
            fits.push_back(fit_scaling(pts, qs[qi]));
        } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what());
        }
    }
    outputs.files.push_back("scaling_results.csv");

    ordered_json jfits = ordered_json::array();
    for (const auto& fit : fits) {
        ordered_json jf;
        jf["q"] = fit.q;
        jf["tau_hat"] = fit.slope;
        jf["intercept"] = fit.intercept;
        jf["slope_se"] = fit.slope_se;
        jf["r_squared"] = fit.r_squared;
        jfits.push_back(jf);
    }
    ordered_json report;
    report["fits"] = jfits;
    if (fits.size() >= 2) {
        const IntermittencyVerdict v = intermittency_check(fits.front(), fits.back());
        ordered_json jv;
        jv["p"] = v.p;
        jv["r"] = v.r;
        jv["tau_p_over_p"] = v.ratio_p;
        jv["tau_r_over_r"] = v.ratio_r;
        jv["difference"] = v.difference;
        jv["stderror"] = v.stderror;
        jv["verdict"] = verdict_name(v.verdict);
        report["verdict"] = jv;
        outputs.diagnostics["verdict"] = verdict_name(v.verdict);
    }
    {
        std::ofstream jf((dir / "scaling_fits.json").string(), std::ios::binary);
        jf << report.dump(2) << '\n';
        outputs.files.push_back("scaling_fits.json");
    }

    // one plot file per q: log-log moment curve with the even-order theory line
    // anchored at the first horizon
    for (std::size_t qi = 0; qi < qs.size(); ++qi) {
        const std::string name = "plot_scaling_q" + format_double(qs[qi]) + ".csv";
        CsvWriter pw((dir / name).string(), {"n", "value", "stderr", "theory_value"});
        const int qint = static_cast<int>(qs[qi]);
        const bool even = static_cast<double>(qint) == qs[qi] && qint % 2 == 0 && qint >= 2;
        const double anchor = std::log(moments[qi][0].value);
        for (std::size_t hi = 0; hi < horizons.size(); ++hi) {
            const double log_n = std::log(static_cast<double>(horizons[hi]));
            const double log_n0 = std::log(static_cast<double>(horizons[0]));
            const double theory =
                even ? anchor + theoretical_tau(qint, cfg.spec->hurst()) * (log_n - log_n0)
                     : fits[qi].intercept + fits[qi].slope * log_n;
            const double rel_se = moments[qi][hi].stderror / moments[qi][hi].value;
            pw.row() << horizons[hi] << std::log(moments[qi][hi].value) << rel_se << theory;
        }
        outputs.files.push_back(name);
    }
    return outputs;
}

inline RunOutputs run_clt(const ExperimentConfig& cfg, const std::filesystem::path& dir, int threads) {
    RunOutputs outputs;
    const SimulationPlan plan(*cfg.spec);
    std::vector<std::pair<double, double>> components;
    for (std::int64_t k = 1; k <= cfg.spec->k_max(); ++k)
        components.emplace_back(cfg.spec->unit_cumulant(2) * cfg.spec->delta_k(k),
                                cfg.spec->lambda_k(k));
    const CltNorming norming = clt_norming(components, cfg.n);
    const double scale = norming.c_exact * std::sqrt(static_cast<double>(cfg.n));

    std::vector<double> samples =
        replicate_terminal_sums(plan, cfg.n, cfg.replications, cfg.master_seed, threads);
    for (double& s : samples) s /= scale;
    const NormalityReport rep = normality_diagnostics(samples, cfg.master_seed ^ 0x424f4f54ULL);
    const double crit = ks_critical_value(samples.size(), 0.01);

    {
        CsvWriter w((dir / "clt_results.csv").string(),
                    {"n", "replications", "skewness", "skew_lo", "skew_hi", "excess_kurtosis",
                     "kurt_lo", "kurt_hi", "ks_distance", "ks_lo", "ks_hi", "ks_crit_1pct",
                     "c_exact", "c_paper"});
        w.row() << cfg.n << cfg.replications << rep.skewness << rep.skewness_ci.lo
                << rep.skewness_ci.hi << rep.excess_kurtosis << rep.excess_kurtosis_ci.lo
                << rep.excess_kurtosis_ci.hi << rep.ks_distance << rep.ks_ci.lo << rep.ks_ci.hi
                << crit << norming.c_exact << norming.c_paper;
        outputs.files.push_back("clt_results.csv");
    }
    ordered_json jr;
    jr["n"] = cfg.n;
    jr["replications"] = cfg.replications;
    jr["skewness"] = rep.skewness;
    jr["excess_kurtosis"] = rep.excess_kurtosis;
    jr["ks_distance"] = rep.ks_distance;
    jr["ks_critical_1pct"] = crit;
    jr["c_exact"] = norming.c_exact;
    jr["c_paper"] = norming.c_paper;
    jr["normal_at_1pct"] = rep.ks_distance < crit;
    {
        std::ofstream jf((dir / "clt_report.json").string(), std::ios::binary);
        jf << jr.dump(2) << '\n';
        outputs.files.push_back("clt_report.json");
    }
    outputs.diagnostics["normal_at_1pct"] = rep.ks_distance < crit;
    return outputs;
}

inline RunOutputs run_constants(const ExperimentConfig& cfg, const std::filesystem::path& dir, int) {
    RunOutputs outputs;
    DmOptions opts;
    opts.points = cfg.qmc_points;
    opts.tolerance = cfg.tolerance;
    bool all_converged = true;
    CsvWriter w((dir / "constants_results.csv").string(),
                {"m", "hurst", "d_one", "d_two", "total", "error", "converged"});
    for (int m : cfg.orders) {
        for (double h : cfg.hurst_grid) {
            const DmResult d = asymptotic_constant_D(m, h, *cfg.family, opts);
            w.row() << m << h << d.part_one << d.part_two << d.total
                    << (d.error_one + d.error_two) << (d.converged ? 1 : 0);
            all_converged = all_converged && d.converged;
        }
    }
    outputs.files.push_back("constants_results.csv");
    outputs.diagnostics["all_converged"] = all_converged;
    if (!all_converged)
        throw ToleranceError("constants: quadrature error estimate above requested tolerance");
    return outputs;
}

inline RunOutputs run_simulate(const ExperimentConfig& cfg, const std::filesystem::path& dir,
                               int threads, bool dump_override) {
    RunOutputs outputs;
    const SimulationPlan plan(*cfg.spec);
    const bool dump = cfg.dump_paths || dump_override;
    if (dump) {
        const auto paths = run_replications(
            cfg.replications, cfg.master_seed, threads,
            [&](RngStream& rng, std::int64_t r) { return plan.simulate(cfg.n, rng, static_cast<std::uint64_t>(r)); });
        CsvWriter w((dir / "simulate_paths.csv").string(),
                    {"replication_id", "i", "x", "s_centered"});
        for (const auto& path : paths)
            for (std::size_t i = 0; i < path.values.size(); ++i)
                w.row() << static_cast<std::int64_t>(path.replication_id)
                        << static_cast<std::int64_t>(i + 1) << path.values[i]
                        << path.centered_partial_sums[i];
        outputs.files.push_back("simulate_paths.csv");
    } else {
        const auto sums = replicate_terminal_sums(plan, cfg.n, cfg.replications, cfg.master_seed, threads);
        CsvWriter w((dir / "simulate_results.csv").string(), {"replication_id", "s_centered"});
        for (std::size_t r = 0; r < sums.size(); ++r)
            w.row() << static_cast<std::int64_t>(r) << sums[r];
        outputs.files.push_back("simulate_results.csv");
    }
    outputs.diagnostics["approximate_samplers"] = plan.approximate();
    outputs.diagnostics["mean"] = plan.mean();
    return outputs;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Golden regression corpus: one row per (spec, m, n) with the exact cumulant
// and its truncation-tail estimate. Fixed format: UTF-8, comma separated,
// '.' decimal, header row.
// ---------------------------------------------------------------------------

struct GoldenRow {
    double hurst = 0.0;
    double lambda = 0.0;
    std::string family;  // kind and parameters, ';'-joined (comma-free)
    int m = 0;
    std::int64_t n = 0;
    double exact = 0.0;
    double tail = 0.0;
};

inline std::string golden_family_label(const MarginalFamily& f) {
    std::string label = family_name(f.kind());
    int count = 4;
    if (f.kind() == FamilyKind::Gamma || f.kind() == FamilyKind::InverseGaussian) count = 2;
    if (f.kind() == FamilyKind::TemperedStable) count = 3;
    for (int i = 0; i < count; ++i) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", f.params()[static_cast<std::size_t>(i)]);
        label += ';';
        label += buf;
    }
    return label;
}

inline void write_cumulant_golden(const std::string& path, const std::vector<GoldenRow>& rows) {
    CsvWriter w(path, {"H", "lambda", "family", "m", "n", "exact_cumulant", "tail_bound"});
    for (const auto& row : rows)
        w.row() << row.hurst << row.lambda << row.family << row.m << row.n << row.exact << row.tail;
}

// Executes a config file; writes results CSVs plus a manifest. Exit codes:
// 0 success, 2 validation failure, 3 a declared tolerance was not met.
inline int run_experiment(const std::string& config_path, const RunOverrides& overrides = {}) {
    const auto t0 = std::chrono::steady_clock::now();
    const int threads = effective_threads(overrides.threads);

    ordered_json manifest;
    manifest["artifact"] = "supou";
    manifest["version"] = version_string;

    std::filesystem::path dir = overrides.out_dir ? std::filesystem::path(*overrides.out_dir)
                                                  : std::filesystem::path(".");
    int exit_code = 0;
    detail::RunOutputs outputs;
    std::string status = "ok";
    std::string reason;
    ordered_json echo;
    std::uint64_t seed = 0;
    std::string experiment = "?";

    try {
        ordered_json j;
        {
            std::ifstream in(config_path, std::ios::binary);
            if (!in) throw ConfigError("config: cannot open " + config_path);
            try {
                in >> j;
            } catch (const nlohmann::json::parse_error& e) {
                throw ConfigError(std::string("config: JSON parse error: ") + e.what());
            }
        }
        ExperimentConfig cfg = parse_config(j);
        echo = cfg.raw;
        experiment = cfg.experiment;
        if (!overrides.expect_experiment.empty() && overrides.expect_experiment != cfg.experiment)
            throw ConfigError("config: experiment '" + cfg.experiment + "' does not match subcommand '" +
                              overrides.expect_experiment + "'");
        if (overrides.seed) cfg.master_seed = *overrides.seed;
        seed = cfg.master_seed;
        if (!overrides.out_dir && !cfg.out_dir.empty()) dir = cfg.out_dir;
        std::filesystem::create_directories(dir);

        if (cfg.experiment == "cumulants") outputs = detail::run_cumulants(cfg, dir, threads);
        else if (cfg.experiment == "covariance") outputs = detail::run_covariance(cfg, dir, threads);
        else if (cfg.experiment == "scaling") outputs = detail::run_scaling(cfg, dir, threads);
        else if (cfg.experiment == "clt") outputs = detail::run_clt(cfg, dir, threads);
        else if (cfg.experiment == "constants") outputs = detail::run_constants(cfg, dir, threads);
        else if (cfg.experiment == "simulate")
            outputs = detail::run_simulate(cfg, dir, threads, overrides.dump_paths);
    } catch (const ToleranceError& e) {
        status = "tolerance_error";
        reason = e.what();
        exit_code = 3;
    } catch (const ConfigError& e) {
        status = "validation_error";
        reason = e.what();
        exit_code = 2;
    } catch (const std::invalid_argument& e) {
        status = "validation_error";
        reason = e.what();
        exit_code = 2;
    } catch (const std::exception& e) {
        status = "error";
        reason = e.what();
        exit_code = 1;
    }

    const auto t1 = std::chrono::steady_clock::now();
    manifest["experiment"] = experiment;
    manifest["status"] = status;
    manifest["reason"] = reason;
    manifest["master_seed"] = seed;
    manifest["threads"] = threads;
    manifest["wall_time_seconds"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(t1 - t0).count() / 1000.0;
    manifest["config_echo"] = echo;
    manifest["outputs"] = outputs.files;
    manifest["diagnostics"] = outputs.diagnostics;

    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream mf((dir / "manifest.json").string(), std::ios::binary);
    if (mf) mf << manifest.dump(2) << '\n';
    return exit_code;
}

} // namespace supou

#endif // SUPOU_EXPERIMENT_HPP
