// supou: experiment runner for superpositions of Ornstein-Uhlenbeck type
// processes. Subcommands execute a JSON experiment config and write CSV
// results plus a JSON manifest.

#include <CLI11.hpp>

#include "supou/experiment.hpp"
#include "supou/version.hpp"

int main(int argc, char** argv) {
    CLI::App app{"supOU cumulant, scaling and intermittency experiments"};
    app.set_version_flag("--version", supou::version_string);
    app.require_subcommand(1);

    static const char* kinds[] = {"cumulants", "covariance", "scaling", "clt", "constants", "simulate"};

    std::string config_path;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int threads = 0;
    bool dump_paths = false;

    for (const char* kind : kinds) {
        auto* sub = app.add_subcommand(kind, std::string("run a ") + kind + " experiment config");
        sub->add_option("--config", config_path, "experiment config (JSON)")->required();
        sub->add_option("--out", out_dir, "output directory (default: config's out_dir or '.')");
        sub->add_option("--seed", seed, "override the config's master_seed")
            ->each([&](const std::string&) { seed_given = true; });
        sub->add_option("--threads", threads, "worker threads (default: hardware)");
        sub->add_flag("--dump-paths", dump_paths, "write full path dumps where supported");
    }

    CLI11_PARSE(app, argc, argv);

    const std::string chosen = app.get_subcommands().front()->get_name();

    supou::RunOverrides overrides;
    if (seed_given) overrides.seed = seed;
    if (!out_dir.empty()) overrides.out_dir = out_dir;
    overrides.threads = threads;
    overrides.dump_paths = dump_paths;
    overrides.expect_experiment = chosen;

    const int code = supou::run_experiment(config_path, overrides);
    if (code != 0) {
        std::fprintf(stderr, "supou %s: failed with exit code %d (see manifest.json)\n",
                     chosen.c_str(), code);
    }
    return code;
}
