// Command-line front end: nsfk-cli <subcommand> --config PATH [--out DIR] [--seed N] [--quiet]
#include <CLI11.hpp>
#include <omp.h>

#include <cstdlib>
#include <iostream>
#include <string>

#include "nsfk/pipelines.hpp"

int main(int argc, char** argv)
{
    CLI::App app{"Dissipative-structure toolkit for the 1-D heat-conducting Korteweg system"};
    app.set_version_flag("--version", nsfk::kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir = ".";
    unsigned long long seed = 0;
    bool quiet = false;
    const std::string names[] = {"verify-thermo", "analyze-symbol", "linear-decay", "nonlinear-run"};
    const std::string help[] = {
        "thermodynamic hypotheses and entropy-pair certificate",
        "coupling, symmetrizer, compensating matrix, spectral type and Lyapunov check",
        "exact linear evolution and decay-rate fit",
        "pseudo-spectral nonlinear run with conservation and decay ledger",
    };
    CLI::Option* seed_opt = nullptr;
    for (int i = 0; i < 4; ++i) {
        CLI::App* sub = app.add_subcommand(names[i], help[i]);
        sub->add_option("--config", config_path, "configuration file")->required();
        sub->add_option("--out", out_dir, "output directory (default: current directory)");
        CLI::Option* so = sub->add_option("--seed", seed, "random seed, overrides the config value");
        sub->add_flag("--quiet", quiet, "suppress the text summary on stdout");
        sub->final_callback([&, so] {
            if (so->count()) seed_opt = so;
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? nsfk::kExitPass : nsfk::kExitUsage;
    }

    if (const char* env = std::getenv("NSFK_THREADS")) {
        char* end = nullptr;
        const long n = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || n < 1) {
            std::cerr << "error: NSFK_THREADS must be a positive integer\n";
            return nsfk::kExitUsage;
        }
        omp_set_num_threads(static_cast<int>(n));
    }

    const std::string name = app.get_subcommands().front()->get_name();
    nsfk::RunConfig cfg;
    try {
        cfg = nsfk::load_config(config_path);
        if (seed_opt) cfg.seed = seed;
        nsfk::validate(cfg);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return nsfk::kExitUsage;
    }

    try {
        nsfk::PipelineOptions opt;
        opt.out_dir = out_dir;
        opt.quiet = quiet;
        return nsfk::run_subcommand(name, cfg, opt);
    } catch (const std::exception& e) {
        std::cerr << name << " failed: " << e.what() << "\n";
        return nsfk::kExitCriterion;
    }
}
