#include "wealthfpk/config.hpp"
#include "wealthfpk/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <exception>

using namespace wealthfpk;

int main(int argc, char** argv) {
    CLI::App app{"wealthfpk - numerical laboratory for the wealth Fokker-Planck equation with debts"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    long long seed = -1;

    auto add_common = [&](CLI::App* cmd, bool config_required) {
        cmd->add_option("--config", config_path, "run configuration file (TOML-style)")
            ->required(config_required);
        cmd->add_option("--out", out_dir, "output directory (overrides run.out_dir)");
        cmd->add_option("--seed", seed, "RNG seed (overrides run.seed)");
    };

    auto* eq = app.add_subcommand("equilibrium", "write the closed-form equilibrium and its summary");
    add_common(eq, false);
    double eq_lambda = 1.0, eq_sigma = 1.0;
    eq->add_option("--lambda", eq_lambda, "drift strength (used when no --config is given)");
    eq->add_option("--sigma", eq_sigma, "diffusion strength (used when no --config is given)");

    auto* sv = app.add_subcommand("solve", "run the PDE solver and the invariant report");
    add_common(sv, true);

    auto* dc = app.add_subcommand("decay", "record metric/entropy decay and fit rates");
    add_common(dc, true);
    std::vector<double> s_list, alpha_list;
    dc->add_option("--s", s_list, "orders s for the D_{s,2} decay sweep");
    dc->add_option("--alpha", alpha_list, "mixing weights for the entropy monitors");

    auto* cv = app.add_subcommand("crossval", "cross-validate the PDE against the particle ensemble");
    add_common(cv, true);
    std::size_t n_particles = 1000000;
    cv->add_option("--n", n_particles, "ensemble size")->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try {
        RunConfig cfg;
        if (!config_path.empty())
            cfg = load_config(config_path);
        else if (app.got_subcommand(eq))
            cfg.params = make_params(eq_lambda, eq_sigma);
        if (!out_dir.empty())
            cfg.out_dir = out_dir;
        if (seed >= 0)
            cfg.seed = static_cast<std::uint64_t>(seed);

        if (app.got_subcommand(eq))
            return cli::cmd_equilibrium(cfg);
        if (app.got_subcommand(sv))
            return cli::cmd_solve(cfg);
        if (app.got_subcommand(dc))
            return cli::cmd_decay(cfg, s_list, alpha_list);
        if (app.got_subcommand(cv))
            return cli::cmd_crossval(cfg, n_particles);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
