#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mflab/commands.hpp"
#include "mflab/errors.hpp"
#include "mflab/execution.hpp"
#include "mflab/version.hpp"

namespace {

constexpr int exit_ok = 0;
constexpr int exit_config = 2;
constexpr int exit_runtime = 3;

void print_cells(const mflab::SimulateSummary& s)
{
    for (const auto& c : s.cells)
    {
        if (c.ok && !c.rows.empty())
            std::printf("N=%zu seed=%llu ok rows=%zu F_N(T)/N^2=%.6g (%.2fs)\n", c.N,
                        static_cast<unsigned long long>(c.seed), c.rows.size(), c.rows.back().F_N_per_N2,
                        c.wall_time);
        else
            std::printf("N=%zu seed=%llu error: %s\n", c.N, static_cast<unsigned long long>(c.seed),
                        c.error.c_str());
    }
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Mean-field limit lab for Coulomb and Riesz particle flows"};
    app.set_version_flag("--version", std::string(mflab::version_string()));
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    bool deterministic = false;
    int threads = 0;
    app.add_option("--config", config_path, "experiment config (dotted keys or JSON)");
    app.add_flag("--deterministic", deterministic, "fixed-order reductions, identical output for any thread count");
    app.add_option("--threads", threads, "worker threads")->envname("MFLAB_THREADS")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");

    auto* simulate = app.add_subcommand("simulate", "particle runs with diagnostics for every (N, seed)");
    auto* pde = app.add_subcommand("pde-solve", "evolve the reference density on its own");
    auto* diagnose = app.add_subcommand("diagnose", "diagnostics of particle CSVs or of the initial states");
    auto* sweep = app.add_subcommand("sweep", "concurrent simulate over all cells, then fit the rate");
    auto* fit = app.add_subcommand("fit-rate", "fit beta, C1, C2 from diagnostics CSVs");
    auto* gap = app.add_subcommand("gap", "weak-strong gap between two evolved densities");
    for (auto* sub : {simulate, pde, diagnose, sweep, fit, gap})
        sub->fallthrough();

    std::vector<std::string> diagnose_inputs, fit_inputs;
    std::optional<double> diagnose_time;
    diagnose->add_option("inputs", diagnose_inputs, "particle CSVs")->check(CLI::ExistingFile);
    diagnose->add_option("--time", diagnose_time, "override the time recorded in the inputs");
    fit->add_option("inputs", fit_inputs, "diagnostics CSVs")->required()->check(CLI::ExistingFile);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::CallForHelp& e)
    {
        return app.exit(e);
    }
    catch (const CLI::CallForVersion& e)
    {
        return app.exit(e);
    }
    catch (const CLI::ParseError& e)
    {
        app.exit(e);
        return exit_config;
    }

    try
    {
        mflab::RunOptions opt;
        opt.deterministic = deterministic;
        opt.threads = threads > 0 ? threads : mflab::threads_from_environment(1);

        if (fit->parsed())
        {
            opt.out = out_dir;
            std::vector<std::filesystem::path> paths(fit_inputs.begin(), fit_inputs.end());
            std::cout << mflab::cmd_fit_rate(paths, opt).dump(2) << '\n';
            return exit_ok;
        }

        if (config_path.empty())
            throw mflab::ConfigError("--config", "this command needs a config file");
        mflab::ExperimentConfig cfg = mflab::load_config(config_path);
        opt.out = out_dir.empty() ? std::filesystem::path(cfg.output_dir) : std::filesystem::path(out_dir);
        std::printf("config %s -> %s\n", mflab::config_hash(cfg).c_str(), opt.out.string().c_str());

        if (simulate->parsed() || sweep->parsed())
        {
            auto s = simulate->parsed() ? mflab::cmd_simulate(cfg, opt) : mflab::cmd_sweep(cfg, opt);
            print_cells(s);
            if (s.fit)
                std::printf("beta_hat=%.4f C1_hat=%.4g C2_hat=%.4g R^2=%.4f%s\n", s.fit->beta_hat, s.fit->C1_hat,
                            s.fit->C2_hat, s.fit->r_squared, s.fit->shifted ? " (shifted by TE_r - F_N)" : "");
            else if (sweep->parsed())
                std::printf("no rate fit: %s\n", s.fit_note.c_str());
            return s.ok() ? exit_ok : exit_runtime;
        }
        if (pde->parsed())
        {
            mflab::cmd_pde_solve(cfg, opt);
            return exit_ok;
        }
        if (diagnose->parsed())
        {
            std::vector<std::filesystem::path> paths(diagnose_inputs.begin(), diagnose_inputs.end());
            auto rows = mflab::cmd_diagnose(cfg, opt, paths, diagnose_time);
            for (const auto& r : rows)
                std::printf("t=%g N=%zu seed=%llu F_N/N^2=%.6g TE_r=%.6g\n", r.t, r.N,
                            static_cast<unsigned long long>(r.seed), r.F_N_per_N2, r.TE_r);
            return exit_ok;
        }
        if (gap->parsed())
        {
            auto s = mflab::cmd_gap(cfg, opt);
            if (!s.t.empty())
                std::printf("gap(0)=%.6g gap(T)=%.6g ratio=%.6g\n", s.gap.front(), s.gap.back(), s.ratio.back());
            return exit_ok;
        }
    }
    catch (const mflab::ConfigError& e)
    {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return exit_config;
    }
    catch (const mflab::SchemaError& e)
    {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return exit_runtime;
    }
    catch (const std::exception& e)
    {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_runtime;
    }
    return exit_ok;
}
