#include "mflab/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <set>

#include "mflab/errors.hpp"
#include "mflab/execution.hpp"
#include "mflab/field_bounds.hpp"
#include "mflab/io.hpp"
#include "mflab/sampling.hpp"
#include "mflab/version.hpp"

namespace mflab {

using nlohmann::json;

ReferenceTimeline::ReferenceTimeline(const ExperimentConfig& cfg) : ReferenceTimeline(cfg, cfg.initial_solution()) {}

ReferenceTimeline::ReferenceTimeline(const ExperimentConfig& cfg, const ExactSolution& mu0)
    : times_(observation_times(cfg.time.T, cfg.observation_every()))
{
    auto ref = make_reference(cfg, mu0);
    for (double t : times_)
    {
        try
        {
            ref->advance_to(t);
        }
        catch (const std::exception& e)
        {
            error_ = e.what();
            failed_at_ = t;
            break;
        }
        refs_.push_back(ref->clone());
    }
}

const Reference& ReferenceTimeline::at(std::size_t k) const
{
    if (k >= refs_.size())
        throw IntegratorError("reference evolution failed: " + error_, failed_at_);
    return *refs_[k];
}

bool SimulateSummary::ok() const
{
    return std::all_of(cells.begin(), cells.end(), [](const CellResult& c) { return c.ok; });
}

std::string diagnostics_file_name(std::size_t N, std::uint64_t seed)
{
    return "diagnostics_N" + std::to_string(N) + "_seed" + std::to_string(seed) + ".csv";
}

ParticleSystem initial_state(const ExperimentConfig& cfg, const Reference& mu0, std::size_t N, std::uint64_t seed)
{
    ParticleSystem sys = initial_particles(mu0, N, seed, cfg.init.sampling);
    if (cfg.flow.kind == FlowKind::newton)
        sys.set_velocities(initial_velocity(cfg, sys.positions()));
    return sys;
}

namespace {

DiagnosticsOptions diagnostics_options(const ExperimentConfig& cfg)
{
    DiagnosticsOptions o;
    o.truncated = cfg.diagnostics.truncated;
    o.bl = cfg.diagnostics.bl;
    o.kinetic = cfg.kinetic_diagnostics();
    return o;
}

json cell_metadata(const char* command, const std::string& hash, const CellResult& c)
{
    json j = {{"command", command},
              {"config_hash", hash},
              {"version", std::string(version_string())},
              {"N", c.N},
              {"seed", c.seed},
              {"status", c.ok ? "ok" : "error"},
              {"rows", c.rows.size()},
              {"steps", c.stats.steps},
              {"halvings", c.stats.halvings},
              {"wall_time_s", c.wall_time},
              {"output", c.file}};
    if (!c.ok)
    {
        j["error"] = c.error;
        if (c.failure_time)
            j["failure_time"] = *c.failure_time;
    }
    return j;
}

std::string snapshot_name(std::size_t N, std::uint64_t seed, std::size_t k)
{
    char buf[96];
    std::snprintf(buf, sizeof buf, "particles_N%zu_seed%llu_k%03zu.csv", N, static_cast<unsigned long long>(seed), k);
    return buf;
}

void apply_policy(const RunOptions& opt)
{
    set_execution_policy({std::max(1, opt.threads), opt.deterministic});
}

std::vector<std::pair<std::size_t, std::uint64_t>> cells_of(const ExperimentConfig& cfg)
{
    std::vector<std::pair<std::size_t, std::uint64_t>> cells;
    for (auto N : cfg.N_list)
        for (auto s : cfg.seeds)
            cells.emplace_back(N, s);
    return cells;
}

SimulateSummary simulate_all(const ExperimentConfig& cfg, const RunOptions& opt, const char* command)
{
    apply_policy(opt);
    SimulateSummary summary;
    summary.config_hash = config_hash(cfg);
    std::filesystem::create_directories(opt.out);
    json config_doc = canonical_json(cfg);
    config_doc["config_hash"] = summary.config_hash;
    write_json(opt.out / "config.json", config_doc);

    const ReferenceTimeline refs(cfg);
    const auto cells = cells_of(cfg);
    summary.cells.resize(cells.size());
    const std::filesystem::path* snapshots = cfg.diagnostics.snapshots ? &opt.out : nullptr;
    auto run_cell = [&](std::size_t c) {
        CellResult r = simulate_cell(cfg, refs, cells[c].first, cells[c].second, snapshots, summary.config_hash);
        r.file = diagnostics_file_name(r.N, r.seed);
        write_diagnostics_csv(opt.out / r.file, r.rows, summary.config_hash);
        summary.cells[c] = std::move(r);
    };
    if (opt.concurrent_cells && opt.threads > 1)
    {
        // cells are independent and write separate files
        std::vector<std::string> failures(cells.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(opt.threads)
        for (std::ptrdiff_t c = 0; c < std::ptrdiff_t(cells.size()); ++c)
        {
            try
            {
                run_cell(std::size_t(c));
            }
            catch (const std::exception& e)
            {
                failures[c] = e.what();
            }
        }
        for (const auto& f : failures)
            if (!f.empty())
                throw Error(f);
    }
    else
        for (std::size_t c = 0; c < cells.size(); ++c)
            run_cell(c);
    for (const auto& c : summary.cells)
        append_jsonl(opt.out / "runs.jsonl", cell_metadata(command, summary.config_hash, c));
    return summary;
}

} // namespace

CellResult simulate_cell(const ExperimentConfig& cfg, const ReferenceTimeline& refs, std::size_t N,
                         std::uint64_t seed, const std::filesystem::path* snapshot_dir, const std::string& hash)
{
    CellResult out;
    out.N = N;
    out.seed = seed;
    const auto start = std::chrono::steady_clock::now();
    const KernelSpec spec = cfg.kernel_spec();
    const DiagnosticsOptions opts = diagnostics_options(cfg);
    try
    {
        ParticleSystem sys = initial_state(cfg, refs.at(0), N, seed);
        std::size_t k = 0;
        Observer observer = [&](double t, const ParticleSystem& state) {
            out.rows.push_back(diagnose(t, state, seed, refs.at(k), opts));
            if (snapshot_dir)
                write_particles_csv(*snapshot_dir / snapshot_name(N, seed, k), state, {hash, t, seed});
            ++k;
        };
        run(std::move(sys), cfg.flow, spec, cfg.time.integrator, cfg.time.T, cfg.observation_every(), {observer},
            &out.stats);
    }
    catch (const IntegratorError& e)
    {
        out.ok = false;
        out.error = e.what();
        out.failure_time = e.time();
    }
    catch (const ShockError& e)
    {
        out.ok = false;
        out.error = e.what();
        out.failure_time = e.time();
    }
    catch (const std::exception& e)
    {
        out.ok = false;
        out.error = e.what();
    }
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return out;
}

SimulateSummary cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opt)
{
    return simulate_all(cfg, opt, "simulate");
}

SimulateSummary cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opt)
{
    RunOptions concurrent = opt;
    concurrent.concurrent_cells = true;
    SimulateSummary summary = simulate_all(cfg, concurrent, "sweep");
    std::vector<DiagnosticsRecord> rows;
    for (const auto& c : summary.cells)
        if (c.ok)
            rows.insert(rows.end(), c.rows.begin(), c.rows.end());
    try
    {
        RateFit fit = fit_rate(rows);
        json j = fit;
        j["config_hash"] = summary.config_hash;
        write_json(opt.out / "rate_fit.json", j);
        summary.fit = fit;
    }
    catch (const RegimeError& e)
    {
        summary.fit_note = e.what();
    }
    return summary;
}

json cmd_fit_rate(const std::vector<std::filesystem::path>& csvs, const RunOptions& opt)
{
    if (csvs.empty())
        throw ConfigError("inputs", "fit-rate needs at least one diagnostics CSV");
    std::vector<DiagnosticsRecord> rows;
    std::set<std::string> hashes;
    for (const auto& path : csvs)
    {
        std::string hash;
        auto part = read_diagnostics_csv(path, &hash);
        rows.insert(rows.end(), part.begin(), part.end());
        hashes.insert(hash);
    }
    json j = fit_rate(rows);
    if (hashes.size() == 1)
        j["config_hash"] = *hashes.begin();
    else
        j["config_hash"] = std::vector<std::string>(hashes.begin(), hashes.end());
    if (!opt.out.empty())
        write_json(opt.out / "rate_fit.json", j);
    return j;
}

void cmd_pde_solve(const ExperimentConfig& cfg, const RunOptions& opt)
{
    apply_policy(opt);
    const std::string hash = config_hash(cfg);
    const KernelSpec spec = cfg.kernel_spec();
    const ReferenceTimeline refs(cfg);
    std::filesystem::create_directories(opt.out);
    std::vector<std::vector<double>> summary;
    for (std::size_t k = 0; k < refs.available(); ++k)
    {
        const Reference& ref = refs.at(k);
        MeasureGrid mu = ref.grid() ? *ref.grid() : ref.rasterize(cfg.grid());
        const double pde_time = ref.clock().time * ref.time();
        mu.time = pde_time;
        char stem[32];
        std::snprintf(stem, sizeof stem, "density_k%03zu", k);
        write_grid(opt.out / stem, mu, hash);
        std::snprintf(stem, sizeof stem, "radial_k%03zu.csv", k);
        write_radial_csv(opt.out / stem, mu, hash);
        FieldBounds b = field_bounds(mu, spec);
        summary.push_back({ref.time(), pde_time, b.mass, b.sup_density, b.sup_grad, b.sup_hessian, ref.self_energy()});
    }
    write_table_csv(opt.out / "pde_summary.csv",
                    {"t", "pde_time", "mass", "sup_density", "sup_grad", "sup_hessian", "self_energy"}, summary, hash);
    json meta = {{"command", "pde-solve"},
                 {"config_hash", hash},
                 {"version", std::string(version_string())},
                 {"status", refs.complete() ? "ok" : "error"},
                 {"snapshots", refs.available()}};
    if (!refs.complete())
        meta["error"] = refs.error();
    append_jsonl(opt.out / "runs.jsonl", meta);
    if (!refs.complete())
        refs.at(refs.available());
}

std::vector<DiagnosticsRecord> cmd_diagnose(const ExperimentConfig& cfg, const RunOptions& opt,
                                            const std::vector<std::filesystem::path>& inputs,
                                            std::optional<double> time)
{
    apply_policy(opt);
    const std::string hash = config_hash(cfg);
    const DiagnosticsOptions opts = diagnostics_options(cfg);
    std::vector<DiagnosticsRecord> rows;
    std::filesystem::path target;
    if (inputs.empty())
    {
        auto mu0 = make_reference(cfg);
        for (auto [N, seed] : cells_of(cfg))
            rows.push_back(diagnose(0.0, initial_state(cfg, *mu0, N, seed), seed, *mu0, opts));
        target = opt.out / "diagnostics_initial.csv";
    }
    else
    {
        struct Input
        {
            double t;
            std::uint64_t seed;
            ParticleSystem sys;
        };
        std::vector<Input> states;
        for (const auto& path : inputs)
        {
            FileMetadata meta;
            ParticleSystem sys = read_particles_csv(path, &meta);
            states.push_back({time.value_or(meta.t.value_or(0.0)), meta.seed.value_or(0), std::move(sys)});
        }
        // one reference moved forward through the sorted times
        std::vector<std::size_t> order(states.size());
        for (std::size_t i = 0; i < order.size(); ++i)
            order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return states[a].t < states[b].t; });
        auto ref = make_reference(cfg);
        rows.resize(states.size());
        for (std::size_t i : order)
        {
            ref->advance_to(states[i].t);
            rows[i] = diagnose(states[i].t, states[i].sys, states[i].seed, *ref, opts);
        }
        target = opt.out / "diagnostics.csv";
    }
    write_diagnostics_csv(target, rows, hash);
    return rows;
}

const std::vector<std::string> gap_columns = {"t",           "pde_time",   "gap",
                                              "kinetic",     "ratio",      "sup_hessian",
                                              "sup_grad_u",  "hessian_integral", "grad_u_integral"};

GapSeries run_gap(const ExperimentConfig& cfg)
{
    ExperimentConfig grid_cfg = cfg;
    grid_cfg.pde.reference = ReferenceKind::grid;
    const KernelSpec spec = cfg.kernel_spec();
    const bool newton = cfg.flow.kind == FlowKind::newton;
    auto mu2 = make_reference(grid_cfg, cfg.initial_solution());
    auto mu1 = make_reference(grid_cfg, cfg.gap_solution());
    GapSeries s;
    for (double t : observation_times(cfg.time.T, cfg.observation_every()))
    {
        try
        {
            mu1->advance_to(t);
            mu2->advance_to(t);
        }
        catch (const std::exception& e)
        {
            s.error = e.what();
            break;
        }
        const MeasureGrid& g1 = *mu1->grid();
        const MeasureGrid& g2 = *mu2->grid();
        double potential_gap = weak_strong_gap(g1, g2, spec);
        double kinetic = 0, grad_u = 0;
        if (newton)
        {
            auto& e1 = static_cast<const EulerPoissonReference&>(*mu1);
            auto& e2 = static_cast<const EulerPoissonReference&>(*mu2);
            kinetic = euler_poisson_gap(g1, e1.velocity_grid(), g2, e2.velocity_grid(), spec) - potential_gap;
            grad_u = e2.solver().lagrangian().max_velocity_gradient;
        }
        const double pde_time = mu2->clock().time * t;
        const double gap = potential_gap + kinetic;
        const double hess = field_bounds(g2, spec).sup_hessian;
        double hint = 0, uint = 0;
        if (!s.t.empty())
        {
            const double dt = pde_time - s.pde_time.back();
            hint = s.hessian_integral.back() + 0.5 * dt * (hess + s.sup_hessian.back());
            uint = s.grad_u_integral.back() + 0.5 * dt * (grad_u + s.sup_grad_u.back());
        }
        s.t.push_back(t);
        s.pde_time.push_back(pde_time);
        s.gap.push_back(gap);
        s.kinetic.push_back(kinetic);
        const double g0 = s.gap.front();
        s.ratio.push_back(g0 > 0 ? gap / g0 : (gap == 0 ? 1.0 : INFINITY));
        s.sup_hessian.push_back(hess);
        s.sup_grad_u.push_back(grad_u);
        s.hessian_integral.push_back(hint);
        s.grad_u_integral.push_back(uint);
    }
    return s;
}

GapSeries cmd_gap(const ExperimentConfig& cfg, const RunOptions& opt)
{
    apply_policy(opt);
    const std::string hash = config_hash(cfg);
    GapSeries s = run_gap(cfg);
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < s.t.size(); ++k)
        rows.push_back({s.t[k], s.pde_time[k], s.gap[k], s.kinetic[k], s.ratio[k], s.sup_hessian[k], s.sup_grad_u[k],
                        s.hessian_integral[k], s.grad_u_integral[k]});
    write_table_csv(opt.out / "gap.csv", gap_columns, rows, hash);
    json meta = {{"command", "gap"},
                 {"config_hash", hash},
                 {"version", std::string(version_string())},
                 {"status", s.error.empty() ? "ok" : "error"},
                 {"rows", rows.size()}};
    if (!s.error.empty())
        meta["error"] = s.error;
    append_jsonl(opt.out / "runs.jsonl", meta);
    if (!s.error.empty())
        throw IntegratorError("gap evolution stopped: " + s.error, s.t.empty() ? 0.0 : s.t.back());
    return s;
}

} // namespace mflab
