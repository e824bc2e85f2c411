#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mflab/config.hpp"
#include "mflab/dynamics.hpp"
#include "mflab/modulated_energy.hpp"
#include "mflab/rate_fit.hpp"
#include "mflab/reference.hpp"

namespace mflab {

struct RunOptions
{
    std::filesystem::path out = "out";
    bool deterministic = false;
    int threads = 1;
    // run (N, seed) cells concurrently instead of parallelising inside each
    bool concurrent_cells = false;
};

// Reference states at every observation time, computed once per config and
// shared read-only by all (N, seed) cells. Evolution failures (shock, a grid
// too small) truncate the timeline and are reported on use.
class ReferenceTimeline
{
  public:
    ReferenceTimeline(const ExperimentConfig& cfg, const ExactSolution& mu0);
    explicit ReferenceTimeline(const ExperimentConfig& cfg);

    const std::vector<double>& times() const { return times_; }
    std::size_t available() const { return refs_.size(); }
    // Throws the recorded evolution error when k is past the failure.
    const Reference& at(std::size_t k) const;
    bool complete() const { return refs_.size() == times_.size(); }
    const std::string& error() const { return error_; }

  private:
    std::vector<double> times_;
    std::vector<std::unique_ptr<Reference>> refs_;
    std::string error_;
    double failed_at_ = 0;
};

struct CellResult
{
    std::size_t N = 0;
    std::uint64_t seed = 0;
    std::vector<DiagnosticsRecord> rows;
    bool ok = true;
    std::string error;
    std::optional<double> failure_time;
    double wall_time = 0;
    RunStats stats;
    std::string file;  // diagnostics CSV, relative to the output directory
};

// Initial particles (with u0 velocities for newton) for one cell.
ParticleSystem initial_state(const ExperimentConfig& cfg, const Reference& mu0, std::size_t N, std::uint64_t seed);

// Runs one (N, seed) cell; runtime errors are recorded, not thrown. When
// snapshot_dir is given, particle states are written there at each observation.
CellResult simulate_cell(const ExperimentConfig& cfg, const ReferenceTimeline& refs, std::size_t N,
                         std::uint64_t seed, const std::filesystem::path* snapshot_dir = nullptr,
                         const std::string& hash = "");

struct SimulateSummary
{
    std::string config_hash;
    std::vector<CellResult> cells;
    std::optional<RateFit> fit;
    std::string fit_note;  // why no fit was produced, if none was
    bool ok() const;
};

std::string diagnostics_file_name(std::size_t N, std::uint64_t seed);

// Writes config.json, diagnostics_N{N}_seed{seed}.csv per cell and one
// runs.jsonl line per cell.
SimulateSummary cmd_simulate(const ExperimentConfig& cfg, const RunOptions& opt);
// cmd_simulate over all cells, then fit_rate over the results into rate_fit.json.
SimulateSummary cmd_sweep(const ExperimentConfig& cfg, const RunOptions& opt);

// Fit over diagnostics CSVs; writes rate_fit.json under opt.out when it is not empty.
nlohmann::json cmd_fit_rate(const std::vector<std::filesystem::path>& csvs, const RunOptions& opt);

// Grids, radial profiles and pde_summary.csv at each observation time.
// Throws the evolution error after writing the states reached.
void cmd_pde_solve(const ExperimentConfig& cfg, const RunOptions& opt);

// Diagnostics of particle CSVs at their recorded times (or `time`), or of
// every cell's initial state when no inputs are given.
std::vector<DiagnosticsRecord> cmd_diagnose(const ExperimentConfig& cfg, const RunOptions& opt,
                                            const std::vector<std::filesystem::path>& inputs,
                                            std::optional<double> time = std::nullopt);

// Gap between init (mu2, the reference) and the gap.* density (mu1), both
// evolved on the grid. Gronwall integrals are in PDE time.
struct GapSeries
{
    std::vector<double> t;  // particle clock
    std::vector<double> pde_time;
    std::vector<double> gap;      // modulated gap, kinetic part included for newton
    std::vector<double> kinetic;  // int |u1 - u2|^2 dmu1
    std::vector<double> ratio;    // gap / gap(0)
    std::vector<double> sup_hessian;  // of h^{mu2}
    std::vector<double> sup_grad_u;   // of u2, Euler-Poisson only
    std::vector<double> hessian_integral;
    std::vector<double> grad_u_integral;
    std::string error;  // evolution failure that cut the series short
};

GapSeries run_gap(const ExperimentConfig& cfg);
GapSeries cmd_gap(const ExperimentConfig& cfg, const RunOptions& opt);

extern const std::vector<std::string> gap_columns;

} // namespace mflab
