#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mflab/dynamics.hpp"
#include "mflab/euler_poisson.hpp"
#include "mflab/exact_solution.hpp"
#include "mflab/grid.hpp"
#include "mflab/kernel.hpp"
#include "mflab/reference.hpp"
#include "mflab/sampling.hpp"
#include "mflab/transport.hpp"

namespace mflab {

// Initial velocity fields for Newton runs, in the particle frame.
enum class InitialVelocity
{
    zero,
    linear_expansion,  // u = rate x
    rotation           // u = rate J x
};

InitialVelocity parse_initial_velocity(const std::string& name);
std::string to_string(InitialVelocity u0);

enum class ReferenceKind
{
    automatic,  // exact family when it solves the flow, grid otherwise
    exact,
    grid
};

ReferenceKind parse_reference_kind(const std::string& name);
std::string to_string(ReferenceKind kind);

struct DensitySpec
{
    ExactFamily family = ExactFamily::expanding_ball;
    double R0 = 1;
    double profile_exponent = 0;  // radial_vortex_patch only
    std::vector<double> center;   // empty means the origin

    ExactSolution solution(const KernelSpec& spec) const;
};

struct ExperimentConfig
{
    struct Kernel
    {
        int d = 2;
        std::optional<double> s;  // empty for the log kernel
    } kernel;

    FlowSpec flow;

    struct Init
    {
        DensitySpec density;
        SamplingMode sampling = SamplingMode::quantized;
        InitialVelocity u0 = InitialVelocity::zero;
        double u0_rate = 0;
    } init;

    std::vector<std::size_t> N_list{64};
    std::vector<std::uint64_t> seeds{0};

    struct Time
    {
        double T = 0.5;
        IntegratorConfig integrator;
    } time;

    struct Pde
    {
        int n = 128;
        double L = 2.5;
        double cfl = 0.4;
        TransportScheme scheme = TransportScheme::upwind;
        int refine = 1;  // Euler-Poisson markers per cell and axis
        ReferenceKind reference = ReferenceKind::automatic;
    } pde;

    struct Diagnostics
    {
        double every = 0;  // 0 means T / 10
        bool truncated = true;
        bool bl = false;
        std::optional<bool> kinetic;  // defaults to on for newton
        bool snapshots = false;       // particle CSV per observation time
    } diagnostics;

    // Second initial density for the weak-strong gap; unset fields follow init.
    struct Gap
    {
        std::optional<ExactFamily> family;
        std::optional<double> R0;
        std::optional<double> profile_exponent;
        std::optional<std::vector<double>> center;
    } gap;

    std::string output_dir = "out";

    KernelSpec kernel_spec() const;
    ExactSolution initial_solution() const;
    ExactSolution gap_solution() const;
    GridGeometry grid() const;
    double observation_every() const;
    bool kinetic_diagnostics() const;
    // Rejects inconsistent settings with the dotted key of the offending field.
    void validate() const;
};

// Flat "a.b.c = value" text (values are JSON literals or bare words, '#'
// starts a comment) or a JSON document. Unknown keys are rejected.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Flat text to a JSON tree, without interpreting the keys.
nlohmann::json parse_config_tree(const std::string& text);
ExperimentConfig config_from_json(const nlohmann::json& tree);

// Fully resolved configuration with every default spelled out. The output
// directory is excluded: it locates results but does not change them.
nlohmann::json canonical_json(const ExperimentConfig& cfg);
// FNV-1a 64 of canonical_json(cfg).dump(), as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);
std::uint64_t fnv1a64(const std::string& bytes);

// The reference the harness pairs with particles of this config, at t = 0.
std::unique_ptr<Reference> make_reference(const ExperimentConfig& cfg);
// Same, for an explicit initial density.
std::unique_ptr<Reference> make_reference(const ExperimentConfig& cfg, const ExactSolution& mu0);

// u0 at the given points (flat), particle frame.
std::vector<double> initial_velocity(const ExperimentConfig& cfg, std::span<const double> points);
VelocityGrid initial_velocity_grid(const ExperimentConfig& cfg, const GridGeometry& g);

} // namespace mflab
