#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mflab/kernel.hpp"
#include "mflab/particles.hpp"

namespace mflab {

enum class FlowKind
{
    gradient,
    conservative,
    mixed,
    newton
};

FlowKind parse_flow_kind(const std::string& name);
std::string to_string(FlowKind kind);

// External forcing from a fixed registry, so configs stay reproducible.
struct Forcing
{
    enum class Kind
    {
        zero,
        constant_drift,
        linear_confinement
    };

    Kind kind = Kind::zero;
    std::vector<double> drift;  // constant_drift: F(x) = drift
    double lambda = 0;          // linear_confinement: F(x) = -lambda x

    static Forcing parse_kind(const std::string& name);
    bool is_zero() const { return kind == Kind::zero; }
    // out += scale * F(x)
    void accumulate(std::span<const double> x, double scale, std::span<double> out) const;
};

std::string to_string(Forcing::Kind kind);

// Rotation by pi/2 on consecutive coordinate pairs; a trailing odd coordinate is fixed.
std::vector<double> default_symplectic_matrix(int d);

struct FlowSpec
{
    FlowKind kind = FlowKind::gradient;
    std::vector<double> J;  // d x d row-major, antisymmetric; empty means the default
    double mix_alpha = 1;
    double mix_beta = 0;
    Forcing forcing;

    static FlowSpec gradient() { return {}; }
    static FlowSpec conservative(std::vector<double> J = {});
    static FlowSpec mixed(double alpha, double beta, std::vector<double> J = {});
    static FlowSpec newton()
    {
        FlowSpec f;
        f.kind = FlowKind::newton;
        return f;
    }

    void validate(int d) const;
    // M such that the first-order velocity is M times the force; identity for newton.
    std::vector<double> mobility(int d) const;
    std::vector<double> symplectic(int d) const;
};

struct IntegratorConfig
{
    double dt = 1e-3;
    bool adaptive = true;
    double dt_floor = 1e-9;
    double collision_fraction = 0.25;

    void validate() const;
};

struct StepResult
{
    ParticleSystem state;
    double dt = 0;       // time actually advanced
    int halvings = 0;
};

// Right-hand side of the first-order flow, or the acceleration for newton.
std::vector<double> flow_rhs(const ParticleSystem& sys, const FlowSpec& flow, const KernelSpec& spec);

// One RK4 step of size cfg.dt, halved while any particle would move more than
// collision_fraction times its nearest-neighbour distance.
StepResult step(const ParticleSystem& sys, const FlowSpec& flow, const KernelSpec& spec, const IntegratorConfig& cfg);

// As step() but with an explicit step size (still halved when adaptive).
StepResult step_with(const ParticleSystem& sys, const FlowSpec& flow, const KernelSpec& spec,
                     const IntegratorConfig& cfg, double dt);

struct Snapshot
{
    double t = 0;
    ParticleSystem state;
};

using Observer = std::function<void(double t, const ParticleSystem&)>;

// Observation times 0, every, 2 every, ..., with the last one clipped to T.
std::vector<double> observation_times(double T, double every);

struct RunStats
{
    std::size_t steps = 0;
    std::size_t halvings = 0;
};

// Integrates to T and returns the states at observation_times(T, every);
// observers are called at each of those times. every <= 0 means cfg.dt.
std::vector<Snapshot> run(ParticleSystem sys, const FlowSpec& flow, const KernelSpec& spec,
                          const IntegratorConfig& cfg, double T, double every = 0,
                          const std::vector<Observer>& observers = {}, RunStats* stats = nullptr);

// Conserved energy of the Newton flow: (1/2N) sum |v|^2 + H_N / N^2.
double newton_energy(const ParticleSystem& sys, const KernelSpec& spec);

} // namespace mflab
