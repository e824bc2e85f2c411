#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mflab/exact_solution.hpp"
#include "mflab/grid.hpp"
#include "mflab/particles.hpp"
#include "mflab/reference.hpp"

namespace mflab {

/*
 * F_N(X, mu) = sum_{i != j} g(x_i - x_j) - 2N sum_i h^mu(x_i) + N^2 E(mu),
 * with E(mu) the self-interaction of mu. Throws CollisionError on coincident
 * particles and ExtrapolationError when a particle leaves a grid reference.
 */
double modulated_energy(const ParticleSystem& sys, const Reference& mu);
double modulated_energy(const ParticleSystem& sys, const ExactSolution& mu, double t);
double modulated_energy(const ParticleSystem& sys, const MeasureGrid& mu, const KernelSpec& spec);

double self_energy(const ExactSolution& mu, double t);
// double grid sum with the analytic cell-averaged kernel on the diagonal
double self_energy(const MeasureGrid& mu, const KernelSpec& spec);

// F_N + sum g(eta_i) + 2N sum_i int f_{eta_i}(x - x_i) dmu(x). Requires eta_i <= r_i.
double truncated_energy(const ParticleSystem& sys, const Reference& mu, std::span<const double> eta);

// N sum_i |u(x_i) - v_i|^2, u taken from the reference
double kinetic_modulation(const ParticleSystem& sys, const Reference& mu);
double kinetic_modulation(const ParticleSystem& sys, const VelocityGrid& u);

// kinetic modulation + F_N
double monokinetic_energy(const ParticleSystem& sys, const Reference& mu);
double monokinetic_energy(const ParticleSystem& sys, const Reference& mu, const VelocityGrid& u);

// int int g d(mu1 - mu2) d(mu1 - mu2) on a shared grid
double weak_strong_gap(const MeasureGrid& mu1, const MeasureGrid& mu2, const KernelSpec& spec);
// int |u1 - u2|^2 dmu1 + weak_strong_gap(mu1, mu2)
double euler_poisson_gap(const MeasureGrid& mu1, const VelocityGrid& u1, const MeasureGrid& mu2,
                         const VelocityGrid& u2, const KernelSpec& spec);

struct DiagnosticsRecord
{
    double t = 0;
    std::size_t N = 0;
    std::uint64_t seed = 0;
    double F_N = 0;
    double F_N_per_N2 = 0;
    double kinetic_mod = 0;
    double H_N_total = 0;
    double sum_g_r = 0;
    double min_r = 0;
    double TE_r = 0;
    double bl_dist = 0;
    double hn_per_n2 = 0;
    double en_per_n = 0;
};

struct DiagnosticsOptions
{
    bool truncated = true;
    bool bl = false;
    bool kinetic = false;  // fills kinetic_mod from the reference velocity
};

DiagnosticsRecord diagnose(double t, const ParticleSystem& sys, std::uint64_t seed, const Reference& mu,
                           const DiagnosticsOptions& options = {});

} // namespace mflab
