#include "mflab/modulated_energy.hpp"

#include <cmath>

#include "mflab/distance.hpp"
#include "mflab/dynamics.hpp"
#include "mflab/errors.hpp"
#include "mflab/potential_solver.hpp"

namespace mflab {

namespace {

void require_distinct(const ParticleSystem& sys)
{
    const std::size_t N = sys.size();
    const int d = sys.dim();
    for (std::size_t i = 0; i < N; ++i)
        for (std::size_t j = i + 1; j < N; ++j)
        {
            double r2 = 0;
            for (int a = 0; a < d; ++a)
            {
                double z = sys.position(i)[a] - sys.position(j)[a];
                r2 += z * z;
            }
            if (r2 == 0)
                throw CollisionError(i, j, 0);
        }
}

double cross_term(const ParticleSystem& sys, const Reference& mu)
{
    double s = 0;
    for (std::size_t i = 0; i < sys.size(); ++i)
        s += mu.potential(sys.position(i));
    return s;
}

} // namespace

double modulated_energy(const ParticleSystem& sys, const Reference& mu)
{
    if (sys.dim() != mu.dim())
        throw RegimeError("particle and reference dimensions differ");
    require_distinct(sys);
    const double N = double(sys.size());
    return interaction_energy(sys, mu.kernel()) - 2 * N * cross_term(sys, mu) + N * N * mu.self_energy();
}

double modulated_energy(const ParticleSystem& sys, const ExactSolution& mu, double t)
{
    ExactReference ref(mu, {1, 1});
    ref.advance_to(t);
    return modulated_energy(sys, ref);
}

double modulated_energy(const ParticleSystem& sys, const MeasureGrid& mu, const KernelSpec& spec)
{
    return modulated_energy(sys, GridReference(mu, spec, FlowSpec::gradient(), {}, false));
}

double self_energy(const ExactSolution& mu, double t)
{
    return mu.self_energy(t);
}

double self_energy(const MeasureGrid& mu, const KernelSpec& spec)
{
    if (mu.geom.d != spec.dim())
        throw RegimeError("grid and kernel dimensions differ");
    return PotentialSolver(mu.geom, spec, 0).energy(mu.values);
}

double truncated_energy(const ParticleSystem& sys, const Reference& mu, std::span<const double> eta)
{
    const std::size_t N = sys.size();
    if (eta.size() != N)
        throw RegimeError("one truncation radius per particle is required");
    auto md = minimal_distances(sys);
    if (md.degenerate)
        throw RegimeError("degenerate minimal distances: coincident particles");
    const KernelSpec& spec = mu.kernel();
    double diag = 0, corr = 0;
    for (std::size_t i = 0; i < N; ++i)
    {
        if (!(eta[i] > 0))
            throw RegimeError("truncation radii must be positive");
        if (eta[i] > md.r[i] * (1 + 1e-12))
            throw RegimeError("truncation radius exceeds the minimal distance r_i; balls would overlap");
        diag += spec.g(eta[i]);
        corr += mu.f_eta_integral(sys.position(i), eta[i]);
    }
    return modulated_energy(sys, mu) + diag + 2 * double(N) * corr;
}

double kinetic_modulation(const ParticleSystem& sys, const Reference& mu)
{
    if (!sys.has_velocities())
        throw RegimeError("kinetic modulation needs particle velocities");
    const int d = sys.dim();
    std::vector<double> u(d);
    double s = 0;
    for (std::size_t i = 0; i < sys.size(); ++i)
    {
        mu.velocity(sys.position(i), u);
        for (int a = 0; a < d; ++a)
            s += (u[a] - sys.velocity(i)[a]) * (u[a] - sys.velocity(i)[a]);
    }
    return double(sys.size()) * s;
}

double kinetic_modulation(const ParticleSystem& sys, const VelocityGrid& u)
{
    if (!sys.has_velocities())
        throw RegimeError("kinetic modulation needs particle velocities");
    const int d = sys.dim();
    std::vector<double> ui(d);
    double s = 0;
    for (std::size_t i = 0; i < sys.size(); ++i)
    {
        if (!u.geom.contains(sys.position(i)))
            throw ExtrapolationError("particle outside the velocity grid");
        interpolate_vector(u, sys.position(i), ui);
        for (int a = 0; a < d; ++a)
            s += (ui[a] - sys.velocity(i)[a]) * (ui[a] - sys.velocity(i)[a]);
    }
    return double(sys.size()) * s;
}

double monokinetic_energy(const ParticleSystem& sys, const Reference& mu)
{
    return kinetic_modulation(sys, mu) + modulated_energy(sys, mu);
}

double monokinetic_energy(const ParticleSystem& sys, const Reference& mu, const VelocityGrid& u)
{
    return kinetic_modulation(sys, u) + modulated_energy(sys, mu);
}

double weak_strong_gap(const MeasureGrid& mu1, const MeasureGrid& mu2, const KernelSpec& spec)
{
    if (!(mu1.geom == mu2.geom))
        throw RegimeError("weak-strong gap needs both densities on the same grid");
    std::vector<double> diff(mu1.values.size());
    for (std::size_t k = 0; k < diff.size(); ++k)
        diff[k] = mu1.values[k] - mu2.values[k];
    return PotentialSolver(mu1.geom, spec, 0).energy(diff);
}

double euler_poisson_gap(const MeasureGrid& mu1, const VelocityGrid& u1, const MeasureGrid& mu2,
                         const VelocityGrid& u2, const KernelSpec& spec)
{
    if (!(u1.geom == mu1.geom) || !(u2.geom == mu1.geom))
        throw RegimeError("Euler-Poisson gap needs all fields on the same grid");
    const int d = mu1.geom.d;
    double kin = 0;
    for (std::size_t k = 0; k < mu1.values.size(); ++k)
    {
        double s = 0;
        for (int a = 0; a < d; ++a)
        {
            double z = u1.values[k * d + a] - u2.values[k * d + a];
            s += z * z;
        }
        kin += s * mu1.values[k];
    }
    return kin * mu1.geom.cell_volume() + weak_strong_gap(mu1, mu2, spec);
}

DiagnosticsRecord diagnose(double t, const ParticleSystem& sys, std::uint64_t seed, const Reference& mu,
                           const DiagnosticsOptions& options)
{
    const KernelSpec& spec = mu.kernel();
    DiagnosticsRecord rec;
    rec.t = t;
    rec.N = sys.size();
    rec.seed = seed;
    const double N = double(sys.size());
    rec.F_N = modulated_energy(sys, mu);
    rec.F_N_per_N2 = rec.F_N / (N * N);
    if (options.kinetic && sys.has_velocities() && mu.has_velocity())
        rec.kinetic_mod = kinetic_modulation(sys, mu);
    rec.H_N_total = rec.F_N + rec.kinetic_mod;
    auto md = minimal_distances(sys);
    rec.min_r = md.r.empty() ? 0 : md.r[0];
    for (double r : md.r)
    {
        rec.sum_g_r += spec.g(r);
        rec.min_r = std::min(rec.min_r, r);
    }
    if (options.truncated)
        rec.TE_r = truncated_energy(sys, mu, md.r);
    if (options.bl)
        rec.bl_dist = bounded_lipschitz_distance(sys, mu, seed);
    double H = interaction_energy(sys, spec);
    rec.hn_per_n2 = H / (N * N);
    rec.en_per_n = sys.has_velocities() ? newton_energy(sys, spec) : rec.hn_per_n2;
    return rec;
}

} // namespace mflab
