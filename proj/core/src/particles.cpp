#include "mflab/particles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mflab/errors.hpp"
#include "mflab/execution.hpp"

namespace mflab {

ParticleSystem::ParticleSystem(int d, std::vector<double> positions) : d_(d), x_(std::move(positions))
{
    if (d < 1)
        throw RegimeError("particle dimension must be >= 1");
    if (x_.size() % d)
        throw RegimeError("position array length is not a multiple of d");
    for (double v : x_)
        if (!std::isfinite(v))
            throw RegimeError("non-finite particle position");
}

ParticleSystem::ParticleSystem(int d, std::vector<double> positions, std::vector<double> velocities)
    : ParticleSystem(d, std::move(positions))
{
    set_velocities(std::move(velocities));
}

void ParticleSystem::set_velocities(std::vector<double> v)
{
    if (!v.empty() && v.size() != x_.size())
        throw RegimeError("velocity array does not match positions");
    v_ = std::move(v);
}

double configuration_scale(int d, std::span<const double> x)
{
    std::size_t n = x.size() / d;
    if (n < 2)
        return 1;
    double diag2 = 0;
    for (int a = 0; a < d; ++a)
    {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = 0; i < n; ++i)
        {
            lo = std::min(lo, x[i * d + a]);
            hi = std::max(hi, x[i * d + a]);
        }
        diag2 += (hi - lo) * (hi - lo);
    }
    return diag2 > 0 ? std::sqrt(diag2) : 1;
}

namespace {
constexpr double collision_tolerance = 1e-12;

inline double dist2(const double* a, const double* b, int d)
{
    double r2 = 0;
    for (int k = 0; k < d; ++k)
    {
        double t = a[k] - b[k];
        r2 += t * t;
    }
    return r2;
}

[[noreturn]] void collide(std::size_t i, std::size_t j, double r2)
{
    throw CollisionError(std::min(i, j), std::max(i, j), std::sqrt(r2));
}
} // namespace

double interaction_energy(const ParticleSystem& sys, const KernelSpec& spec)
{
    const int d = sys.dim();
    const std::size_t n = sys.size();
    if (n > 0 && d != spec.dim())
        throw RegimeError("particle dimension does not match kernel dimension");
    const double* x = sys.positions().data();
    const double guard2 = std::pow(collision_tolerance * configuration_scale(d, sys.positions()), 2);

    // Row sums over j > i, combined in index order so the total is independent of scheduling.
    std::vector<double> rows(n, 0.0);
    bool collided = false;
    std::size_t ci = 0, cj = 0;
    double cr2 = 0;
#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(n); ++ii)
    {
        std::size_t i = ii;
        double acc = 0;
        for (std::size_t j = i + 1; j < n; ++j)
        {
            double r2 = dist2(x + i * d, x + j * d, d);
            if (r2 <= guard2)
            {
#pragma omp critical(mflab_collision)
                {
                    if (!collided)
                    {
                        collided = true;
                        ci = i, cj = j, cr2 = r2;
                    }
                }
                continue;
            }
            acc += spec.g_r2(r2);
        }
        rows[i] = acc;
    }
    if (collided)
        collide(ci, cj, cr2);
    double total = 0;
    for (double r : rows)
        total += r;
    return 2 * total;
}

ForceEvaluation evaluate_forces(int d, std::span<const double> xs, const KernelSpec& spec)
{
    const std::size_t n = xs.size() / d;
    if (n > 0 && d != spec.dim())
        throw RegimeError("particle dimension does not match kernel dimension");
    ForceEvaluation out;
    out.force.assign(n * d, 0.0);
    out.nearest.assign(n, std::numeric_limits<double>::infinity());
    if (n < 2)
        return out;
    const double* x = xs.data();
    const double guard2 = std::pow(collision_tolerance * configuration_scale(d, xs), 2);
    const double scale = -2.0 / double(n);
    const auto policy = execution_policy();

    if (policy.threads <= 1 && !policy.deterministic)
    {
        // Visit each unordered pair once. Rounding then differs from the row
        // form, so this path is reserved for non-deterministic runs.
        std::vector<double> near2(n, std::numeric_limits<double>::infinity());
        for (std::size_t i = 0; i < n; ++i)
        {
            const double* xi = x + i * d;
            double* fi = out.force.data() + i * d;
            for (std::size_t j = i + 1; j < n; ++j)
            {
                const double* xj = x + j * d;
                double r2 = dist2(xi, xj, d);
                if (r2 <= guard2)
                    collide(i, j, r2);
                near2[i] = std::min(near2[i], r2);
                near2[j] = std::min(near2[j], r2);
                double c = spec.dg_over_r_r2(r2);
                double* fj = out.force.data() + j * d;
                for (int a = 0; a < d; ++a)
                {
                    double t = c * (xi[a] - xj[a]);
                    fi[a] += t;
                    fj[a] -= t;
                }
            }
        }
        for (std::size_t i = 0; i < n; ++i)
            out.nearest[i] = std::sqrt(near2[i]);
    }
    else
    {
        // Each row is summed in index order by one thread: results do not
        // depend on the thread count.
        bool collided = false;
        std::size_t ci = 0, cj = 0;
        double cr2 = 0;
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(n); ++ii)
        {
            std::size_t i = ii;
            const double* xi = x + i * d;
            double* fi = out.force.data() + i * d;
            double near2 = std::numeric_limits<double>::infinity();
            for (std::size_t j = 0; j < n; ++j)
            {
                if (j == i)
                    continue;
                const double* xj = x + j * d;
                double r2 = dist2(xi, xj, d);
                if (r2 <= guard2)
                {
#pragma omp critical(mflab_collision)
                    {
                        if (!collided)
                        {
                            collided = true;
                            ci = i, cj = j, cr2 = r2;
                        }
                    }
                    continue;
                }
                near2 = std::min(near2, r2);
                double c = spec.dg_over_r_r2(r2);
                for (int a = 0; a < d; ++a)
                    fi[a] += c * (xi[a] - xj[a]);
            }
            out.nearest[i] = std::sqrt(near2);
        }
        if (collided)
            collide(ci, cj, cr2);
    }
    for (double& f : out.force)
        f *= scale;
    return out;
}

std::vector<double> pairwise_force(const ParticleSystem& sys, const KernelSpec& spec)
{
    return evaluate_forces(sys.dim(), sys.positions(), spec).force;
}

MinimalDistances minimal_distances(const ParticleSystem& sys)
{
    const int d = sys.dim();
    const std::size_t n = sys.size();
    MinimalDistances out;
    if (n == 0)
        return out;
    if (n == 1)
    {
        out.r.assign(1, 1.0);
        return out;
    }
    const double* x = sys.positions().data();
    const double cap = std::pow(double(n), -1.0 / d);
    out.r.assign(n, cap);
    bool degenerate = false;
#pragma omp parallel for schedule(static) reduction(|| : degenerate)
    for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(n); ++ii)
    {
        std::size_t i = ii;
        double near2 = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i)
                near2 = std::min(near2, dist2(x + i * d, x + j * d, d));
        if (near2 == 0)
            degenerate = true;
        out.r[i] = std::min(0.25 * std::sqrt(near2), cap);
    }
    out.degenerate = degenerate;
    return out;
}

} // namespace mflab
