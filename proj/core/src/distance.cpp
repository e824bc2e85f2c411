#include "mflab/distance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mflab/errors.hpp"
#include "mflab/sampling.hpp"
#include "quadrature.hpp"

namespace mflab {

std::vector<std::size_t> solve_assignment(std::size_t n, std::span<const double> cost)
{
    if (cost.size() != n * n)
        throw RegimeError("assignment needs a square cost matrix");
    // shortest augmenting paths with row/column potentials, 1-based with a virtual column 0
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i)
    {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), 0);
        do
        {
            used[j0] = 1;
            std::size_t i0 = p[j0], j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= n; ++j)
            {
                if (used[j])
                    continue;
                double cur = cost[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if (cur < minv[j])
                {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta)
                {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j)
            {
                if (used[j])
                {
                    u[p[j]] += delta;
                    v[j] -= delta;
                }
                else
                    minv[j] -= delta;
            }
            j0 = j1;
        } while (p[j0] != 0);
        do
        {
            std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j)
        assignment[p[j] - 1] = j - 1;
    return assignment;
}

double assignment_cost(int d, std::span<const double> a, std::span<const double> b, double cap)
{
    if (a.size() != b.size() || a.size() % d)
        throw RegimeError("assignment needs point sets of equal size");
    const std::size_t n = a.size() / d;
    std::vector<double> cost(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
        {
            double r2 = 0;
            for (int k = 0; k < d; ++k)
                r2 += (a[i * d + k] - b[j * d + k]) * (a[i * d + k] - b[j * d + k]);
            cost[i * n + j] = std::min(std::sqrt(r2), cap);
        }
    auto match = solve_assignment(n, cost);
    double total = 0;
    for (std::size_t i = 0; i < n; ++i)
        total += cost[i * n + match[i]];
    return total;
}

namespace {

double wasserstein_1d(const ParticleSystem& sys, const Reference& mu)
{
    const std::size_t N = sys.size();
    std::vector<double> x = sys.positions();
    std::sort(x.begin(), x.end());
    auto quantile = [&](double u) {
        double q;
        mu.transform_uniform(std::span<const double>(&u, 1), std::span<double>(&q, 1));
        return q;
    };
    const double lo = std::min(x.front(), quantile(0.0));
    const double hi = std::max(x.back(), quantile(std::nextafter(1.0, 0.0)));
    // F_N is the constant c on [a, b]; split where F crosses c
    auto piece = [&](double a, double b, double c) {
        if (!(b > a))
            return 0.0;
        auto f = [&](double y) { return std::abs(mu.cdf(y) - c); };
        double Fa = mu.cdf(a), Fb = mu.cdf(b);
        if (Fa < c && c < Fb)
        {
            double m = std::clamp(quantile(c), a, b);
            return quad::kronrod(f, a, m, 1e-10) + quad::kronrod(f, m, b, 1e-10);
        }
        return quad::kronrod(f, a, b, 1e-10);
    };
    double w = piece(lo, x.front(), 0);
    for (std::size_t k = 0; k + 1 < N; ++k)
        w += piece(x[k], x[k + 1], double(k + 1) / N);
    w += piece(x.back(), hi, 1);
    return w;
}

} // namespace

double bounded_lipschitz_distance(const ParticleSystem& sys, const Reference& mu, std::uint64_t seed)
{
    const std::size_t N = sys.size();
    const int d = sys.dim();
    if (N == 0)
        throw RegimeError("distance of an empty particle system");
    if (d == 1)
        return wasserstein_1d(sys, mu);
    const std::size_t M = bl_samples;
    std::vector<double> particles(M * d);
    for (std::size_t k = 0; k < M; ++k)
    {
        std::size_t i = k * N / M;
        std::copy_n(sys.position(i).begin(), d, particles.begin() + k * d);
    }
    std::vector<double> samples(M * d), u(d);
    double total = 0;
    for (int draw = 0; draw < bl_draws; ++draw)
    {
        for (std::size_t k = 0; k < M; ++k)
        {
            // stratified in the first coordinate of the inverse-CDF map
            UniformStream rng(seed, M, k, 2 + draw);
            u[0] = (k + rng.next()) / M;
            for (int a = 1; a < d; ++a)
                u[a] = rng.next();
            mu.transform_uniform(u, std::span<double>(samples).subspan(k * d, d));
        }
        total += assignment_cost(d, particles, samples, 2.0) / M;
    }
    return total / bl_draws;
}

} // namespace mflab
