#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "configs.hpp"
#include "mflab/balance.hpp"
#include "mflab/distance.hpp"
#include "mflab/errors.hpp"
#include "mflab/modulated_energy.hpp"
#include "mflab/rate_fit.hpp"
#include "mflab/sampling.hpp"
#include "oracles.hpp"

using namespace mflab;
using std::numbers::pi;

namespace {

ParticleSystem points(int d, std::vector<double> x)
{
    return ParticleSystem(d, std::move(x));
}

// full Gauss-Legendre rule on [-1, 1]
struct Rule
{
    std::vector<double> x, w;
};

Rule legendre30()
{
    using G = boost::math::quadrature::gauss<double, 30>;
    Rule r;
    for (std::size_t k = 0; k < G::abscissa().size(); ++k)
    {
        r.x.push_back(G::abscissa()[k]);
        r.w.push_back(G::weights()[k]);
        r.x.push_back(-G::abscissa()[k]);
        r.w.push_back(G::weights()[k]);
    }
    return r;
}

// nodes and weights of the normalized surface measure of a sphere in R^3
std::vector<std::array<double, 4>> sphere_nodes(const std::array<double, 3>& c, double eta)
{
    auto gl = legendre30();
    const int nphi = 60;
    std::vector<std::array<double, 4>> out;
    for (std::size_t a = 0; a < gl.x.size(); ++a)
    {
        double u = gl.x[a], s = std::sqrt(1 - u * u);
        for (int b = 0; b < nphi; ++b)
        {
            double ph = 2 * pi * b / nphi;
            out.push_back({c[0] + eta * s * std::cos(ph), c[1] + eta * s * std::sin(ph), c[2] + eta * u,
                           gl.w[a] / 2 / nphi});
        }
    }
    return out;
}

double median_of(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    return v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
}

} // namespace

TEST_CASE("Philox4x32-10 known-answer vectors")
{
    using C = Philox4x32::Counter;
    CHECK(Philox4x32::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    CHECK(Philox4x32::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
          C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    CHECK(Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
          C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("uniform streams are reproducible and distinct per particle")
{
    UniformStream a(7, 64, 3), b(7, 64, 3), c(7, 64, 4), e(8, 64, 3);
    double sum = 0;
    for (int k = 0; k < 1000; ++k)
    {
        double x = a.next();
        CHECK(x == b.next());
        CHECK(x >= 0);
        CHECK(x < 1);
        sum += x;
    }
    CHECK(sum / 1000 == doctest::Approx(0.5).epsilon(0.05));
    UniformStream a2(7, 64, 3);
    double first = a2.next();
    CHECK(first != c.next());
    CHECK(first != e.next());
}

TEST_CASE("i.i.d. sampling reproduces the disk moments")
{
    auto spec = KernelSpec::logarithmic(2);
    ExactReference ref(ExactSolution::uniform_ball_static(spec, 1.0, {0.3, -0.2}));
    const std::size_t N = 4000;
    auto x = sample_iid(ref, N, 11);
    double mx = 0, my = 0, r2 = 0;
    for (std::size_t i = 0; i < N; ++i)
    {
        mx += x[2 * i];
        my += x[2 * i + 1];
        r2 += std::pow(x[2 * i] - 0.3, 2) + std::pow(x[2 * i + 1] + 0.2, 2);
        CHECK(std::hypot(x[2 * i] - 0.3, x[2 * i + 1] + 0.2) <= 1 + 1e-12);
    }
    // standard errors: 0.5 / sqrt(N) for the mean, 0.29 / sqrt(N) for |x|^2
    CHECK(std::abs(mx / N - 0.3) < 4 * 0.5 / std::sqrt(double(N)));
    CHECK(std::abs(my / N + 0.2) < 4 * 0.5 / std::sqrt(double(N)));
    CHECK(std::abs(r2 / N - 0.5) < 4 * 0.29 / std::sqrt(double(N)));
    CHECK(sample_iid(ref, N, 11) == x);
    CHECK(sample_iid(ref, N, 12) != x);
}

TEST_CASE("quantized sampling in d = 1 sits within a cell of the quantile grid")
{
    auto spec = KernelSpec::riesz(1, 0.5);
    ExactReference ref(ExactSolution::barenblatt(spec, 1.0));
    const std::size_t N = 200;
    auto sys = initial_particles(ref, N, 5, SamplingMode::quantized);
    double w1 = bounded_lipschitz_distance(sys, ref);
    CHECK(w1 <= 2.0 / N);
    auto iid = initial_particles(ref, N, 5, SamplingMode::iid);
    CHECK(bounded_lipschitz_distance(iid, ref) > w1);
    CHECK_THROWS_AS(parse_sampling_mode("sobol"), ConfigError);
}

TEST_CASE("quantized initial data is better prepared than i.i.d. data")
{
    auto spec = KernelSpec::logarithmic(2);
    ExactReference ref(ExactSolution::expanding_ball(spec, 1.0));
    const std::size_t N = 256;
    std::vector<double> iid;
    for (std::uint64_t seed = 0; seed < 8; ++seed)
        iid.push_back(modulated_energy(initial_particles(ref, N, seed, SamplingMode::iid), ref) / (N * N));
    double quantized = modulated_energy(initial_particles(ref, N, 0, SamplingMode::quantized), ref) / (N * N);
    INFO("quantized " << quantized << " iid median " << median_of(iid));
    CHECK(quantized < median_of(iid));
}

TEST_CASE("modulated energy of one point in the unit interval")
{
    auto spec = KernelSpec::riesz(1, 0.5);
    auto sol = ExactSolution::uniform_ball_static(spec, 0.5, {0.5});
    auto sys = points(1, {0.5});
    // h(1/2) = int_0^1 |1/2 - y|^{-1/2} dy and E = int_0^1 h
    auto h = [](double x) {
        auto f = [](double r) { return std::pow(r, -0.5); };
        double left = x > 0 ? oracle::integrate_from_zero(f, x, 1e-13) : 0.0;
        return left + (x < 1 ? oracle::integrate_from_zero(f, 1 - x, 1e-13) : 0.0);
    };
    double self = oracle::integrate(h, 0, 1, 1e-11);
    double expected = -2 * h(0.5) + self;
    CHECK(expected == doctest::Approx(8.0 / 3 - 4 * std::sqrt(2.0)).epsilon(1e-9));
    CHECK(modulated_energy(sys, sol, 0) == doctest::Approx(expected).epsilon(1e-10));
    CHECK(modulated_energy(sys, sol, 0) == doctest::Approx(-2.9902).epsilon(1e-4));

    auto g = GridGeometry::box(1, 512, 1.0);
    auto grid = sol.rasterize(g, 0);
    CHECK(modulated_energy(sys, grid, spec) == doctest::Approx(expected).epsilon(2e-3));
}

TEST_CASE("modulated energy matches brute-force quadrature for small N")
{
    SUBCASE("d = 2 log, uniform disk, N = 4")
    {
        auto spec = KernelSpec::logarithmic(2);
        auto sys = points(2, {0.1, 0.2, -0.5, 0.3, 0.7, -0.6, 1.2, 0.4});
        auto g = [&](double r) { return spec.g(r); };
        auto F = [](double r) { return r < 1 ? 1 / pi : 0.0; };
        double cross = 0;
        for (std::size_t i = 0; i < 4; ++i)
            cross += oracle::radial_potential(2, g, F, std::hypot(sys.position(i)[0], sys.position(i)[1]));
        // classical: the log self-energy of the uniform unit disk is 1/4
        double self = 0.25;
        double brute = interaction_energy(sys, spec) - 2 * 4 * cross + 16 * self;
        CHECK(modulated_energy(sys, ExactSolution::uniform_ball_static(spec, 1.0), 0) ==
              doctest::Approx(brute).epsilon(1e-6));
    }
    SUBCASE("d = 3 Riesz s = 1.5, Barenblatt profile, N = 3")
    {
        auto spec = KernelSpec::riesz(3, 1.5);
        auto sol = ExactSolution::barenblatt(spec, 1.0);
        const double p = spec.excess() / 2;
        double mass = oracle::radial_mass(3, [p](double r) { return std::pow(1 - r * r, p); });
        auto F = [p, mass](double r) { return r < 1 ? std::pow(1 - r * r, p) / mass : 0.0; };
        auto g = [&](double r) { return spec.g(r); };
        auto sys = points(3, {0.1, 0.2, 0.3, -0.4, 0.0, 0.5, 0.6, -0.6, 0.1});
        double cross = 0;
        for (std::size_t i = 0; i < 3; ++i)
        {
            auto x = sys.position(i);
            cross += oracle::radial_potential(3, g, F, std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]));
        }
        // r = 1 - v^2 turns the (1 - r)^p edge into a smooth power of v
        auto gl = legendre30();
        double self = 0;
        for (std::size_t k = 0; k < gl.x.size(); ++k)
        {
            double v = 0.5 * (gl.x[k] + 1), r = 1 - v * v;
            self += 0.5 * gl.w[k] * 2 * v * 4 * pi * r * r * F(r) * oracle::radial_potential(3, g, F, r);
        }
        double brute = interaction_energy(sys, spec) - 2 * 3 * cross + 9 * self;
        CHECK(modulated_energy(sys, sol, 0) == doctest::Approx(brute).epsilon(1e-6));
    }
}

TEST_CASE("modulated energy is translation invariant")
{
    for (auto spec : {KernelSpec::logarithmic(2), KernelSpec::riesz(3, 1.0), KernelSpec::riesz(1, 0.5)})
    {
        const int d = spec.dim();
        auto sys = testcfg::random_ball(d, 6, 1.0, 3);
        std::vector<double> a = {0.7, -1.3, 2.1};
        a.resize(d);
        auto moved = sys;
        for (std::size_t i = 0; i < 6; ++i)
            for (int k = 0; k < d; ++k)
                moved.position(i)[k] += a[k];
        double F0 = modulated_energy(sys, ExactSolution::barenblatt(spec, 1.0), 0.3);
        double F1 = modulated_energy(moved, ExactSolution::barenblatt(spec, 1.0, a), 0.3);
        CHECK(std::abs(F0 - F1) < 1e-9 * std::max(1.0, std::abs(F0)));
    }
}

TEST_CASE("i.i.d. modulated energy has mean -N E(mu)")
{
    // E sum_{i != j} g = N(N-1) E, E sum h(x_i) = N E, so E F_N = -N E(mu) and
    // F_N / N^2 decreases in N exactly when E(mu) < 0.
    auto spec = KernelSpec::logarithmic(2);
    // F_N + N E is scale free for the log kernel, so a wide disk makes the trend visible over the noise
    for (double R : {1.0, std::exp(4.0)})
    {
        ExactReference ref(ExactSolution::uniform_ball_static(spec, R));
        const double E = ref.self_energy();
        CHECK(E == doctest::Approx(0.25 - std::log(R)).epsilon(1e-10));
        std::vector<double> med;
        for (std::size_t N : {64, 128, 256, 512})
        {
            std::vector<double> v;
            for (std::uint64_t seed = 0; seed < 8; ++seed)
                v.push_back(modulated_energy(initial_particles(ref, N, seed, SamplingMode::iid), ref));
            double mean = std::accumulate(v.begin(), v.end(), 0.0) / v.size();
            // the per-sample spread of F_N / N is O(1); 8 samples
            CHECK(std::abs(mean / N + E) < 1.5);
            med.push_back(median_of(v) / double(N * N));
        }
        if (E < 0)
            for (std::size_t k = 1; k < med.size(); ++k)
                CHECK(med[k] < med[k - 1]);
    }
}

TEST_CASE("self energies")
{
    CHECK(self_energy(ExactSolution::uniform_ball_static(KernelSpec::riesz(3, 1.0), 1.0), 0) ==
          doctest::Approx(1.2).epsilon(1e-12));
    CHECK(self_energy(ExactSolution::uniform_ball_static(KernelSpec::riesz(1, 0.5), 0.5, {0.5}), 0) ==
          doctest::Approx(8.0 / 3).epsilon(1e-12));
    auto spec = KernelSpec::riesz(2, 0.5);
    double E1 = self_energy(ExactSolution::barenblatt(spec, 1.0), 0);
    double E2 = self_energy(ExactSolution::barenblatt(spec, 1.7), 0);
    CHECK(E2 == doctest::Approx(E1 * std::pow(1.7, -0.5)).epsilon(1e-8));

    auto log2 = KernelSpec::logarithmic(2);
    auto sol = ExactSolution::radial_vortex_patch(log2, 1.0, 3.0);
    auto g = GridGeometry::box(2, 128, 1.25);
    CHECK(self_energy(sol.rasterize(g, 0), log2) == doctest::Approx(sol.self_energy(0)).epsilon(1e-3));
}

TEST_CASE("truncated energy matches spherical quadrature for two particles")
{
    auto spec = KernelSpec::riesz(3, 1.0);
    ExactReference ref(ExactSolution::uniform_ball_static(spec, 1.0));
    std::array<double, 3> x1{0.9, 0, 0}, x2{0.2, 0.3, -0.1};
    auto sys = points(3, {x1[0], x1[1], x1[2], x2[0], x2[1], x2[2]});
    std::vector<double> eta{0.15, 0.1};
    REQUIRE(eta[0] <= minimal_distances(sys).r[0]);

    // smeared charges are uniform sphere measures in the Coulomb case
    auto s1 = sphere_nodes(x1, eta[0]), s2 = sphere_nodes(x2, eta[1]);
    double pair = 0;
    for (const auto& a : s1)
        for (const auto& b : s2)
            pair += a[3] * b[3] / std::sqrt(std::pow(a[0] - b[0], 2) + std::pow(a[1] - b[1], 2) + std::pow(a[2] - b[2], 2));
    auto shell_self = [](double e) {
        return 0.5 * oracle::integrate([e](double u) { return 1 / (e * std::sqrt(2 - 2 * u)); }, -1, 1, 1e-13);
    };
    // mean of the ball potential over the sphere |y - x| = e, as a function of u = cos(angle to x)
    auto ball_h = [](double r) { return r < 1 ? (3 - r * r) / 2 : 1 / r; };
    auto sphere_mean_h = [&](const std::array<double, 3>& x, double e) {
        double a = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
        auto f = [&](double u) { return 0.5 * ball_h(std::sqrt(a * a + e * e + 2 * a * e * u)); };
        double uk = (1 - a * a - e * e) / (2 * a * e);
        if (uk > -1 && uk < 1)
            return oracle::integrate_smooth(f, -1, uk, 1e-13) + oracle::integrate_smooth(f, uk, 1, 1e-13);
        return oracle::integrate_smooth(f, -1, 1, 1e-13);
    };
    double oracle_te = 2 * pair + shell_self(eta[0]) + shell_self(eta[1]) -
                       2 * 2 * (sphere_mean_h(x1, eta[0]) + sphere_mean_h(x2, eta[1])) + 4 * 1.2;
    double te = truncated_energy(sys, ref, eta);
    CHECK(te == doctest::Approx(oracle_te).epsilon(1e-6));
    CHECK(std::abs(te - oracle_te) < 1e-6);
    CHECK(te >= 0);
}

TEST_CASE("truncated energy tends to F_N as eta -> 0")
{
    for (auto spec : {KernelSpec::logarithmic(2), KernelSpec::riesz(3, 1.5), KernelSpec::riesz(1, 0.5)})
    {
        const int d = spec.dim();
        ExactReference ref(ExactSolution::barenblatt(spec, 1.0));
        auto sys = testcfg::random_ball(d, 5, 0.8, 9, 0.05);
        double F = modulated_energy(sys, ref);
        double prev = 0;
        for (double eta : {1e-2, 1e-3, 1e-4})
        {
            std::vector<double> e(5, eta);
            double gap = truncated_energy(sys, ref, e) - 5 * spec.g(eta) - F;
            // correction 2N sum int f_eta dmu ~ eta^{d - s}
            double scale = 2 * 5 * 5 * std::pow(eta, d - spec.s());
            CHECK(gap >= 0);
            CHECK(gap < scale * 10);
            if (prev > 0)
                CHECK(gap < prev);
            prev = gap;
        }
    }
}

TEST_CASE("truncated energy at eta = r is nonnegative")
{
    std::vector<KernelSpec> specs = {KernelSpec::riesz(1, 0.5), KernelSpec::logarithmic(1), KernelSpec::logarithmic(2),
                                     KernelSpec::riesz(2, 0.5), KernelSpec::riesz(3, 1.0), KernelSpec::riesz(3, 2.0)};
    for (const auto& spec : specs)
    {
        const int d = spec.dim();
        ExactReference ref(ExactSolution::barenblatt(spec, 1.0));
        for (unsigned seed = 0; seed < 20; ++seed)
        {
            auto sys = testcfg::random_ball(d, 2 + seed % 7, 1.3, 100 + seed);
            auto r = minimal_distances(sys).r;
            CHECK(truncated_energy(sys, ref, r) >= 0);
        }
    }
}

TEST_CASE("truncated energy rejects overlapping balls")
{
    auto spec = KernelSpec::logarithmic(2);
    ExactReference ref(ExactSolution::expanding_ball(spec, 1.0));
    auto sys = points(2, {0, 0, 0.1, 0});
    auto r = minimal_distances(sys).r;
    std::vector<double> big{r[0] * 1.01, r[1]};
    CHECK_THROWS_AS(truncated_energy(sys, ref, big), RegimeError);
    CHECK_THROWS_AS(truncated_energy(points(2, {0, 0, 0, 0}), ref, r), RegimeError);
    CHECK_THROWS_AS(modulated_energy(points(2, {0, 0, 0, 0}), ref), CollisionError);
}

TEST_CASE("monokinetic energy")
{
    auto spec = KernelSpec::logarithmic(2);
    ExactReference ref(ExactSolution::expanding_ball(spec, 1.0));
    auto g = GridGeometry::box(2, 32, 2.0);
    VelocityGrid u(g);
    std::vector<double> c(2);
    for (std::size_t k = 0; k < g.size(); ++k)
    {
        g.cell_center(k, c);
        u.values[2 * k] = 0.3 * c[0] - c[1];
        u.values[2 * k + 1] = 0.3 * c[1] + c[0];
    }
    auto sys = testcfg::random_ball(2, 12, 0.9, 4);
    std::vector<double> v(24);
    for (std::size_t i = 0; i < 12; ++i)
        interpolate_vector(u, sys.position(i), std::span<double>(v).subspan(2 * i, 2));
    sys.set_velocities(v);
    double F = modulated_energy(sys, ref);
    CHECK(monokinetic_energy(sys, ref, u) == doctest::Approx(F).epsilon(1e-12));

    VelocityGrid zero(g);
    double kin = 0;
    for (double x : v)
        kin += x * x;
    CHECK(monokinetic_energy(sys, ref, zero) == doctest::Approx(12 * kin + F).epsilon(1e-12));

    // rigid boost of both fields
    auto rng = std::mt19937_64(3);
    std::normal_distribution<double> nd;
    auto sv = v;
    for (auto& x : sv)
        x += 0.1 * nd(rng);
    sys.set_velocities(sv);
    double H = monokinetic_energy(sys, ref, u);
    CHECK(H >= F);
    auto boosted = sys;
    auto ub = u;
    for (std::size_t i = 0; i < 12; ++i)
    {
        boosted.velocity(i)[0] += 1.5;
        boosted.velocity(i)[1] -= 0.5;
    }
    for (std::size_t k = 0; k < g.size(); ++k)
    {
        ub.values[2 * k] += 1.5;
        ub.values[2 * k + 1] -= 0.5;
    }
    CHECK(monokinetic_energy(boosted, ref, ub) == doctest::Approx(H).epsilon(1e-12));
}

TEST_CASE("weak-strong and Euler-Poisson gaps")
{
    auto spec = KernelSpec::logarithmic(2);
    auto g = GridGeometry::box(2, 64, 2.0);
    auto a = ExactSolution::radial_vortex_patch(spec, 1.0, 2.0).rasterize(g, 0);
    auto b = ExactSolution::radial_vortex_patch(spec, 1.0, 2.0, {0.15, 0.0}).rasterize(g, 0);
    CHECK(weak_strong_gap(a, a, spec) == 0);
    double ab = weak_strong_gap(a, b, spec);
    CHECK(ab > 0);
    CHECK(weak_strong_gap(b, a, spec) == doctest::Approx(ab).epsilon(1e-12));

    // re-rasterizing through a coarser grid changes the density only at grid level
    auto coarse = ExactSolution::radial_vortex_patch(spec, 1.0, 2.0).rasterize(GridGeometry::box(2, 32, 2.0), 0);
    GridReference back(coarse, spec, FlowSpec::gradient(), {}, false);
    auto again = back.rasterize(g);
    CHECK(weak_strong_gap(a, again, spec) < 0.05 * ab);

    VelocityGrid u1(g), u2(g);
    CHECK(euler_poisson_gap(a, u1, a, u2, spec) == 0);
    for (std::size_t k = 0; k < g.size(); ++k)
        u2.values[2 * k] = 0.5;
    CHECK(euler_poisson_gap(a, u1, a, u2, spec) == doctest::Approx(0.25 * a.mass()).epsilon(1e-12));
    CHECK(euler_poisson_gap(a, u1, b, u2, spec) == doctest::Approx(0.25 * a.mass() + ab).epsilon(1e-12));
    CHECK_THROWS_AS(weak_strong_gap(a, coarse, spec), RegimeError);
}

TEST_CASE("assignment solver agrees with brute force")
{
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 5; ++trial)
    {
        const std::size_t n = 6;
        std::vector<double> cost(n * n);
        for (auto& c : cost)
            c = u(rng);
        auto match = solve_assignment(n, cost);
        double got = 0;
        for (std::size_t i = 0; i < n; ++i)
            got += cost[i * n + match[i]];
        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        double best = 1e300;
        do
        {
            double s = 0;
            for (std::size_t i = 0; i < n; ++i)
                s += cost[i * n + perm[i]];
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
    }
    std::vector<double> pts{0, 0, 1, 1, 2, -1, 5, 5};
    CHECK(assignment_cost(2, pts, pts, 2.0) == 0);
}

TEST_CASE("distance to mu decreases as the sample grows")
{
    auto spec = KernelSpec::logarithmic(2);
    ExactReference ref(ExactSolution::uniform_ball_static(spec, 1.0));
    std::vector<double> small, large;
    for (std::uint64_t seed = 0; seed < 3; ++seed)
    {
        small.push_back(bounded_lipschitz_distance(initial_particles(ref, 32, seed, SamplingMode::iid), ref, seed));
        large.push_back(bounded_lipschitz_distance(initial_particles(ref, 512, seed, SamplingMode::iid), ref, seed));
    }
    CHECK(median_of(large) < median_of(small));

    auto spec1 = KernelSpec::riesz(1, 0.5);
    ExactReference line(ExactSolution::uniform_ball_static(spec1, 0.5, {0.5}));
    // W1 of a single atom at 1/2 against uniform[0, 1] is 1/4
    CHECK(bounded_lipschitz_distance(points(1, {0.5}), line) == doctest::Approx(0.25).epsilon(1e-9));
    std::vector<double> q;
    for (int i = 0; i < 10; ++i)
        q.push_back((i + 0.5) / 10);
    // midpoints of ten cells: 10 * 2 * (0.05^2 / 2)
    CHECK(bounded_lipschitz_distance(points(1, q), line) == doctest::Approx(0.025).epsilon(1e-9));
}

TEST_CASE("rate fit recovers synthetic power laws")
{
    std::vector<DiagnosticsRecord> recs;
    for (std::size_t N : {64, 128, 256, 512, 1024})
        for (double t : {0.0, 0.25, 0.5})
            for (std::uint64_t seed : {0, 1, 2})
            {
                DiagnosticsRecord r;
                r.t = t;
                r.N = N;
                r.seed = seed;
                r.F_N = 7 * std::pow(double(N), 1.5) * std::exp(2 * t);
                recs.push_back(r);
            }
    auto fit = fit_rate(recs);
    CHECK(fit.beta_hat == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(std::abs(fit.beta_hat - 1.5) < 1e-6);
    CHECK(fit.C1_hat == doctest::Approx(7 * std::exp(1.0)).epsilon(1e-9));
    CHECK(std::abs(fit.C2_hat - 2) < 1e-6);
    CHECK(fit.r_squared == doctest::Approx(1.0));
    CHECK_FALSE(fit.shifted);
    CHECK(fit.T == 0.5);
    CHECK(fit.N_c2 == 1024);

    nlohmann::json j = fit;
    CHECK(j["beta_hat"].get<double>() == fit.beta_hat);

    std::vector<DiagnosticsRecord> three(recs.begin(), recs.begin() + 27);
    CHECK_THROWS_AS(fit_rate(three), RegimeError);

    // negative values are lifted by the lower bound TE_r - F_N
    for (auto& r : recs)
    {
        r.TE_r = r.F_N;
        r.F_N = -r.F_N;
    }
    auto shifted = fit_rate(recs);
    CHECK(shifted.shifted);
    CHECK(shifted.beta_hat == doctest::Approx(1.5).epsilon(1e-9));
    CHECK(shifted.max_shift > 0);
}

TEST_CASE("energy balance along the gradient and conservative flows")
{
    auto spec = KernelSpec::logarithmic(2);
    auto sol = ExactSolution::uniform_ball_static(spec, 1.0);
    auto g = GridGeometry::box(2, 256, 1.5);
    ExactReference exact(sol);
    auto sys = initial_particles(exact, 8, 3, SamplingMode::iid);
    for (auto flow : {FlowSpec::gradient(), FlowSpec::conservative()})
    {
        GridReference ref(sol.rasterize(g, 0), spec, flow, ClockMap::for_flow(flow));
        auto r = f1_balance_check(sys, ref, flow, 1e-4);
        INFO("flow " << to_string(flow.kind) << " lhs " << r.lhs << " rhs " << r.rhs << " stated " << r.rhs_as_stated);
        CHECK(r.relative <= 1e-2);
        CHECK(r.dissipation <= 0);
    }
    // near-quantized atoms: the dissipation term is small and nonpositive
    auto q = initial_particles(exact, 16, 0, SamplingMode::quantized);
    GridReference ref(sol.rasterize(g, 0), spec, FlowSpec::gradient(), ClockMap::for_flow(FlowSpec::gradient()));
    auto [A, B] = balance_terms(q, ref, FlowSpec::gradient());
    CHECK(A <= 0);
    (void)B;

    auto riesz = KernelSpec::riesz(2, 1.5);
    GridReference bad(ExactSolution::barenblatt(riesz, 1.0).rasterize(GridGeometry::box(2, 32, 1.5), 0), riesz,
                      FlowSpec::gradient(), {2, 1}, false);
    CHECK_THROWS_AS(balance_terms(q, bad, FlowSpec::gradient()), RegimeError);
}
