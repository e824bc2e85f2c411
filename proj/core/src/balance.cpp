#include "mflab/balance.hpp"

#include <algorithm>
#include <cmath>

#include "mflab/errors.hpp"
#include "mflab/modulated_energy.hpp"
#include "mflab/potential_solver.hpp"

namespace mflab {

namespace {

// Gradient of the interpolated potential that F_N itself uses at the atoms;
// the centred-difference field differs from it at O(h) and spoils the balance.
void interpolant_gradient(const Reference& mu, std::span<const double> x, std::span<double> out)
{
    const int d = mu.dim();
    std::vector<double> y(x.begin(), x.end());
    for (int a = 0; a < d; ++a)
    {
        double e = 1e-7 * std::max(1.0, std::abs(x[a]));
        y[a] = x[a] + e;
        double hp = mu.potential(y);
        y[a] = x[a] - e;
        double hm = mu.potential(y);
        y[a] = x[a];
        out[a] = (hp - hm) / (2 * e);
    }
}

} // namespace

std::pair<double, double> balance_terms(const ParticleSystem& sys, const Reference& mu, const FlowSpec& flow)
{
    const KernelSpec& spec = mu.kernel();
    const int d = spec.dim();
    if (!(spec.s() < d - 1))
        throw RegimeError("the balance check needs s < d - 1");
    if (flow.kind == FlowKind::newton)
        throw RegimeError("the balance check is for first-order flows");
    const MeasureGrid* grid = mu.grid();
    if (!grid)
        throw RegimeError("the balance check needs a grid-backed reference");
    const auto M = flow.mobility(d);
    const std::size_t N = sys.size();
    const double n = double(N);
    const GridGeometry& geom = grid->geom;

    auto apply = [&](const double* v, double* out) {
        for (int a = 0; a < d; ++a)
        {
            out[a] = 0;
            for (int b = 0; b < d; ++b)
                out[a] += M[a * d + b] * v[b];
        }
    };

    // grad h at cell centres; field w = mu M grad h; int grad h . M grad h dmu
    std::vector<double> w(geom.size() * d);
    double bulk = 0;
    {
        std::vector<double> xc(d), gh(d), mg(d);
        for (std::size_t k = 0; k < geom.size(); ++k)
        {
            double rho = grid->values[k];
            if (rho == 0)
                continue;
            geom.cell_center(k, xc);
            mu.grad_potential(xc, gh);
            apply(gh.data(), mg.data());
            for (int a = 0; a < d; ++a)
            {
                w[k * d + a] = rho * mg[a];
                bulk += rho * gh[a] * mg[a];
            }
        }
        bulk *= geom.cell_volume();
    }
    // Q^M = div(g * w), one convolution per component
    PotentialSolver solver(geom, spec, 1);
    std::vector<ScalarField> dconv;
    std::vector<double> comp(geom.size());
    for (int a = 0; a < d; ++a)
    {
        for (std::size_t k = 0; k < geom.size(); ++k)
            comp[k] = w[k * d + a];
        dconv.push_back(solver.solve(comp).gradient()[a]);
    }

    auto F = evaluate_forces(d, sys.positions(), spec);
    double A = 0, pair = 0, atoms = 0;
    std::vector<double> H(d), MH(d), G(d);
    for (std::size_t i = 0; i < N; ++i)
    {
        auto xi = sys.position(i);
        interpolant_gradient(mu, xi, H);
        apply(H.data(), MH.data());
        for (int a = 0; a < d; ++a)
            G[a] = -0.5 * n * F.force[i * d + a];  // force row is -(2/N) G_i
        double q = 0;
        for (int a = 0; a < d; ++a)
            q += dconv[a].at(xi);
        for (int a = 0; a < d; ++a)
        {
            double z = G[a] / n - H[a];
            A += z * z;
            pair += MH[a] * G[a];
            atoms += MH[a] * H[a];
        }
        atoms -= q;
    }
    A *= -2 * n;
    // sum_{i != j} M(H_i - H_j) . grad g_ij = 2 sum_i M H_i . G_i
    double B = 2 * pair - 2 * n * atoms + 2 * n * n * bulk;
    return {A, B};
}

BalanceResult f1_balance_check(const ParticleSystem& sys, const Reference& mu, const FlowSpec& flow, double dt)
{
    if (!flow.forcing.is_zero())
        throw RegimeError("the balance check assumes no external forcing");
    const KernelSpec& spec = mu.kernel();
    IntegratorConfig cfg;
    cfg.dt = dt;
    cfg.adaptive = false;

    auto ref = mu.clone();
    const double t0 = ref->time();
    double F0 = modulated_energy(sys, *ref);
    ParticleSystem mid = step_with(sys, flow, spec, cfg, dt).state;
    ref->advance_to(t0 + dt);
    auto [A, B] = balance_terms(mid, *ref, flow);
    ParticleSystem end = step_with(mid, flow, spec, cfg, dt).state;
    ref->advance_to(t0 + 2 * dt);
    double F2 = modulated_energy(end, *ref);

    const double alpha = flow.kind == FlowKind::gradient ? 1.0
                         : flow.kind == FlowKind::mixed  ? flow.mix_alpha
                                                         : 0.0;
    BalanceResult r;
    r.lhs = (F2 - F0) / (2 * dt);
    r.dissipation = A;
    r.commutator = B;
    r.rhs = 2 * (alpha * A - B);
    r.rhs_as_stated = 2 * (alpha * A + B);
    r.relative = std::abs(r.lhs - r.rhs) / (std::abs(r.lhs) + std::abs(r.rhs) + double(sys.size()));
    return r;
}

} // namespace mflab
