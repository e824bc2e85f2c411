#include "mflab/reference.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mflab/errors.hpp"
#include "quadrature.hpp"

namespace mflab {

ClockMap ClockMap::for_flow(const FlowSpec& flow)
{
    if (flow.kind == FlowKind::newton)
        return {std::sqrt(2.0), std::sqrt(2.0)};
    return {2.0, 1.0};
}

void Reference::advance_to(double t)
{
    if (t < time_ - 1e-12)
        throw RegimeError("references only move forward in time");
    if (t > time_)
    {
        evolve_to(clock_.time * t);
        time_ = t;
    }
}

double Reference::f_eta_integral(std::span<const double> x, double eta) const
{
    return density(x) * integral_f_eta(kernel(), eta);
}

void Reference::velocity(std::span<const double>, std::span<double>) const
{
    throw RegimeError("this reference carries no velocity field");
}

// ---------------------------------------------------------------------------

ExactReference::ExactReference(ExactSolution sol, ClockMap clock) : Reference(clock), sol_(std::move(sol)) {}

std::unique_ptr<Reference> ExactReference::clone() const
{
    return std::make_unique<ExactReference>(*this);
}

double ExactReference::density(std::span<const double> x) const
{
    return sol_.density(x, tau_);
}

double ExactReference::potential(std::span<const double> x) const
{
    return sol_.potential(x, tau_);
}

void ExactReference::grad_potential(std::span<const double> x, std::span<double> out) const
{
    sol_.grad_potential(x, tau_, out);
}

double ExactReference::self_energy() const
{
    return sol_.self_energy(tau_);
}

double ExactReference::f_eta_integral(std::span<const double> x, double eta) const
{
    // radial integral of f_eta(a) against spherical means of mu about x
    const KernelSpec& spec = kernel();
    const int d = dim();
    auto f = [&](double a) {
        // below this the integrable singularity contributes nothing representable
        if (a <= 1e-150 * eta)
            return 0.0;
        return f_eta(spec, a, eta) * std::pow(a, d - 1) * sol_.spherical_mean(x, a, tau_);
    };
    // the spherical mean has a kink where the sphere first touches the support boundary
    double rho = 0;
    for (int k = 0; k < d; ++k)
        rho += (x[k] - sol_.center()[k]) * (x[k] - sol_.center()[k]);
    rho = std::sqrt(rho);
    double kink = std::abs(sol_.radius(tau_) - rho);
    double total;
    if (kink > 0 && kink < eta)
        total = quad::tanh_sinh(f, 0, kink, 1e-10) + quad::tanh_sinh(f, kink, eta, 1e-10);
    else
        total = quad::tanh_sinh(f, 0, eta, 1e-10);
    return sphere_area(d) * total;
}

void ExactReference::transform_uniform(std::span<const double> u, std::span<double> x) const
{
    const int d = dim();
    const auto& c = sol_.center();
    double r = sol_.quantile(u[0], tau_);
    if (d == 1)
    {
        // split the mass evenly between the two sides
        double v = u[0] < 0.5 ? 1 - 2 * u[0] : 2 * u[0] - 1;
        r = sol_.quantile(v, tau_);
        x[0] = c[0] + (u[0] < 0.5 ? -r : r);
        return;
    }
    constexpr double pi = std::numbers::pi;
    if (d == 2)
    {
        double th = 2 * pi * u[1];
        x[0] = c[0] + r * std::cos(th);
        x[1] = c[1] + r * std::sin(th);
        return;
    }
    if (d == 3)
    {
        double z = 1 - 2 * u[1];
        double rho = std::sqrt(std::max(0.0, 1 - z * z));
        double ph = 2 * pi * u[2];
        x[0] = c[0] + r * rho * std::cos(ph);
        x[1] = c[1] + r * rho * std::sin(ph);
        x[2] = c[2] + r * z;
        return;
    }
    throw RegimeError("sampling of exact references is implemented for d <= 3");
}

double ExactReference::cdf(double x) const
{
    if (dim() != 1)
        throw RegimeError("cdf is defined in d = 1");
    double y = x - sol_.center()[0];
    double m = sol_.cdf(std::abs(y), tau_);
    return y < 0 ? 0.5 * (1 - m) : 0.5 * (1 + m);
}

MeasureGrid ExactReference::rasterize(const GridGeometry& g) const
{
    return sol_.rasterize(g, tau_);
}

double ExactReference::extent() const
{
    double c = 0;
    for (double v : sol_.center())
        c += v * v;
    return std::sqrt(c) + sol_.radius(tau_);
}

// ---------------------------------------------------------------------------

GridBackedReference::GridBackedReference(MeasureGrid mu, const KernelSpec& spec, ClockMap clock)
    : Reference(clock), spec_(spec), mu_(std::move(mu)), solver_(mu_.geom, spec, mu_.geom.n / 2)
{
    if (mu_.geom.d != spec.dim())
        throw RegimeError("grid dimension does not match the kernel");
    mu_.validate();
    refresh();
}

void GridBackedReference::set_density(MeasureGrid mu)
{
    mu_ = std::move(mu);
    refresh();
}

void GridBackedReference::refresh()
{
    h_ = solver_.solve(mu_.values);
    grad_ = h_.gradient();
    self_energy_ = solver_.energy(mu_.values);

    const auto& g = mu_.geom;
    const int n = g.n;
    const double vol = g.cell_volume();
    const auto& v = mu_.values;
    auto cumulate = [n](const double* w, double* out) {
        out[0] = 0;
        for (int i = 0; i < n; ++i)
            out[i + 1] = out[i] + w[i];
    };
    std::vector<double> rows;
    if (g.d == 1)
    {
        rows.assign(v.begin(), v.end());
        for (double& r : rows)
            r *= vol;
        cum0_.resize(n + 1);
        cumulate(rows.data(), cum0_.data());
    }
    else if (g.d == 2)
    {
        cum1_.resize(std::size_t(n) * (n + 1));
        std::vector<double> slab(n);
        for (int i = 0; i < n; ++i)
        {
            double* c = &cum1_[std::size_t(i) * (n + 1)];
            cumulate(&v[std::size_t(i) * n], c);
            slab[i] = c[n];
        }
        cum0_.resize(n + 1);
        cumulate(slab.data(), cum0_.data());
    }
    else
    {
        const std::size_t nn = std::size_t(n) * n;
        cum2_.resize(nn * (n + 1));
        std::vector<double> line(nn);
        for (std::size_t ij = 0; ij < nn; ++ij)
        {
            double* c = &cum2_[ij * (n + 1)];
            cumulate(&v[ij * n], c);
            line[ij] = c[n];
        }
        cum1_.resize(std::size_t(n) * (n + 1));
        std::vector<double> slab(n);
        for (int i = 0; i < n; ++i)
        {
            double* c = &cum1_[std::size_t(i) * (n + 1)];
            cumulate(&line[std::size_t(i) * n], c);
            slab[i] = c[n];
        }
        cum0_.resize(n + 1);
        cumulate(slab.data(), cum0_.data());
    }
}

double GridBackedReference::density(std::span<const double> x) const
{
    const auto& g = mu_.geom;
    if (!g.contains(x))
        return 0;
    int ijk[3];
    for (int a = 0; a < g.d; ++a)
        ijk[a] = std::clamp(int(std::floor((x[a] - g.lo) / g.h)), 0, g.n - 1);
    return mu_.values[g.flatten({ijk, std::size_t(g.d)})];
}

double GridBackedReference::potential(std::span<const double> x) const
{
    return h_.at(x);
}

void GridBackedReference::grad_potential(std::span<const double> x, std::span<double> out) const
{
    auto st = interpolation_stencil(h_.geometry(), x);
    for (int a = 0; a < dim(); ++a)
    {
        double v = 0;
        for (std::size_t c = 0; c < st.index.size(); ++c)
            v += st.weight[c] * grad_[a].values()[st.index[c]];
        out[a] = v;
    }
}

double GridBackedReference::self_energy() const
{
    return self_energy_;
}

namespace {
// Position in [lo, lo + n h] whose cumulative mass is u * cum[n], linear inside cells.
double invert_cumulative(const double* cum, int n, double lo, double h, double u, int& cell)
{
    double target = u * cum[n];
    int i = int(std::upper_bound(cum, cum + n + 1, target) - cum) - 1;
    i = std::clamp(i, 0, n - 1);
    while (i > 0 && cum[i + 1] - cum[i] <= 0 && cum[i] >= target)
        --i;
    while (i < n - 1 && cum[i + 1] - cum[i] <= 0)
        ++i;
    double w = cum[i + 1] - cum[i];
    double frac = w > 0 ? std::clamp((target - cum[i]) / w, 0.0, 1.0) : 0.5;
    cell = i;
    return lo + (i + frac) * h;
}
} // namespace

void GridBackedReference::transform_uniform(std::span<const double> u, std::span<double> x) const
{
    const auto& g = mu_.geom;
    const int n = g.n;
    int i = 0, j = 0, k = 0;
    x[0] = invert_cumulative(cum0_.data(), n, g.lo, g.h, u[0], i);
    if (g.d == 1)
        return;
    if (g.d == 2)
    {
        x[1] = invert_cumulative(&cum1_[std::size_t(i) * (n + 1)], n, g.lo, g.h, u[1], j);
        return;
    }
    x[1] = invert_cumulative(&cum1_[std::size_t(i) * (n + 1)], n, g.lo, g.h, u[1], j);
    x[2] = invert_cumulative(&cum2_[(std::size_t(i) * n + j) * (n + 1)], n, g.lo, g.h, u[2], k);
}

double GridBackedReference::cdf(double x) const
{
    const auto& g = mu_.geom;
    if (g.d != 1)
        throw RegimeError("cdf is defined in d = 1");
    double u = (x - g.lo) / g.h;
    if (u <= 0)
        return 0;
    if (u >= g.n)
        return cum0_[g.n] > 0 ? 1 : 0;
    int i = int(std::floor(u));
    double c = cum0_[i] + (u - i) * (cum0_[i + 1] - cum0_[i]);
    return c / cum0_[g.n];
}

MeasureGrid GridBackedReference::rasterize(const GridGeometry& g) const
{
    if (g == mu_.geom)
        return mu_;
    // cell averages by sampling the piecewise-constant density on a sub-lattice
    const int sub = 4;
    MeasureGrid out(g, time());
    const int d = g.d;
    std::vector<double> x(d);
#pragma omp parallel for schedule(static) firstprivate(x)
    for (std::ptrdiff_t kk = 0; kk < std::ptrdiff_t(g.size()); ++kk)
    {
        int ijk[3];
        g.unflatten(kk, {ijk, std::size_t(d)});
        int total = 1;
        for (int a = 0; a < d; ++a)
            total *= sub;
        double acc = 0;
        for (int q = 0; q < total; ++q)
        {
            int rem = q;
            for (int a = 0; a < d; ++a)
            {
                x[a] = g.lo + (ijk[a] + (rem % sub + 0.5) / sub) * g.h;
                rem /= sub;
            }
            acc += density(x);
        }
        out.values[kk] = acc / total;
    }
    if (out.mass() > 0)
        out.normalize();
    return out;
}

double GridBackedReference::extent() const
{
    const auto& g = mu_.geom;
    return std::max(std::abs(g.lo), std::abs(g.hi())) * std::sqrt(double(g.d));
}

// ---------------------------------------------------------------------------

GridReference::GridReference(MeasureGrid mu0, const KernelSpec& spec, const FlowSpec& flow, ClockMap clock,
                             bool evolve, double cfl, TransportScheme scheme)
    : GridBackedReference(mu0, spec, clock), state_(std::move(mu0))
{
    if (evolve)
    {
        if (flow.kind == FlowKind::newton)
            throw RegimeError("Newton flows pair with an Euler-Poisson reference");
        transport_.emplace(state_.geom, spec, flow.mobility(spec.dim()), flow.forcing, 1 / clock.time, cfl, scheme);
    }
}

std::unique_ptr<Reference> GridReference::clone() const
{
    return std::make_unique<GridReference>(*this);
}

void GridReference::evolve_to(double pde_time)
{
    if (!transport_)
        return;
    state_ = transport_->advance(state_, pde_time - state_.time);
    set_density(state_);
}

// ---------------------------------------------------------------------------

namespace {
VelocityGrid scaled(VelocityGrid u, double factor)
{
    for (double& v : u.values)
        v *= factor;
    return u;
}
} // namespace

EulerPoissonReference::EulerPoissonReference(MeasureGrid mu0, const VelocityGrid& u0, const KernelSpec& spec,
                                             const FlowSpec& flow, ClockMap clock, EulerPoissonOptions options)
    : GridBackedReference(mu0, spec, clock)
    , solver_(mu0, scaled(u0, 1 / clock.velocity), spec, options, flow.forcing, 1 / (clock.time * clock.time))
    , u_(solver_.velocity())
{
}

std::unique_ptr<Reference> EulerPoissonReference::clone() const
{
    return std::make_unique<EulerPoissonReference>(*this);
}

void EulerPoissonReference::velocity(std::span<const double> x, std::span<double> out) const
{
    interpolate_vector(u_, x, out);
    for (int a = 0; a < dim(); ++a)
        out[a] *= clock().velocity;
}

void EulerPoissonReference::evolve_to(double pde_time)
{
    solver_.advance(pde_time - solver_.time());
    set_density(solver_.density());
    u_ = solver_.velocity();
}

// ---------------------------------------------------------------------------

std::vector<double> potential(const MeasureGrid& mu, const KernelSpec& spec, std::span<const double> points)
{
    PotentialSolver solver(mu.geom, spec, mu.geom.n / 2);
    auto h = solver.solve(mu.values);
    const int d = mu.geom.d;
    std::vector<double> out(points.size() / d);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = h.at(points.subspan(i * d, d));
    return out;
}

std::vector<double> potential(const ExactSolution& sol, double t, std::span<const double> points)
{
    const int d = sol.dim();
    std::vector<double> out(points.size() / d);
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = sol.potential(points.subspan(i * d, d), t);
    return out;
}

namespace {
std::vector<double> apply_mobility(const FlowSpec& flow, int d, std::vector<double> grad)
{
    if (flow.kind == FlowKind::newton)
        throw RegimeError("velocity() is defined for first-order flows");
    auto M = flow.mobility(d);
    std::vector<double> out(grad.size());
    for (std::size_t i = 0; i < grad.size() / d; ++i)
        for (int a = 0; a < d; ++a)
        {
            double v = 0;
            for (int b = 0; b < d; ++b)
                v -= M[a * d + b] * grad[i * d + b];
            out[i * d + a] = v;
        }
    return out;
}
} // namespace

std::vector<double> velocity(const MeasureGrid& mu, const KernelSpec& spec, const FlowSpec& flow,
                             std::span<const double> points)
{
    PotentialSolver solver(mu.geom, spec, mu.geom.n / 2);
    auto grad = solver.solve(mu.values).gradient();
    const int d = mu.geom.d;
    std::vector<double> g(points.size());
    for (std::size_t i = 0; i < points.size() / d; ++i)
        for (int a = 0; a < d; ++a)
            g[i * d + a] = grad[a].at(points.subspan(i * d, d));
    return apply_mobility(flow, d, std::move(g));
}

std::vector<double> velocity(const ExactSolution& sol, double t, const FlowSpec& flow,
                             std::span<const double> points)
{
    const int d = sol.dim();
    std::vector<double> g(points.size());
    for (std::size_t i = 0; i < points.size() / d; ++i)
        sol.grad_potential(points.subspan(i * d, d), t, std::span<double>(g).subspan(i * d, d));
    return apply_mobility(flow, d, std::move(g));
}

} // namespace mflab
