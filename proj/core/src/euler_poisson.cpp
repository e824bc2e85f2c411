#include "mflab/euler_poisson.hpp"

#include <algorithm>
#include <cmath>

#include "mflab/errors.hpp"

namespace mflab {

namespace {

// Overlaps of the box [x - width/2, x + width/2] with the cells of one axis,
// as fractions of the box; parts beyond a face go to the boundary cell.
struct Overlap
{
    int count = 0;
    int index[8];
    double weight[8];
};

Overlap box_overlap(const GridGeometry& g, double x, double width)
{
    Overlap o;
    double lo = (x - g.lo) / g.h - 0.5 * width / g.h;
    double hi = lo + width / g.h;
    int first = int(std::floor(lo)), last = int(std::floor(hi));
    if (last - first >= 8 || !(width > 0))
    {
        // degenerate or very wide cloud: fall back to the nearest cell
        o.count = 1;
        o.index[0] = std::clamp(int(std::floor((x - g.lo) / g.h)), 0, g.n - 1);
        o.weight[0] = 1;
        return o;
    }
    for (int i = first; i <= last; ++i)
    {
        double w = (std::min(hi, double(i + 1)) - std::max(lo, double(i))) / (hi - lo);
        if (w <= 0)
            continue;
        int c = std::clamp(i, 0, g.n - 1);
        if (o.count > 0 && o.index[o.count - 1] == c)
            o.weight[o.count - 1] += w;
        else
        {
            o.index[o.count] = c;
            o.weight[o.count] = w;
            ++o.count;
        }
    }
    return o;
}

double det(const double* m, int d)
{
    if (d == 1)
        return m[0];
    if (d == 2)
        return m[0] * m[3] - m[1] * m[2];
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6])
           + m[2] * (m[3] * m[7] - m[4] * m[6]);
}

// inverse of a d x d matrix, d <= 3
void invert(const double* m, int d, double* out)
{
    double D = det(m, d);
    if (d == 1)
    {
        out[0] = 1 / D;
        return;
    }
    if (d == 2)
    {
        out[0] = m[3] / D;
        out[1] = -m[1] / D;
        out[2] = -m[2] / D;
        out[3] = m[0] / D;
        return;
    }
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
        {
            int r1 = (c + 1) % 3, r2 = (c + 2) % 3, c1 = (r + 1) % 3, c2 = (r + 2) % 3;
            out[r * 3 + c] = (m[r1 * 3 + c1] * m[r2 * 3 + c2] - m[r1 * 3 + c2] * m[r2 * 3 + c1]) / D;
        }
}

} // namespace

EulerPoissonSolver::EulerPoissonSolver(const MeasureGrid& mu0, const VelocityGrid& u0, const KernelSpec& spec,
                                       EulerPoissonOptions options, Forcing forcing, double forcing_scale)
    : geom_(mu0.geom)
    , spec_(spec)
    , opt_(options)
    , forcing_(std::move(forcing))
    , forcing_scale_(forcing_scale)
    , solver_(mu0.geom, spec, 1)
    , time_(mu0.time)
{
    if (!(u0.geom == mu0.geom))
        throw RegimeError("density and velocity grids differ");
    if (opt_.refine < 1)
        throw RegimeError("refine must be at least 1");
    if (!(opt_.cfl > 0 && opt_.cfl <= 1))
        throw RegimeError("cfl factor must lie in (0, 1]");
    mu0.validate();
    const int d = geom_.d;
    const int r = opt_.refine;
    m_ = geom_.n * r;
    spacing_ = geom_.h / r;
    std::size_t total = 1;
    for (int a = 0; a < d; ++a)
        total *= m_;
    slot_.assign(total, -1);
    const double sub_volume = std::pow(spacing_, d);
    int ijk[3], cell[3];
    double x[3], v[3];
    for (std::size_t l = 0; l < total; ++l)
    {
        std::size_t rem = l;
        for (int a = d - 1; a >= 0; --a)
        {
            ijk[a] = int(rem % m_);
            rem /= m_;
        }
        for (int a = 0; a < d; ++a)
        {
            cell[a] = ijk[a] / r;
            x[a] = geom_.lo + (ijk[a] + 0.5) * spacing_;
        }
        double rho = mu0.values[geom_.flatten({cell, std::size_t(d)})];
        if (rho <= 0)
            continue;
        if (r == 1)
            for (int a = 0; a < d; ++a)
                v[a] = u0.values[geom_.flatten({cell, std::size_t(d)}) * d + a];
        else
            interpolate_vector(u0, {x, std::size_t(d)}, {v, std::size_t(d)});
        slot_[l] = std::ptrdiff_t(mass_.size());
        lattice_.push_back(l);
        mass_.push_back(rho * sub_volume);
        for (int a = 0; a < d; ++a)
        {
            x_.push_back(x[a]);
            u_.push_back(v[a]);
        }
    }
}

void EulerPoissonSolver::cloud_extent(const std::vector<double>& x, std::size_t k, double* width) const
{
    const int d = geom_.d;
    const std::size_t l = lattice_[k];
    for (int a = 0; a < d; ++a)
        width[a] = 0;
    std::size_t stride = 1;
    for (int b = d - 1; b >= 0; --b)
    {
        int ib = int(l / stride) % m_;
        std::ptrdiff_t lo = ib > 0 ? slot_[l - stride] : -1;
        std::ptrdiff_t hi = ib < m_ - 1 ? slot_[l + stride] : -1;
        stride *= m_;
        std::size_t p = k, q = k;
        double span = 1;
        if (lo >= 0 && hi >= 0)
        {
            p = lo;
            q = hi;
            span = 2;
        }
        else if (hi >= 0)
            q = hi;
        else if (lo >= 0)
            p = lo;
        else
        {
            width[b] += spacing_;
            continue;
        }
        for (int a = 0; a < d; ++a)
            width[a] += std::abs(x[q * d + a] - x[p * d + a]) / span;
    }
}

std::vector<double> EulerPoissonSolver::deposit(const std::vector<double>& x, const double* weights) const
{
    // Accumulate sum_k weights_k * mass_k into cells; weights == nullptr deposits mass.
    // Each marker carries a box cloud that tiles space with its lattice
    // neighbours, so the deposit reproduces the initial density exactly.
    const int d = geom_.d;
    std::vector<double> out(geom_.size(), 0.0);
    for (std::size_t k = 0; k < mass_.size(); ++k)
    {
        const double* p = &x[k * d];
        if (!geom_.contains({p, std::size_t(d)}))
            throw ExtrapolationError("a Lagrangian marker left the grid box");
        double width[3];
        cloud_extent(x, k, width);
        Overlap o[3];
        for (int a = 0; a < d; ++a)
            o[a] = box_overlap(geom_, p[a], width[a]);
        double q = mass_[k] * (weights ? weights[k] : 1.0);
        int pick[3] = {0, 0, 0};
        while (true)
        {
            int idx[3];
            double w = q;
            for (int a = 0; a < d; ++a)
            {
                idx[a] = o[a].index[pick[a]];
                w *= o[a].weight[pick[a]];
            }
            out[geom_.flatten({idx, std::size_t(d)})] += w;
            int a = 0;
            while (a < d && ++pick[a] == o[a].count)
                pick[a++] = 0;
            if (a == d)
                break;
        }
    }
    return out;
}

std::vector<double> EulerPoissonSolver::acceleration(const std::vector<double>& x) const
{
    const int d = geom_.d;
    auto cellmass = deposit(x, nullptr);
    const double vol = geom_.cell_volume();
    for (double& v : cellmass)
        v /= vol;
    auto grad = solver_.solve(cellmass).gradient();
    std::vector<double> acc(x.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t kk = 0; kk < std::ptrdiff_t(mass_.size()); ++kk)
    {
        std::span<const double> p{&x[kk * d], std::size_t(d)};
        auto st = interpolation_stencil(grad[0].geometry(), p);
        double f[3] = {0, 0, 0};
        if (!forcing_.is_zero())
            forcing_.accumulate(p, forcing_scale_, {f, std::size_t(d)});
        for (int a = 0; a < d; ++a)
        {
            double g = 0;
            for (std::size_t c = 0; c < st.index.size(); ++c)
                g += st.weight[c] * grad[a].values()[st.index[c]];
            acc[kk * d + a] = -g + f[a];
        }
    }
    return acc;
}

double EulerPoissonSolver::stable_dt() const
{
    double vmax = 0;
    for (double v : u_)
        vmax = std::max(vmax, std::abs(v));
    auto acc = acceleration(x_);
    double amax = 0;
    for (double a : acc)
        amax = std::max(amax, std::abs(a));
    double dt = std::numeric_limits<double>::infinity();
    if (vmax > 0)
        dt = opt_.cfl * geom_.h / vmax;
    if (amax > 0)
        dt = std::min(dt, opt_.cfl * std::sqrt(geom_.h / amax));
    return dt;
}

void EulerPoissonSolver::step(double dt)
{
    const std::size_t n = x_.size();
    auto axpy = [n](const std::vector<double>& a, double c, const std::vector<double>& b) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = a[i] + c * b[i];
        return out;
    };
    const auto& k1x = u_;
    auto k1u = acceleration(x_);
    auto x2 = axpy(x_, dt / 2, k1x);
    auto k2x = axpy(u_, dt / 2, k1u);
    auto k2u = acceleration(x2);
    auto x3 = axpy(x_, dt / 2, k2x);
    auto k3x = axpy(u_, dt / 2, k2u);
    auto k3u = acceleration(x3);
    auto x4 = axpy(x_, dt, k3x);
    auto k4x = axpy(u_, dt, k3u);
    auto k4u = acceleration(x4);
    for (std::size_t i = 0; i < n; ++i)
    {
        x_[i] += dt / 6 * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i]);
        u_[i] += dt / 6 * (k1u[i] + 2 * k2u[i] + 2 * k3u[i] + k4u[i]);
    }
    time_ += dt;
    auto lag = lagrangian();
    if (lag.min_jacobian < opt_.jacobian_floor)
        throw ShockError("characteristic map degenerated (det " + std::to_string(lag.min_jacobian) + ")", time_);
    if (lag.max_velocity_gradient * time_ > opt_.gradient_threshold)
        throw ShockError("|grad u| t exceeded its threshold", time_);
}

void EulerPoissonSolver::advance(double duration)
{
    const double target = time_ + duration;
    while (time_ < target)
    {
        double dt = std::min(stable_dt(), target - time_);
        bool last = dt >= target - time_;
        step(dt);
        if (last)
            time_ = target;
    }
}

MeasureGrid EulerPoissonSolver::density() const
{
    MeasureGrid mu(geom_, time_);
    mu.values = deposit(x_, nullptr);
    const double vol = geom_.cell_volume();
    for (double& v : mu.values)
        v /= vol;
    return mu;
}

VelocityGrid EulerPoissonSolver::velocity() const
{
    const int d = geom_.d;
    const int n = geom_.n;
    auto mass = deposit(x_, nullptr);
    VelocityGrid out(geom_);
    std::vector<double> comp(mass_.size());
    for (int a = 0; a < d; ++a)
    {
        for (std::size_t k = 0; k < mass_.size(); ++k)
            comp[k] = u_[k * d + a];
        auto mom = deposit(x_, comp.data());
        for (std::size_t c = 0; c < geom_.size(); ++c)
            out.values[c * d + a] = mass[c] > 0 ? mom[c] / mass[c] : 0.0;
    }
    // fill empty cells layer by layer from their filled neighbours
    std::vector<char> filled(geom_.size());
    std::size_t missing = 0;
    for (std::size_t c = 0; c < geom_.size(); ++c)
    {
        filled[c] = mass[c] > 0;
        missing += !filled[c];
    }
    if (missing == geom_.size())
        return out;
    while (missing > 0)
    {
        auto next = filled;
        for (std::size_t c = 0; c < geom_.size(); ++c)
        {
            if (filled[c])
                continue;
            int ijk[3];
            geom_.unflatten(c, {ijk, std::size_t(d)});
            double sum[3] = {0, 0, 0};
            int count = 0;
            for (int a = 0; a < d; ++a)
                for (int sgn : {-1, 1})
                {
                    int nb[3] = {ijk[0], d > 1 ? ijk[1] : 0, d > 2 ? ijk[2] : 0};
                    nb[a] += sgn;
                    if (nb[a] < 0 || nb[a] >= n)
                        continue;
                    std::size_t q = geom_.flatten({nb, std::size_t(d)});
                    if (!filled[q])
                        continue;
                    for (int b = 0; b < d; ++b)
                        sum[b] += out.values[q * d + b];
                    ++count;
                }
            if (count == 0)
                continue;
            for (int b = 0; b < d; ++b)
                out.values[c * d + b] = sum[b] / count;
            next[c] = 1;
            --missing;
        }
        filled.swap(next);
    }
    return out;
}

EulerPoissonSolver::Lagrangian EulerPoissonSolver::lagrangian() const
{
    const int d = geom_.d;
    std::vector<std::size_t> stride(d);
    {
        std::size_t s = 1;
        for (int a = d - 1; a >= 0; --a)
        {
            stride[a] = s;
            s *= m_;
        }
    }
    Lagrangian out;
    for (std::size_t k = 0; k < mass_.size(); ++k)
    {
        const std::size_t l = lattice_[k];
        double DX[9] = {}, DU[9] = {};
        bool ok = true;
        for (int a = 0; a < d && ok; ++a)
        {
            int ia = int(l / stride[a]) % m_;
            std::ptrdiff_t lo = ia > 0 ? slot_[l - stride[a]] : -1;
            std::ptrdiff_t hi = ia < m_ - 1 ? slot_[l + stride[a]] : -1;
            std::size_t p = k, q = k;
            double span = 0;
            if (lo >= 0 && hi >= 0)
            {
                p = lo;
                q = hi;
                span = 2 * spacing_;
            }
            else if (hi >= 0)
            {
                q = hi;
                span = spacing_;
            }
            else if (lo >= 0)
            {
                p = lo;
                span = spacing_;
            }
            else
            {
                ok = false;
                break;
            }
            // column a: derivative along the initial lattice axis a
            for (int b = 0; b < d; ++b)
            {
                DX[b * d + a] = (x_[q * d + b] - x_[p * d + b]) / span;
                DU[b * d + a] = (u_[q * d + b] - u_[p * d + b]) / span;
            }
        }
        if (!ok)
            continue;
        double J = det(DX, d);
        out.min_jacobian = std::min(out.min_jacobian, J);
        if (J <= 0)
            continue;
        double inv[9];
        invert(DX, d, inv);
        double norm = 0;
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
            {
                double g = 0;
                for (int t = 0; t < d; ++t)
                    g += DU[r * d + t] * inv[t * d + c];
                norm += g * g;
            }
        out.max_velocity_gradient = std::max(out.max_velocity_gradient, std::sqrt(norm));
    }
    return out;
}

std::pair<MeasureGrid, VelocityGrid> evolve_euler_poisson(const MeasureGrid& mu, const VelocityGrid& u,
                                                          const KernelSpec& spec, double dt,
                                                          EulerPoissonOptions options)
{
    options.refine = 1;
    EulerPoissonSolver solver(mu, u, spec, options);
    double allowed = solver.stable_dt();
    if (dt > allowed * (1 + 1e-12))
        throw CflError(dt, allowed);
    solver.step(dt);
    return {solver.density(), solver.velocity()};
}

} // namespace mflab
