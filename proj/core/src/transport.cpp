#include "mflab/transport.hpp"

#include <algorithm>
#include <cmath>

#include "mflab/errors.hpp"

namespace mflab {

TransportScheme parse_transport_scheme(const std::string& name)
{
    if (name == "upwind")
        return TransportScheme::upwind;
    if (name == "muscl")
        return TransportScheme::muscl;
    throw ConfigError("pde.scheme", "unknown scheme '" + name + "'");
}

std::string to_string(TransportScheme scheme)
{
    return scheme == TransportScheme::upwind ? "upwind" : "muscl";
}

namespace {
double minmod(double a, double b)
{
    if (a * b <= 0)
        return 0;
    return std::abs(a) < std::abs(b) ? a : b;
}
} // namespace

TransportSolver::TransportSolver(const GridGeometry& g, const KernelSpec& spec, std::vector<double> mobility,
                                 Forcing forcing, double forcing_scale, double cfl, TransportScheme scheme)
    : geom_(g)
    , spec_(spec)
    , mobility_(std::move(mobility))
    , forcing_(std::move(forcing))
    , forcing_scale_(forcing_scale)
    , cfl_(cfl)
    , scheme_(scheme)
    , solver_(g, spec, 1)
{
    if (mobility_.size() != std::size_t(g.d) * g.d)
        throw RegimeError("mobility matrix has the wrong size");
    if (!(cfl > 0 && cfl <= 1))
        throw RegimeError("cfl factor must lie in (0, 1]");
    if (scheme == TransportScheme::muscl && cfl > 0.5)
        throw RegimeError("the limited scheme needs a cfl factor of at most 1/2");
}

TransportSolver::Faces TransportSolver::face_velocities(const MeasureGrid& mu) const
{
    if (!(mu.geom == geom_))
        throw RegimeError("measure grid does not match the transport solver");
    const int d = geom_.d;
    const int n = geom_.n;
    const double h = geom_.h;
    auto pot = solver_.solve(mu.values);
    const auto& H = pot.values();
    const int m = n + 2;  // padded grid has one ghost layer

    std::vector<std::size_t> pstride(d);
    {
        std::size_t s = 1;
        for (int a = d - 1; a >= 0; --a)
        {
            pstride[a] = s;
            s *= m;
        }
    }
    Faces faces;
    faces.u.assign(geom_.size() * d, 0.0);
    std::vector<double> speed_sum(geom_.size(), 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t kk = 0; kk < std::ptrdiff_t(geom_.size()); ++kk)
    {
        int ijk[3];
        geom_.unflatten(kk, {ijk, std::size_t(d)});
        std::size_t p = 0;
        for (int a = 0; a < d; ++a)
            p = p * m + (ijk[a] + 1);
        double grad[3];
        double xf[3];
        for (int a = 0; a < d; ++a)
        {
            if (ijk[a] == n - 1)
                continue;  // boundary face: zero flux
            const std::size_t pa = p + pstride[a];
            for (int b = 0; b < d; ++b)
            {
                if (b == a)
                    grad[b] = (H[pa] - H[p]) / h;
                else
                    grad[b] = (H[p + pstride[b]] - H[p - pstride[b]] + H[pa + pstride[b]] - H[pa - pstride[b]])
                              / (4 * h);
            }
            double u = 0;
            for (int b = 0; b < d; ++b)
                u -= mobility_[a * d + b] * grad[b];
            if (!forcing_.is_zero())
            {
                for (int b = 0; b < d; ++b)
                    xf[b] = geom_.center(ijk[b]) + (b == a ? 0.5 * h : 0.0);
                double f[3] = {0, 0, 0};
                forcing_.accumulate({xf, std::size_t(d)}, forcing_scale_, {f, std::size_t(d)});
                u += f[a];
            }
            faces.u[kk * d + a] = u;
        }
    }
    // Outflow speed bound per cell: sum over axes of the largest face speed.
    double worst = 0;
    std::vector<std::size_t> stride(d);
    {
        std::size_t s = 1;
        for (int a = d - 1; a >= 0; --a)
        {
            stride[a] = s;
            s *= n;
        }
    }
    for (std::size_t k = 0; k < geom_.size(); ++k)
    {
        int ijk[3];
        geom_.unflatten(k, {ijk, std::size_t(d)});
        double sum = 0;
        for (int a = 0; a < d; ++a)
        {
            double up = std::max(faces.u[k * d + a], 0.0);
            double down = ijk[a] > 0 ? std::max(-faces.u[(k - stride[a]) * d + a], 0.0) : 0.0;
            sum += up + down;
        }
        worst = std::max(worst, sum);
    }
    faces.max_speed_sum = worst;
    return faces;
}

double TransportSolver::max_stable_dt(const MeasureGrid& mu) const
{
    auto faces = face_velocities(mu);
    if (faces.max_speed_sum == 0)
        return std::numeric_limits<double>::infinity();
    return cfl_ * geom_.h / faces.max_speed_sum;
}

MeasureGrid TransportSolver::euler(const MeasureGrid& mu, const Faces& faces, double dt) const
{
    const int d = geom_.d;
    const int n = geom_.n;
    std::vector<std::size_t> stride(d);
    {
        std::size_t s = 1;
        for (int a = d - 1; a >= 0; --a)
        {
            stride[a] = s;
            s *= n;
        }
    }
    const auto& v = mu.values;
    // Flux through the upper face of every cell, from the upwind side.
    std::vector<double> flux(geom_.size() * d, 0.0);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t kk = 0; kk < std::ptrdiff_t(geom_.size()); ++kk)
    {
        int ijk[3];
        geom_.unflatten(kk, {ijk, std::size_t(d)});
        for (int a = 0; a < d; ++a)
        {
            double u = faces.u[kk * d + a];
            if (u == 0)
                continue;
            const std::size_t up = u > 0 ? kk : kk + stride[a];
            const int iu = u > 0 ? ijk[a] : ijk[a] + 1;
            double face = v[up];
            if (scheme_ == TransportScheme::muscl && iu > 0 && iu < n - 1)
                face += (u > 0 ? 0.5 : -0.5) * minmod(v[up] - v[up - stride[a]], v[up + stride[a]] - v[up]);
            flux[kk * d + a] = u * face;
        }
    }
    MeasureGrid out(geom_, mu.time + dt);
    const double c = dt / geom_.h;
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t kk = 0; kk < std::ptrdiff_t(geom_.size()); ++kk)
    {
        int ijk[3];
        geom_.unflatten(kk, {ijk, std::size_t(d)});
        double div = 0;
        for (int a = 0; a < d; ++a)
        {
            div += flux[kk * d + a];
            if (ijk[a] > 0)
                div -= flux[(kk - stride[a]) * d + a];
        }
        out.values[kk] = std::max(v[kk] - c * div, 0.0);
    }
    return out;
}

MeasureGrid TransportSolver::apply(const MeasureGrid& mu, const Faces& faces, double dt) const
{
    if (scheme_ == TransportScheme::upwind)
        return euler(mu, faces, dt);
    // SSP-RK2: average of mu and two Euler stages
    auto stage = euler(mu, faces, dt);
    auto second = euler(stage, face_velocities(stage), dt);
    for (std::size_t k = 0; k < mu.values.size(); ++k)
        second.values[k] = 0.5 * (mu.values[k] + second.values[k]);
    second.time = mu.time + dt;
    return second;
}

MeasureGrid TransportSolver::step(const MeasureGrid& mu, double dt) const
{
    auto faces = face_velocities(mu);
    double allowed = faces.max_speed_sum > 0 ? cfl_ * geom_.h / faces.max_speed_sum
                                             : std::numeric_limits<double>::infinity();
    if (dt > allowed * (1 + 1e-12))
        throw CflError(dt, allowed);
    return apply(mu, faces, dt);
}

MeasureGrid TransportSolver::advance(const MeasureGrid& mu, double duration) const
{
    MeasureGrid cur = mu;
    const double target = mu.time + duration;
    while (cur.time < target)
    {
        auto faces = face_velocities(cur);
        double allowed = faces.max_speed_sum > 0 ? cfl_ * geom_.h / faces.max_speed_sum : target - cur.time;
        double dt = std::min(allowed, target - cur.time);
        bool last = dt >= target - cur.time;
        cur = apply(cur, faces, dt);
        if (last)
            cur.time = target;
    }
    return cur;
}

MeasureGrid evolve_dissipative(const MeasureGrid& mu, const KernelSpec& spec, double dt, double cfl)
{
    return TransportSolver(mu.geom, spec, FlowSpec::gradient().mobility(mu.geom.d), {}, 1, cfl).step(mu, dt);
}

MeasureGrid evolve_conservative(const MeasureGrid& mu, const KernelSpec& spec, double dt, std::vector<double> J,
                                double cfl)
{
    auto flow = FlowSpec::conservative(std::move(J));
    flow.validate(mu.geom.d);
    return TransportSolver(mu.geom, spec, flow.mobility(mu.geom.d), {}, 1, cfl).step(mu, dt);
}

} // namespace mflab
