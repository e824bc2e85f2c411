#include "mflab/dynamics.hpp"

#include <algorithm>
#include <cmath>

#include "mflab/errors.hpp"

namespace mflab {

FlowKind parse_flow_kind(const std::string& name)
{
    if (name == "gradient")
        return FlowKind::gradient;
    if (name == "conservative")
        return FlowKind::conservative;
    if (name == "mixed")
        return FlowKind::mixed;
    if (name == "newton")
        return FlowKind::newton;
    throw ConfigError("flow.kind", "unknown flow kind '" + name + "'");
}

std::string to_string(FlowKind kind)
{
    switch (kind)
    {
    case FlowKind::gradient:
        return "gradient";
    case FlowKind::conservative:
        return "conservative";
    case FlowKind::mixed:
        return "mixed";
    case FlowKind::newton:
        return "newton";
    }
    return "?";
}

Forcing Forcing::parse_kind(const std::string& name)
{
    Forcing f;
    if (name == "zero")
        f.kind = Kind::zero;
    else if (name == "constant_drift")
        f.kind = Kind::constant_drift;
    else if (name == "linear_confinement")
        f.kind = Kind::linear_confinement;
    else
        throw ConfigError("flow.forcing.kind", "unknown forcing '" + name + "'");
    return f;
}

std::string to_string(Forcing::Kind kind)
{
    switch (kind)
    {
    case Forcing::Kind::zero:
        return "zero";
    case Forcing::Kind::constant_drift:
        return "constant_drift";
    case Forcing::Kind::linear_confinement:
        return "linear_confinement";
    }
    return "?";
}

void Forcing::accumulate(std::span<const double> x, double scale, std::span<double> out) const
{
    switch (kind)
    {
    case Kind::zero:
        return;
    case Kind::constant_drift:
        for (std::size_t a = 0; a < x.size(); ++a)
            out[a] += scale * drift[a];
        return;
    case Kind::linear_confinement:
        for (std::size_t a = 0; a < x.size(); ++a)
            out[a] -= scale * lambda * x[a];
        return;
    }
}

std::vector<double> default_symplectic_matrix(int d)
{
    std::vector<double> J(std::size_t(d) * d, 0.0);
    for (int a = 0; a + 1 < d; a += 2)
    {
        J[a * d + a + 1] = -1;
        J[(a + 1) * d + a] = 1;
    }
    return J;
}

FlowSpec FlowSpec::conservative(std::vector<double> J)
{
    FlowSpec f;
    f.kind = FlowKind::conservative;
    f.J = std::move(J);
    return f;
}

FlowSpec FlowSpec::mixed(double alpha, double beta, std::vector<double> J)
{
    FlowSpec f;
    f.kind = FlowKind::mixed;
    f.mix_alpha = alpha;
    f.mix_beta = beta;
    f.J = std::move(J);
    return f;
}

std::vector<double> FlowSpec::symplectic(int d) const
{
    return J.empty() ? default_symplectic_matrix(d) : J;
}

void FlowSpec::validate(int d) const
{
    if (!J.empty())
    {
        if (J.size() != std::size_t(d) * d)
            throw ConfigError("flow.J", "expected a " + std::to_string(d) + "x" + std::to_string(d) + " matrix");
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                if (std::abs(J[a * d + b] + J[b * d + a]) > 1e-12)
                    throw ConfigError("flow.J", "matrix is not antisymmetric");
    }
    if (kind == FlowKind::mixed && !(mix_alpha > 0))
        throw ConfigError("flow.mix_alpha", "must be positive");
    if (forcing.kind == Forcing::Kind::constant_drift && forcing.drift.size() != std::size_t(d))
        throw ConfigError("flow.forcing.drift", "expected " + std::to_string(d) + " components");
}

std::vector<double> FlowSpec::mobility(int d) const
{
    std::vector<double> M(std::size_t(d) * d, 0.0);
    auto identity = [&](double c) {
        for (int a = 0; a < d; ++a)
            M[a * d + a] += c;
    };
    switch (kind)
    {
    case FlowKind::gradient:
    case FlowKind::newton:
        identity(1);
        break;
    case FlowKind::conservative:
        M = symplectic(d);
        break;
    case FlowKind::mixed: {
        auto Jm = symplectic(d);
        for (std::size_t k = 0; k < M.size(); ++k)
            M[k] = mix_beta * Jm[k];
        identity(mix_alpha);
        break;
    }
    }
    return M;
}

void IntegratorConfig::validate() const
{
    if (!(dt_floor > 0))
        throw ConfigError("time.dt_floor", "must be positive");
    if (!(dt > dt_floor))
        throw ConfigError("time.dt", "must exceed dt_floor");
    if (!(collision_fraction > 0 && collision_fraction < 1))
        throw ConfigError("time.collision_fraction", "must lie in (0, 1)");
}

namespace {

struct Derivative
{
    std::vector<double> dx;
    std::vector<double> dv;  // newton only
    std::vector<double> nearest;
};

// First-order velocity M f_i + F(x_i), or (v, f_i + F(x_i)) for newton.
Derivative evaluate(int d, std::span<const double> x, std::span<const double> v, const FlowSpec& flow,
                    const std::vector<double>& M, const KernelSpec& spec)
{
    auto fe = evaluate_forces(d, x, spec);
    std::size_t n = x.size() / d;
    Derivative out;
    out.nearest = std::move(fe.nearest);
    std::vector<double> acc(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
    {
        const double* f = fe.force.data() + i * d;
        double* a = acc.data() + i * d;
        if (flow.kind == FlowKind::gradient || flow.kind == FlowKind::newton)
        {
            std::copy(f, f + d, a);
        }
        else
        {
            for (int r = 0; r < d; ++r)
            {
                double t = 0;
                for (int c = 0; c < d; ++c)
                    t += M[r * d + c] * f[c];
                a[r] = t;
            }
        }
        flow.forcing.accumulate(x.subspan(i * d, d), 1.0, {a, std::size_t(d)});
    }
    if (flow.kind == FlowKind::newton)
    {
        out.dx.assign(v.begin(), v.end());
        out.dv = std::move(acc);
    }
    else
    {
        out.dx = std::move(acc);
    }
    return out;
}

std::vector<double> axpy(const std::vector<double>& x, double h, const std::vector<double>& k)
{
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        out[i] = x[i] + h * k[i];
    return out;
}

} // namespace

std::vector<double> flow_rhs(const ParticleSystem& sys, const FlowSpec& flow, const KernelSpec& spec)
{
    const int d = sys.dim();
    auto M = flow.mobility(d);
    auto k = evaluate(d, sys.positions(), sys.velocities(), flow, M, spec);
    return flow.kind == FlowKind::newton ? k.dv : k.dx;
}

StepResult step_with(const ParticleSystem& sys, const FlowSpec& flow, const KernelSpec& spec,
                     const IntegratorConfig& cfg, double dt)
{
    const int d = sys.dim();
    const bool newton = flow.kind == FlowKind::newton;
    if (newton != sys.has_velocities())
        throw RegimeError(newton ? "newton flow requires velocities" : "velocities given for a first-order flow");
    flow.validate(d);
    const auto M = flow.mobility(d);
    const std::size_t n = sys.size();
    const auto& x0 = sys.positions();
    const auto& v0 = sys.velocities();

    // The first stage does not depend on h, so it is shared by all retries.
    Derivative k1 = evaluate(d, x0, v0, flow, M, spec);
    StepResult result;
    double h = dt;
    for (;;)
    {
        auto x2 = axpy(x0, h / 2, k1.dx);
        auto v2 = newton ? axpy(v0, h / 2, k1.dv) : std::vector<double>{};
        Derivative k2 = evaluate(d, x2, v2, flow, M, spec);
        auto x3 = axpy(x0, h / 2, k2.dx);
        auto v3 = newton ? axpy(v0, h / 2, k2.dv) : std::vector<double>{};
        Derivative k3 = evaluate(d, x3, v3, flow, M, spec);
        auto x4 = axpy(x0, h, k3.dx);
        auto v4 = newton ? axpy(v0, h, k3.dv) : std::vector<double>{};
        Derivative k4 = evaluate(d, x4, v4, flow, M, spec);

        std::vector<double> x1(x0.size());
        for (std::size_t k = 0; k < x1.size(); ++k)
            x1[k] = x0[k] + h / 6 * (k1.dx[k] + 2 * k2.dx[k] + 2 * k3.dx[k] + k4.dx[k]);

        bool too_far = false;
        if (cfg.adaptive && n > 1)
        {
            for (std::size_t i = 0; i < n && !too_far; ++i)
            {
                double m2 = 0;
                for (int a = 0; a < d; ++a)
                    m2 += std::pow(x1[i * d + a] - x0[i * d + a], 2);
                too_far = std::sqrt(m2) > cfg.collision_fraction * k1.nearest[i];
            }
        }
        if (too_far)
        {
            h /= 2;
            ++result.halvings;
            if (h < cfg.dt_floor)
                throw IntegratorError("time step fell below dt_floor", 0.0);
            continue;
        }
        if (newton)
        {
            std::vector<double> v1(v0.size());
            for (std::size_t k = 0; k < v1.size(); ++k)
                v1[k] = v0[k] + h / 6 * (k1.dv[k] + 2 * k2.dv[k] + 2 * k3.dv[k] + k4.dv[k]);
            result.state = ParticleSystem(d, std::move(x1), std::move(v1));
        }
        else
        {
            result.state = ParticleSystem(d, std::move(x1));
        }
        result.dt = h;
        return result;
    }
}

StepResult step(const ParticleSystem& sys, const FlowSpec& flow, const KernelSpec& spec, const IntegratorConfig& cfg)
{
    cfg.validate();
    return step_with(sys, flow, spec, cfg, cfg.dt);
}

std::vector<double> observation_times(double T, double every)
{
    if (T < 0)
        throw RegimeError("negative duration");
    if (!(every > 0))
        throw RegimeError("observation interval must be positive");
    std::vector<double> times{0.0};
    if (T == 0)
        return times;
    auto count = std::size_t(std::ceil(T / every - 1e-9));
    for (std::size_t k = 1; k <= count; ++k)
        times.push_back(std::min(double(k) * every, T));
    times.back() = T;
    return times;
}

std::vector<Snapshot> run(ParticleSystem sys, const FlowSpec& flow, const KernelSpec& spec,
                          const IntegratorConfig& cfg, double T, double every,
                          const std::vector<Observer>& observers, RunStats* stats)
{
    cfg.validate();
    flow.validate(sys.dim());
    auto times = observation_times(T, every > 0 ? every : cfg.dt);
    std::vector<Snapshot> out;
    out.reserve(times.size());
    auto observe = [&](double t) {
        for (const auto& obs : observers)
            obs(t, sys);
        out.push_back({t, sys});
    };
    observe(0.0);
    RunStats local;
    double t = 0;
    for (std::size_t k = 1; k < times.size(); ++k)
    {
        const double target = times[k];
        while (t < target)
        {
            double remaining = target - t;
            double h = remaining <= cfg.dt * (1 + 1e-9) ? remaining : cfg.dt;
            StepResult r;
            try
            {
                r = step_with(sys, flow, spec, cfg, h);
            }
            catch (const IntegratorError& e)
            {
                throw IntegratorError("time step fell below dt_floor", t);
            }
            catch (const Error& e)
            {
                throw IntegratorError(e.what(), t);
            }
            sys = std::move(r.state);
            ++local.steps;
            local.halvings += r.halvings;
            t = (r.dt == remaining) ? target : t + r.dt;
        }
        observe(target);
    }
    if (stats)
        *stats = local;
    return out;
}

double newton_energy(const ParticleSystem& sys, const KernelSpec& spec)
{
    const double n = double(sys.size());
    double kinetic = 0;
    for (double v : sys.velocities())
        kinetic += v * v;
    return kinetic / (2 * n) + interaction_energy(sys, spec) / (n * n);
}

} // namespace mflab
