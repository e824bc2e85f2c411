#include "mflab/exact_solution.hpp"

#include <cmath>

#include "mflab/errors.hpp"
#include "quadrature.hpp"

namespace mflab {

ExactFamily parse_exact_family(const std::string& name)
{
    if (name == "expanding_ball")
        return ExactFamily::expanding_ball;
    if (name == "barenblatt")
        return ExactFamily::barenblatt;
    if (name == "radial_vortex_patch")
        return ExactFamily::radial_vortex_patch;
    if (name == "uniform_ball_static")
        return ExactFamily::uniform_ball_static;
    throw ConfigError("init.family", "unknown family '" + name + "'");
}

std::string to_string(ExactFamily family)
{
    switch (family)
    {
    case ExactFamily::expanding_ball:
        return "expanding_ball";
    case ExactFamily::barenblatt:
        return "barenblatt";
    case ExactFamily::radial_vortex_patch:
        return "radial_vortex_patch";
    case ExactFamily::uniform_ball_static:
        return "uniform_ball_static";
    }
    return "?";
}

ExactSolution::ExactSolution(ExactFamily family, std::shared_ptr<const RadialProfile> profile, double R0,
                             std::vector<double> center)
    : family_(family), profile_(std::move(profile)), R0_(R0), center_(std::move(center))
{
    const int d = profile_->kernel().dim();
    if (!(R0 > 0))
        throw RegimeError("radius must be positive");
    if (center_.empty())
        center_.assign(d, 0.0);
    if (int(center_.size()) != d)
        throw RegimeError("centre has the wrong dimension");
    if (!is_static())
        rate_ = 2 * (kernel().s() + 2) * profile_->quadratic_coefficient() / profile_->mass();
}

ExactSolution ExactSolution::expanding_ball(const KernelSpec& spec, double R0, std::vector<double> center)
{
    if (!spec.is_coulomb())
        throw RegimeError("expanding_ball requires a Coulomb kernel");
    return {ExactFamily::expanding_ball, std::make_shared<RadialProfile>(spec, 0.0), R0, std::move(center)};
}

ExactSolution ExactSolution::barenblatt(const KernelSpec& spec, double R0, std::vector<double> center)
{
    return {ExactFamily::barenblatt, std::make_shared<RadialProfile>(spec, spec.excess() / 2), R0,
            std::move(center)};
}

ExactSolution ExactSolution::radial_vortex_patch(const KernelSpec& spec, double R, double profile_exponent,
                                                 std::vector<double> center)
{
    if (spec.dim() != 2)
        throw RegimeError("radial_vortex_patch is defined in d = 2");
    return {ExactFamily::radial_vortex_patch, std::make_shared<RadialProfile>(spec, profile_exponent), R,
            std::move(center)};
}

ExactSolution ExactSolution::uniform_ball_static(const KernelSpec& spec, double R, std::vector<double> center)
{
    return {ExactFamily::uniform_ball_static, std::make_shared<RadialProfile>(spec, 0.0), R, std::move(center)};
}

bool ExactSolution::is_static() const
{
    return family_ == ExactFamily::radial_vortex_patch || family_ == ExactFamily::uniform_ball_static;
}

bool ExactSolution::solves(const FlowSpec& flow) const
{
    if (!flow.forcing.is_zero())
        return false;
    if (is_static())
        return flow.kind == FlowKind::conservative;
    return flow.kind == FlowKind::gradient;
}

double ExactSolution::radius(double t) const
{
    if (t < 0)
        throw RegimeError("exact solutions are evaluated for t >= 0");
    if (is_static())
        return R0_;
    double e = kernel().s() + 2;
    return std::pow(std::pow(R0_, e) + rate_ * t, 1 / e);
}

double ExactSolution::time_offset() const
{
    if (is_static())
        return 0;
    return std::pow(R0_, kernel().s() + 2) / rate_;
}

std::pair<double, double> ExactSolution::barenblatt_coefficients() const
{
    const int d = dim();
    double e = kernel().s() + 2;
    double rho0 = std::pow(rate_, 1 / e);
    double amplitude = 1 / (std::pow(rho0, d) * profile_->mass());
    double p = profile_->exponent();
    double a = p > 0 ? std::pow(amplitude, 1 / p) : amplitude;
    return {a, a / (rho0 * rho0)};
}

double ExactSolution::distance(std::span<const double> x) const
{
    double r2 = 0;
    for (std::size_t a = 0; a < center_.size(); ++a)
        r2 += (x[a] - center_[a]) * (x[a] - center_[a]);
    return std::sqrt(r2);
}

double ExactSolution::density(std::span<const double> x, double t) const
{
    double l = radius(t);
    return profile_->density(distance(x) / l) / (std::pow(l, dim()) * profile_->mass());
}

double ExactSolution::potential(std::span<const double> x, double t) const
{
    double l = radius(t);
    double phi = profile_->potential(distance(x) / l) / profile_->mass();
    if (kernel().mode() == KernelMode::log)
        return phi - std::log(l);
    return std::pow(l, -kernel().s()) * phi;
}

void ExactSolution::grad_potential(std::span<const double> x, double t, std::span<double> out) const
{
    const int d = dim();
    double l = radius(t);
    double rho = distance(x);
    if (rho == 0)
    {
        for (int a = 0; a < d; ++a)
            out[a] = 0;
        return;
    }
    double slope = profile_->potential_slope(rho / l) / profile_->mass() * std::pow(l, -kernel().s() - 1);
    for (int a = 0; a < d; ++a)
        out[a] = slope * (x[a] - center_[a]) / rho;
}

double ExactSolution::self_energy(double t) const
{
    double l = radius(t);
    double m = profile_->mass();
    double s0 = profile_->self_energy() / (m * m);
    if (kernel().mode() == KernelMode::log)
        return s0 - std::log(l);
    return std::pow(l, -kernel().s()) * s0;
}

double ExactSolution::spherical_mean(std::span<const double> x, double a, double t) const
{
    double l = radius(t);
    return profile_->spherical_mean(distance(x) / l, a / l) / (std::pow(l, dim()) * profile_->mass());
}

double ExactSolution::cdf(double r, double t) const
{
    return profile_->cdf(r / radius(t));
}

double ExactSolution::quantile(double u, double t) const
{
    return radius(t) * profile_->quantile(u);
}

MeasureGrid ExactSolution::rasterize(const GridGeometry& g, double t) const
{
    if (g.d != dim())
        throw RegimeError("grid dimension does not match the solution");
    MeasureGrid mu(g, t);
    const int d = g.d;
    const double l = radius(t);
    static const quad::Rule smooth = quad::gauss_legendre_unit(3);
    const int sub = 12;  // midpoint subsamples per axis in cells cut by the support boundary
    const double half_diag = 0.5 * g.h * std::sqrt(double(d));
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t kk = 0; kk < std::ptrdiff_t(g.size()); ++kk)
    {
        double c[3], y[3];
        g.cell_center(kk, {c, std::size_t(d)});
        double r = distance({c, std::size_t(d)});
        bool cut = std::abs(r - l) <= half_diag;
        if (!cut && r > l)
            continue;
        double total = 0;
        if (cut)
        {
            std::size_t count = 1;
            for (int a = 0; a < d; ++a)
                count *= sub;
            for (std::size_t k = 0; k < count; ++k)
            {
                std::size_t rem = k;
                for (int a = 0; a < d; ++a)
                {
                    y[a] = c[a] + g.h * ((double(rem % sub) + 0.5) / sub - 0.5);
                    rem /= sub;
                }
                total += density({y, std::size_t(d)}, t);
            }
            total /= double(count);
        }
        else
        {
            std::size_t q = smooth.x.size();
            std::size_t count = 1;
            for (int a = 0; a < d; ++a)
                count *= q;
            for (std::size_t k = 0; k < count; ++k)
            {
                std::size_t rem = k;
                double w = 1;
                for (int a = 0; a < d; ++a)
                {
                    std::size_t i = rem % q;
                    rem /= q;
                    y[a] = c[a] + g.h * smooth.x[i];
                    w *= smooth.w[i];
                }
                total += w * density({y, std::size_t(d)}, t);
            }
        }
        mu.values[kk] = total;
    }
    mu.normalize();
    return mu;
}

} // namespace mflab
