#include "mflab/kernel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "mflab/errors.hpp"

namespace mflab {

namespace {
constexpr double pi = std::numbers::pi;

// s * integral over S^{d+k-1} of |z|^gamma, where z is the extension coordinate.
// For k = 1 the sphere integral reduces to a Beta function.
double extension_constant(int d, double s, int k, double gamma, KernelMode mode)
{
    if (k == 0)
    {
        return mode == KernelMode::log ? 2 * pi : (d - 2) * sphere_area(d);
    }
    double weight = mode == KernelMode::log ? 1.0 : s;
    return weight * 2 * std::pow(pi, d / 2.0) * std::tgamma((gamma + 1) / 2)
           / std::tgamma((d + 1 + gamma) / 2);
}
} // namespace

KernelSpec KernelSpec::riesz(int d, double s)
{
    if (d < 1)
        throw RegimeError("dimension must be >= 1, got " + std::to_string(d));
    double lo = std::max(d - 2, 0);
    if (!(s >= lo && s < d) || (d <= 2 && !(s > 0)))
    {
        throw RegimeError("Riesz exponent s=" + std::to_string(s) + " outside the admissible range for d="
                          + std::to_string(d));
    }
    KernelSpec spec;
    spec.d_ = d;
    spec.mode_ = KernelMode::riesz;
    spec.s_ = s;
    spec.k_ = (d >= 3 && s == d - 2) ? 0 : 1;
    spec.gamma_ = s - d + 2 - spec.k_;
    spec.c_ds_ = extension_constant(d, s, spec.k_, spec.gamma_, spec.mode_);
    return spec;
}

KernelSpec KernelSpec::logarithmic(int d)
{
    if (d != 1 && d != 2)
        throw RegimeError("log kernel requires d in {1, 2}, got " + std::to_string(d));
    KernelSpec spec;
    spec.d_ = d;
    spec.mode_ = KernelMode::log;
    spec.s_ = 0;
    spec.k_ = d == 2 ? 0 : 1;
    spec.gamma_ = 2 - d - spec.k_;
    spec.c_ds_ = extension_constant(d, 0, spec.k_, spec.gamma_, spec.mode_);
    return spec;
}

double KernelSpec::g(double r) const
{
    return mode_ == KernelMode::log ? -std::log(r) : std::pow(r, -s_);
}

double KernelSpec::dg(double r) const
{
    return mode_ == KernelMode::log ? -1 / r : -s_ * std::pow(r, -s_ - 1);
}

double KernelSpec::g_r2(double r2) const
{
    return mode_ == KernelMode::log ? -0.5 * std::log(r2) : std::pow(r2, -0.5 * s_);
}

double KernelSpec::dg_over_r_r2(double r2) const
{
    return mode_ == KernelMode::log ? -1 / r2 : -s_ * std::pow(r2, -0.5 * s_ - 1);
}

double sphere_area(int d)
{
    return 2 * std::pow(pi, d / 2.0) / std::tgamma(d / 2.0);
}

double unit_ball_volume(int d)
{
    return sphere_area(d) / d;
}

namespace {
double norm2(std::span<const double> x)
{
    double r2 = 0;
    for (double v : x)
        r2 += v * v;
    return r2;
}
} // namespace

double eval_g(const KernelSpec& spec, std::span<const double> x)
{
    double r2 = norm2(x);
    if (r2 == 0)
        throw SingularityError("kernel evaluated at the origin");
    return spec.g_r2(r2);
}

void eval_grad_g(const KernelSpec& spec, std::span<const double> x, std::span<double> out)
{
    double r2 = norm2(x);
    if (r2 == 0)
        throw SingularityError("kernel gradient evaluated at the origin");
    double c = spec.dg_over_r_r2(r2);
    for (std::size_t a = 0; a < x.size(); ++a)
        out[a] = c * x[a];
}

double g_truncated(const KernelSpec& spec, double r, double eta)
{
    if (!(eta > 0))
        throw RegimeError("truncation radius must be positive");
    return r >= eta ? spec.g(r) : spec.g(eta);
}

double f_eta(const KernelSpec& spec, double r, double eta)
{
    if (!(eta > 0))
        throw RegimeError("truncation radius must be positive");
    if (r >= eta)
        return 0;
    if (r == 0)
        throw SingularityError("f_eta evaluated at the origin");
    return spec.g(r) - spec.g(eta);
}

double f_alpha_eta(const KernelSpec& spec, double r, double alpha, double eta)
{
    if (!(alpha > 0 && eta > 0))
        throw RegimeError("truncation radii must be positive");
    return g_truncated(spec, r, eta) - g_truncated(spec, r, alpha);
}

double eval_g_eta(const KernelSpec& spec, std::span<const double> x, double eta)
{
    return g_truncated(spec, std::sqrt(norm2(x)), eta);
}

double eval_f_alpha_eta(const KernelSpec& spec, std::span<const double> x, double alpha, double eta)
{
    return f_alpha_eta(spec, std::sqrt(norm2(x)), alpha, eta);
}

double integral_f_eta(const KernelSpec& spec, double eta)
{
    if (!(eta > 0))
        throw RegimeError("truncation radius must be positive");
    int d = spec.dim();
    if (spec.mode() == KernelMode::log)
        return sphere_area(d) * std::pow(eta, d) / (d * d);
    double s = spec.s();
    return sphere_area(d) * std::pow(eta, d - s) * s / (d * (d - s));
}

} // namespace mflab
