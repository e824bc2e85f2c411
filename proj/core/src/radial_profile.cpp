#include "mflab/radial_profile.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include <boost/math/special_functions/beta.hpp>

#include "mflab/errors.hpp"
#include "quadrature.hpp"

namespace mflab {

namespace {
constexpr double pi = std::numbers::pi;
// radii below this contribute nothing representable but can overflow g
constexpr double tiny = 1e-150;
}

double barenblatt_quadratic_coefficient(const KernelSpec& spec)
{
    // Fractional Laplacian of (1-|z|^2)_+^{beta/2} is constant on the ball;
    // alpha = d - s is the order of the operator inverting g.
    const int d = spec.dim();
    const double alpha = d - spec.s();
    const double beta = 2 - alpha;
    double gamma_alpha;
    if (spec.mode() == KernelMode::log)
        gamma_alpha = std::pow(2.0, d - 1) * std::pow(pi, d / 2.0) * std::tgamma(d / 2.0);
    else
        gamma_alpha = std::pow(pi, d / 2.0) * std::pow(2.0, alpha) * std::tgamma(alpha / 2)
                      / std::tgamma((d - alpha) / 2);
    return gamma_alpha * std::pow(2.0, beta) * std::tgamma(1 + beta / 2) * std::tgamma((d + beta) / 2)
           / (2 * d * std::tgamma(d / 2.0));
}

RadialProfile::RadialProfile(const KernelSpec& spec, double p) : spec_(spec), p_(p)
{
    if (!(p >= 0))
        throw RegimeError("profile exponent must be non-negative");
    const int d = spec.dim();
    mass_ = std::pow(pi, d / 2.0) * std::tgamma(p + 1) / std::tgamma(p + 1 + d / 2.0);
    quadratic_ = std::abs(p - spec.excess() / 2) < 1e-14;
    if (quadratic_)
        b0_ = barenblatt_quadratic_coefficient(spec);

    const double area = sphere_area(d);
    if (spec.is_coulomb() && p == 0)
    {
        // uniform ball: closed forms
        if (spec.mode() == KernelMode::log)
        {
            phi0_ = mass_ * 0.5;
            self_energy_ = mass_ * mass_ * 0.25;
        }
        else
        {
            phi0_ = mass_ * d / 2.0;
            self_energy_ = mass_ * mass_ * 2.0 * d / (d + 2);
        }
        return;
    }
    if (d == 1 && p == 0)
    {
        // indicator of [-1, 1]
        if (spec.mode() == KernelMode::log)
        {
            phi0_ = 2;
            self_energy_ = 6 - 4 * std::log(2.0);
        }
        else
        {
            const double s = spec.s();
            phi0_ = 2 / (1 - s);
            self_energy_ = 2 * std::pow(2.0, 2 - s) / ((1 - s) * (2 - s));
        }
        return;
    }
    phi0_ = area * quad::tanh_sinh([&](double r) { return r > tiny ? density(r) * std::pow(r, d - 1) * spec_.g(r) : 0.0; }, 0, 1);
    if (quadratic_)
    {
        // F0 (Phi0 - B0 r^2) integrates in closed form: E[r^2] = (d/2) / (d/2 + p + 1)
        self_energy_ = mass_ * (phi0_ - b0_ * (d / 2.0) / (d / 2.0 + p + 1));
        return;
    }
    lazy_self_energy_ = true;
}

double RadialProfile::self_energy() const
{
    if (!lazy_self_energy_)
        return self_energy_;
    std::call_once(*self_energy_once_, [this] {
        const int d = spec_.dim();
        // Phi is itself a quadrature, so adaptive rules chase its noise; a fixed
        // Gauss rule in r = 1 - (1 - u)^2 absorbs the (1 - r^2)^p endpoint.
        static const quad::Rule rule = quad::gauss_legendre_unit(64);
        double sum = 0;
        for (std::size_t q = 0; q < rule.x.size(); ++q)
        {
            double u = rule.x[q] + 0.5;
            double r = 1 - (1 - u) * (1 - u);
            sum += rule.w[q] * 2 * (1 - u) * density(r) * potential(r) * std::pow(r, d - 1);
        }
        self_energy_ = sphere_area(d) * sum;
    });
    return self_energy_;
}

double RadialProfile::density(double r) const
{
    if (r >= 1)
        return 0;
    return p_ == 0 ? 1.0 : std::pow(1 - r * r, p_);
}

double RadialProfile::shell_kernel(double rho, double r) const
{
    // integral of g(rho e - y) over the sphere |y| = r, divided by r^{d-1}
    const int d = spec_.dim();
    if (d == 1)
    {
        double a = std::abs(rho - r);
        return (a > 0 ? spec_.g(a) : 0.0) + spec_.g(rho + r);
    }
    if (rho == 0 || r == 0)
        return sphere_area(d) * spec_.g(std::max(rho, r));
    if (spec_.is_coulomb())
        return sphere_area(d) * spec_.g(std::max(rho, r));
    if (d == 3)
    {
        double s = spec_.s();
        double lo = std::abs(rho - r), hi = rho + r;
        if (s == 2)
            return lo > 0 ? 2 * pi / (rho * r) * std::log(hi / lo) : 0.0;
        return 2 * pi / (rho * r) * (std::pow(hi, 2 - s) - std::pow(lo, 2 - s)) / (2 - s);
    }
    double dr2 = (rho - r) * (rho - r);
    double prod = 4 * rho * r;
    auto f = [&](double th) {
        double sn = std::sin(th / 2);
        double q2 = dr2 + prod * sn * sn;
        if (q2 <= 0)
            return 0.0;
        return spec_.g_r2(q2) * std::pow(std::sin(th), d - 2);
    };
    return sphere_area(d - 1) * quad::tanh_sinh(f, 0, pi, 1e-11);
}

double RadialProfile::potential_quadrature(double rho) const
{
    const int d = spec_.dim();
    if (d == 1 || d == 3)
    {
        auto f = [&](double r) { return r > tiny ? density(r) * std::pow(r, d - 1) * shell_kernel(rho, r) : 0.0; };
        if (rho > 0 && rho < 1)
            return quad::tanh_sinh(f, 0, rho) + quad::tanh_sinh(f, rho, 1);
        return quad::tanh_sinh(f, 0, 1);
    }
    // Centre the shells on the query point instead: Phi(rho) = |S| int g(t) t^{d-1} m(rho, t) dt.
    // The kernel singularity sits at the endpoint t = 0 and the only kink at |1 - rho|.
    auto f = [&](double t) { return t > tiny ? spec_.g(t) * std::pow(t, d - 1) * spherical_mean(rho, t) : 0.0; };
    const double kink = std::abs(1 - rho);
    double sum = quad::tanh_sinh(f, kink, rho + 1, 1e-10);
    if (rho < 1)
        sum += quad::tanh_sinh(f, 0, kink, 1e-10);
    return sphere_area(d) * sum;
}

double RadialProfile::potential(double rho) const
{
    const int d = spec_.dim();
    if (quadratic_ && rho <= 1)
        return phi0_ - b0_ * rho * rho;
    if (d == 1 && p_ == 0)
    {
        double a = 1 + rho, b = std::abs(1 - rho);
        if (spec_.mode() == KernelMode::log)
        {
            auto xlogx = [](double x) { return x > 0 ? x * std::log(x) : 0.0; };
            return rho <= 1 ? 2 - xlogx(a) - xlogx(b) : 2 - xlogx(a) + xlogx(b);
        }
        const double e = 1 - spec_.s();
        return rho <= 1 ? (std::pow(a, e) + std::pow(b, e)) / e : (std::pow(a, e) - std::pow(b, e)) / e;
    }
    if (spec_.is_coulomb())
    {
        if (p_ == 0)
            return rho <= 1 ? phi0_ - b0_ * rho * rho : mass_ * spec_.g(rho);
        // shell theorem: mass inside rho sees g(rho), shells outside see g(r)
        double inside = mass_ * cdf(rho);
        double outside = 0;
        if (rho < 1)
            outside = sphere_area(d)
                      * quad::tanh_sinh([&](double r) { return r > tiny ? density(r) * std::pow(r, d - 1) * spec_.g(r) : 0.0; }, rho, 1);
        return (rho > 0 ? inside * spec_.g(rho) : 0.0) + outside;
    }
    return potential_quadrature(rho);
}

double RadialProfile::potential_slope(double rho) const
{
    if (rho == 0)
        return 0;
    if (spec_.is_coulomb())
        return spec_.dg(rho) * mass_ * cdf(rho);
    if (quadratic_ && rho < 1)
        return -2 * b0_ * rho;
    // fourth-order central difference, one-sided near the origin
    double dl = 1e-3 * std::min(1.0, rho);
    double a = potential(rho + 2 * dl), b = potential(rho + dl), c = potential(rho - dl), e = potential(rho - 2 * dl);
    return (-a + 8 * b - 8 * c + e) / (12 * dl);
}

double RadialProfile::cdf(double r) const
{
    if (r <= 0)
        return 0;
    if (r >= 1)
        return 1;
    return boost::math::ibeta(spec_.dim() / 2.0, p_ + 1, r * r);
}

double RadialProfile::quantile(double u) const
{
    if (u <= 0)
        return 0;
    if (u >= 1)
        return 1;
    return std::sqrt(boost::math::ibeta_inv(spec_.dim() / 2.0, p_ + 1, u));
}

double RadialProfile::spherical_mean(double rho, double a) const
{
    const int d = spec_.dim();
    if (a == 0)
        return density(rho);
    if (d == 1)
        return 0.5 * (density(std::abs(rho - a)) + density(rho + a));
    if (rho == 0)
        return density(a);
    // points of the sphere at polar angle theta lie at radius^2 = rho^2 + a^2 + 2 rho a cos(theta)
    double cstar = (1 - rho * rho - a * a) / (2 * rho * a);
    if (cstar <= -1)
        return 0;
    double theta_star = cstar >= 1 ? 0 : std::acos(cstar);
    if (p_ == 0)
    {
        if (cstar >= 1)
            return 1;
        // fraction of the sphere with theta >= theta_star
        double half = 0.5 * boost::math::ibeta((d - 1) / 2.0, 0.5, std::pow(std::sin(theta_star), 2));
        double cap = theta_star <= pi / 2 ? half : 1 - half;
        return 1 - cap;
    }
    double norm = std::sqrt(pi) * std::tgamma((d - 1) / 2.0) / std::tgamma(d / 2.0);
    auto f = [&](double th) {
        double r2 = rho * rho + a * a + 2 * rho * a * std::cos(th);
        return density(std::sqrt(std::max(r2, 0.0))) * std::pow(std::sin(th), d - 2);
    };
    return quad::tanh_sinh(f, theta_star, pi, 1e-11) / norm;
}

} // namespace mflab
