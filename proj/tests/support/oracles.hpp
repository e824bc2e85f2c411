#pragma once

// Independent reference computations for tests. Nothing here calls into the
// library's own quadrature paths.

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace oracle {

constexpr double pi = std::numbers::pi;

// Integral over [a, b]; tolerates integrable endpoint singularities.
inline double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-12)
{
    boost::math::quadrature::tanh_sinh<double> ts(15);
    return ts.integrate(f, a, b, tol);
}

// Integral over [0, b] of a function with an integrable power singularity at 0,
// after the substitution r = b t^2.
inline double integrate_from_zero(const std::function<double(double)>& f, double b, double tol = 1e-12)
{
    auto g = [&](double t) {
        double r = b * t * t;
        // contributions below 1e-150 b are far beneath double precision here
        return !(r > 1e-150 * b) ? 0.0 : f(r) * 2 * b * t;
    };
    return integrate(g, 0, 1, tol);
}

// Adaptive Gauss-Kronrod for smooth integrands.
inline double integrate_smooth(const std::function<double(double)>& f, double a, double b, double tol = 1e-12)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol);
}

inline double sphere_area(int d)
{
    // |S^{d-1}| by recursion |S^{d-1}| = 2 pi / (d - 2) |S^{d-3}|
    if (d == 1)
        return 2;
    if (d == 2)
        return 2 * pi;
    return 2 * pi / (d - 2) * sphere_area(d - 2);
}

// Potential at distance rho of the radial density F supported in [0, 1], by
// direct integration over shells and polar angle. g takes a distance.
inline double radial_potential(int d, const std::function<double(double)>& g,
                               const std::function<double(double)>& F, double rho)
{
    auto shell = [&](double r) -> double {
        if (d == 1)
            return (rho != r ? g(std::abs(rho - r)) : 0.0) + (rho + r > 0 ? g(rho + r) : 0.0);
        auto angular = [&](double th) {
            double q = rho * rho + r * r - 2 * rho * r * std::cos(th);
            double dist = std::sqrt(std::max(q, 0.0));
            if (dist == 0)
                return 0.0;
            return g(dist) * (d == 2 ? 2.0 : 2 * pi * std::sin(th));
        };
        return integrate(angular, 0, pi, 1e-10);
    };
    auto radial = [&](double r) {
        double w = d == 1 ? 1.0 : d == 2 ? r : r * r;
        return w == 0 ? 0.0 : w * F(r) * shell(r);
    };
    if (rho > 0 && rho < 1)
        return integrate(radial, 0, rho, 1e-9) + integrate(radial, rho, 1, 1e-9);
    return integrate(radial, 0, 1, 1e-9);
}

// Integral of F over R^d for a radial F supported in [0, 1].
inline double radial_mass(int d, const std::function<double(double)>& F)
{
    return integrate([&](double r) { return sphere_area(d) * std::pow(r, d - 1) * F(r); }, 0, 1);
}

} // namespace oracle
