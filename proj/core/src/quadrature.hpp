#pragma once

// Thin wrappers over Boost quadrature shared by the radial and grid code.

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace mflab::quad {

// Endpoint singularities are fine; interior kinks should be split by the caller.
template<class F>
double tanh_sinh(F f, double a, double b, double tol = 1e-11)
{
    if (!(b > a))
        return 0;
    static thread_local boost::math::quadrature::tanh_sinh<double> integrator(12);
    return integrator.integrate(f, a, b, tol);
}

template<class F>
double kronrod(F f, double a, double b, double tol = 1e-11)
{
    if (!(b > a))
        return 0;
    return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, tol);
}

// Nodes and weights of an n-point Gauss-Legendre rule on [-1/2, 1/2].
struct Rule
{
    std::vector<double> x;
    std::vector<double> w;
};

Rule gauss_legendre_unit(int n);

} // namespace mflab::quad
