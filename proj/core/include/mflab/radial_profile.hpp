#pragma once

#include <memory>
#include <mutex>

#include "mflab/kernel.hpp"

namespace mflab {

/*
 * Unit-radius shape F0(r) = (1 - r^2)_+^p and its potential Phi = g * F0.
 * p = 0 is the indicator of the unit ball. When p = (s - d + 2)/2 the
 * potential is exactly quadratic on the support (Barenblatt profiles).
 */
class RadialProfile
{
  public:
    RadialProfile(const KernelSpec& spec, double p);

    const KernelSpec& kernel() const { return spec_; }
    double exponent() const { return p_; }
    // integral of F0 over R^d
    double mass() const { return mass_; }
    double density(double r) const;

    double potential(double rho) const;
    // d Phi / d rho
    double potential_slope(double rho) const;
    // integral of F0 Phi
    double self_energy() const;

    // Fraction of the mass inside radius r, and its inverse.
    double cdf(double r) const;
    double quantile(double u) const;

    // Mean of F0 over the sphere of radius a centred at distance rho from the origin.
    double spherical_mean(double rho, double a) const;

    bool quadratic_inside() const { return quadratic_; }
    // B0 in Phi = Phi(0) - B0 rho^2 on the support
    double quadratic_coefficient() const { return b0_; }

  private:
    double potential_quadrature(double rho) const;
    double shell_kernel(double rho, double r) const;

    KernelSpec spec_;
    double p_;
    double mass_ = 0;
    bool quadratic_ = false;
    double b0_ = 0;
    double phi0_ = 0;
    // integral of F0 Phi is nested quadrature in general, so it is deferred
    mutable double self_energy_ = 0;
    bool lazy_self_energy_ = false;
    std::shared_ptr<std::once_flag> self_energy_once_ = std::make_shared<std::once_flag>();
};

// Quadratic coefficient of g * (1 - |z|^2)_+^{(s-d+2)/2} inside the unit ball.
double barenblatt_quadratic_coefficient(const KernelSpec& spec);

} // namespace mflab
