#pragma once

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mflab/dynamics.hpp"
#include "mflab/grid.hpp"
#include "mflab/kernel.hpp"
#include "mflab/radial_profile.hpp"

namespace mflab {

enum class ExactFamily
{
    expanding_ball,
    barenblatt,
    radial_vortex_patch,
    uniform_ball_static
};

ExactFamily parse_exact_family(const std::string& name);
std::string to_string(ExactFamily family);

/*
 * Closed-form radial solutions mu^t(x) = F0(|x - c| / l(t)) / (l(t)^d M0).
 * Dissipative families self-similarly spread with
 *   l(t)^{s+2} = l(0)^{s+2} + 2 (s+2) (B0/M0) t   (s read as 0 for log),
 * which gives R^d = R0^d + d(d-2) t for Coulomb balls and R^2 = R0^2 + 2t for
 * the log disk. Static families are stationary for conservative flows.
 */
class ExactSolution
{
  public:
    static ExactSolution expanding_ball(const KernelSpec& spec, double R0, std::vector<double> center = {});
    static ExactSolution barenblatt(const KernelSpec& spec, double R0, std::vector<double> center = {});
    // profile_exponent 0 is a uniform patch; larger values give smooth bumps
    static ExactSolution radial_vortex_patch(const KernelSpec& spec, double R, double profile_exponent = 0,
                                             std::vector<double> center = {});
    static ExactSolution uniform_ball_static(const KernelSpec& spec, double R, std::vector<double> center = {});

    ExactFamily family() const { return family_; }
    const KernelSpec& kernel() const { return profile_->kernel(); }
    const RadialProfile& profile() const { return *profile_; }
    const std::vector<double>& center() const { return center_; }
    int dim() const { return kernel().dim(); }

    bool is_static() const;
    // Whether mu^t solves the mean-field equation of this flow.
    bool solves(const FlowSpec& flow) const;

    // support radius l(t)
    double radius(double t) const;
    // t0 such that l(t) = rho0 (t + t0)^{1/(s+2)}
    double time_offset() const;
    // (a, b) with mu = tau^{-d/(s+2)} (a - b |x|^2 tau^{-2/(s+2)})_+^p, tau = t + t0
    std::pair<double, double> barenblatt_coefficients() const;

    double density(std::span<const double> x, double t) const;
    double potential(std::span<const double> x, double t) const;
    void grad_potential(std::span<const double> x, double t, std::span<double> out) const;
    double self_energy(double t) const;
    double spherical_mean(std::span<const double> x, double a, double t) const;
    // fraction of mass within distance r of the centre, and its inverse
    double cdf(double r, double t) const;
    double quantile(double u, double t) const;

    // Cell averages, renormalised to unit mass.
    MeasureGrid rasterize(const GridGeometry& g, double t) const;

  private:
    ExactSolution(ExactFamily family, std::shared_ptr<const RadialProfile> profile, double R0,
                  std::vector<double> center);
    double distance(std::span<const double> x) const;

    ExactFamily family_;
    std::shared_ptr<const RadialProfile> profile_;
    double R0_;
    std::vector<double> center_;
    double rate_ = 0;  // d l^{s+2} / dt
};

} // namespace mflab
