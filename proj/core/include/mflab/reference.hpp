#pragma once

#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mflab/dynamics.hpp"
#include "mflab/euler_poisson.hpp"
#include "mflab/exact_solution.hpp"
#include "mflab/grid.hpp"
#include "mflab/kernel.hpp"
#include "mflab/potential_solver.hpp"
#include "mflab/transport.hpp"

namespace mflab {

/*
 * Particles move with -(1/N) grad H_N = -2 grad h^{mu_N}, so first-order
 * flows pair particle time t with PDE time 2t; Newton pairs t with sqrt(2) t
 * and scales velocities by sqrt(2). The clock converts particle time to the
 * time of the reference solution.
 */
struct ClockMap
{
    double time = 1;
    double velocity = 1;

    static ClockMap for_flow(const FlowSpec& flow);
};

// Reference mean-field state mu^t (and u^t for Euler-Poisson), queried on the particle clock.
class Reference
{
  public:
    virtual ~Reference() = default;
    virtual std::unique_ptr<Reference> clone() const = 0;

    virtual int dim() const = 0;
    virtual const KernelSpec& kernel() const = 0;
    const ClockMap& clock() const { return clock_; }
    // particle time
    double time() const { return time_; }
    // Moves forward to particle time t >= time().
    void advance_to(double t);

    virtual double density(std::span<const double> x) const = 0;
    virtual double potential(std::span<const double> x) const = 0;
    virtual void grad_potential(std::span<const double> x, std::span<double> out) const = 0;
    virtual double self_energy() const = 0;
    // integral of f_eta(x - y) dmu(y); the default treats mu as constant on B(x, eta)
    virtual double f_eta_integral(std::span<const double> x, double eta) const;

    virtual bool has_velocity() const { return false; }
    // particle-frame velocity field u(x)
    virtual void velocity(std::span<const double> x, std::span<double> out) const;

    // Maps d numbers in [0, 1) to a point distributed as mu.
    virtual void transform_uniform(std::span<const double> u, std::span<double> x) const = 0;
    // distribution function, d = 1 only
    virtual double cdf(double x) const = 0;
    virtual MeasureGrid rasterize(const GridGeometry& g) const = 0;
    // radius of a ball about the origin containing the support
    virtual double extent() const = 0;
    // grid backing the reference, if any
    virtual const MeasureGrid* grid() const { return nullptr; }

  protected:
    explicit Reference(ClockMap clock) : clock_(clock) {}
    Reference(const Reference&) = default;
    virtual void evolve_to(double pde_time) = 0;

  private:
    ClockMap clock_;
    double time_ = 0;
};

class ExactReference final : public Reference
{
  public:
    ExactReference(ExactSolution sol, ClockMap clock = {});

    std::unique_ptr<Reference> clone() const override;
    int dim() const override { return sol_.dim(); }
    const KernelSpec& kernel() const override { return sol_.kernel(); }
    const ExactSolution& solution() const { return sol_; }
    double pde_time() const { return tau_; }

    double density(std::span<const double> x) const override;
    double potential(std::span<const double> x) const override;
    void grad_potential(std::span<const double> x, std::span<double> out) const override;
    double self_energy() const override;
    double f_eta_integral(std::span<const double> x, double eta) const override;
    void transform_uniform(std::span<const double> u, std::span<double> x) const override;
    double cdf(double x) const override;
    MeasureGrid rasterize(const GridGeometry& g) const override;
    double extent() const override;

  protected:
    void evolve_to(double pde_time) override { tau_ = pde_time; }

  private:
    ExactSolution sol_;
    double tau_ = 0;
};

// Shared machinery for grid-backed references: potential on a 2x padded box
// and inverse-CDF sampling of the cell densities.
class GridBackedReference : public Reference
{
  public:
    int dim() const override { return spec_.dim(); }
    const KernelSpec& kernel() const override { return spec_; }
    const MeasureGrid* grid() const override { return &mu_; }

    double density(std::span<const double> x) const override;
    double potential(std::span<const double> x) const override;
    void grad_potential(std::span<const double> x, std::span<double> out) const override;
    double self_energy() const override;
    void transform_uniform(std::span<const double> u, std::span<double> x) const override;
    double cdf(double x) const override;
    MeasureGrid rasterize(const GridGeometry& g) const override;
    double extent() const override;

  protected:
    GridBackedReference(MeasureGrid mu, const KernelSpec& spec, ClockMap clock);
    void set_density(MeasureGrid mu);

  private:
    void refresh();

    KernelSpec spec_;
    MeasureGrid mu_;
    PotentialSolver solver_;
    ScalarField h_;
    std::vector<ScalarField> grad_;
    double self_energy_ = 0;
    // cumulative sums along each axis for sequential inverse-CDF sampling
    std::vector<double> cum0_, cum1_, cum2_;
};

class GridReference final : public GridBackedReference
{
  public:
    // Evolves mu by upwind transport with the flow's mobility; static when evolve is false.
    GridReference(MeasureGrid mu0, const KernelSpec& spec, const FlowSpec& flow, ClockMap clock, bool evolve = true,
                  double cfl = 0.4, TransportScheme scheme = TransportScheme::upwind);

    std::unique_ptr<Reference> clone() const override;

  protected:
    void evolve_to(double pde_time) override;

  private:
    std::optional<TransportSolver> transport_;
    MeasureGrid state_;
};

class EulerPoissonReference final : public GridBackedReference
{
  public:
    // u0 is given in the particle frame.
    EulerPoissonReference(MeasureGrid mu0, const VelocityGrid& u0, const KernelSpec& spec, const FlowSpec& flow,
                          ClockMap clock, EulerPoissonOptions options = {});

    std::unique_ptr<Reference> clone() const override;
    bool has_velocity() const override { return true; }
    void velocity(std::span<const double> x, std::span<double> out) const override;
    const EulerPoissonSolver& solver() const { return solver_; }
    // PDE-frame velocity grid
    const VelocityGrid& velocity_grid() const { return u_; }

  protected:
    void evolve_to(double pde_time) override;

  private:
    EulerPoissonSolver solver_;
    VelocityGrid u_;
};

// h^mu and velocities at flat lists of points (point-major).
std::vector<double> potential(const MeasureGrid& mu, const KernelSpec& spec, std::span<const double> points);
std::vector<double> potential(const ExactSolution& sol, double t, std::span<const double> points);
std::vector<double> velocity(const MeasureGrid& mu, const KernelSpec& spec, const FlowSpec& flow,
                             std::span<const double> points);
std::vector<double> velocity(const ExactSolution& sol, double t, const FlowSpec& flow,
                             std::span<const double> points);

} // namespace mflab
