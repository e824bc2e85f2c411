#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "mflab/dynamics.hpp"
#include "mflab/grid.hpp"
#include "mflab/kernel.hpp"
#include "mflab/potential_solver.hpp"

namespace mflab {

struct EulerPoissonOptions
{
    double cfl = 0.4;
    // smallest admissible det of the characteristic map, relative to the start
    double jacobian_floor = 0.05;
    // optional cap on sup|grad u| * t; infinite disables it
    double gradient_threshold = std::numeric_limits<double>::infinity();
    // markers per cell and axis
    int refine = 1;
};

/*
 * Pressureless Euler-Poisson by Lagrangian markers: each marker carries the
 * mass of its initial sub-cell and follows x'' = -grad h + c F(x). Density is
 * rebuilt by cloud-in-cell deposition; the Jacobian of the marker map is
 * monitored and the run stops once it degenerates.
 */
class EulerPoissonSolver
{
  public:
    EulerPoissonSolver(const MeasureGrid& mu0, const VelocityGrid& u0, const KernelSpec& spec,
                       EulerPoissonOptions options = {}, Forcing forcing = {}, double forcing_scale = 1);

    const GridGeometry& geometry() const { return geom_; }
    const KernelSpec& kernel() const { return spec_; }
    double time() const { return time_; }
    std::size_t marker_count() const { return mass_.size(); }

    double stable_dt() const;
    // One RK4 step; throws ShockError when the marker map degenerates.
    void step(double dt);
    void advance(double duration);

    MeasureGrid density() const;
    // Mass-weighted cell velocities; empty cells take the mean of filled neighbours.
    VelocityGrid velocity() const;

    struct Lagrangian
    {
        double min_jacobian = std::numeric_limits<double>::infinity();
        double max_velocity_gradient = 0;  // Frobenius norm of grad u
    };
    Lagrangian lagrangian() const;

  private:
    std::vector<double> acceleration(const std::vector<double>& x) const;
    std::vector<double> deposit(const std::vector<double>& x, const double* weights) const;
    // Axis-aligned bounding box of marker k's deformed lattice cell.
    void cloud_extent(const std::vector<double>& x, std::size_t k, double* width) const;

    GridGeometry geom_;
    KernelSpec spec_;
    EulerPoissonOptions opt_;
    Forcing forcing_;
    double forcing_scale_;
    PotentialSolver solver_;
    double time_ = 0;

    int m_ = 0;                        // markers per axis
    double spacing_ = 0;               // initial marker spacing
    std::vector<std::ptrdiff_t> slot_; // lattice index -> marker or -1
    std::vector<std::size_t> lattice_; // marker -> lattice index
    std::vector<double> mass_;
    std::vector<double> x_;
    std::vector<double> u_;
};

// One step from grid data, markers seeded at cell centres.
std::pair<MeasureGrid, VelocityGrid> evolve_euler_poisson(const MeasureGrid& mu, const VelocityGrid& u,
                                                          const KernelSpec& spec, double dt,
                                                          EulerPoissonOptions options = {});

} // namespace mflab
