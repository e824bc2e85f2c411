#pragma once

#include <string>
#include <vector>

#include "mflab/dynamics.hpp"
#include "mflab/grid.hpp"
#include "mflab/kernel.hpp"
#include "mflab/potential_solver.hpp"

namespace mflab {

enum class TransportScheme
{
    upwind,  // first-order donor cell
    muscl    // minmod-limited linear reconstruction with SSP-RK2 stages
};

TransportScheme parse_transport_scheme(const std::string& name);
std::string to_string(TransportScheme scheme);

/*
 * First-order upwind finite volumes for d_t mu + div(mu v) = 0 with
 * v = -M grad(g * mu) + c F(x). Normal derivatives at a face use the two
 * adjacent cells; tangential ones average the central differences of both
 * cells, which makes the antisymmetric part of M discretely divergence-free.
 * Faces on the box boundary carry no flux.
 */
class TransportSolver
{
  public:
    // mobility: d x d row-major; forcing_scale multiplies F
    TransportSolver(const GridGeometry& g, const KernelSpec& spec, std::vector<double> mobility,
                    Forcing forcing = {}, double forcing_scale = 1, double cfl = 0.4,
                    TransportScheme scheme = TransportScheme::upwind);

    const GridGeometry& geometry() const { return geom_; }
    double cfl() const { return cfl_; }
    TransportScheme scheme() const { return scheme_; }

    // Largest dt satisfying the CFL bound for mu.
    double max_stable_dt(const MeasureGrid& mu) const;
    // One step; throws CflError when dt exceeds the bound.
    MeasureGrid step(const MeasureGrid& mu, double dt) const;
    // Steps of at most the stable size until mu.time + duration.
    MeasureGrid advance(const MeasureGrid& mu, double duration) const;

  private:
    struct Faces
    {
        std::vector<double> u;  // per axis, velocity at the upper face of each cell
        double max_speed_sum = 0;
    };
    Faces face_velocities(const MeasureGrid& mu) const;
    MeasureGrid euler(const MeasureGrid& mu, const Faces& faces, double dt) const;
    MeasureGrid apply(const MeasureGrid& mu, const Faces& faces, double dt) const;

    GridGeometry geom_;
    KernelSpec spec_;
    std::vector<double> mobility_;
    Forcing forcing_;
    double forcing_scale_;
    double cfl_;
    TransportScheme scheme_;
    PotentialSolver solver_;
};

// One upwind step of d_t mu = div(mu grad h).
MeasureGrid evolve_dissipative(const MeasureGrid& mu, const KernelSpec& spec, double dt, double cfl = 0.4);
// One upwind step of d_t mu = div(mu J grad h); empty J means the default rotation.
MeasureGrid evolve_conservative(const MeasureGrid& mu, const KernelSpec& spec, double dt,
                                std::vector<double> J = {}, double cfl = 0.4);

} // namespace mflab
