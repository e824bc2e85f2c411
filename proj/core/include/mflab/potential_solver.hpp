#pragma once

#include <memory>
#include <span>

#include "mflab/grid.hpp"
#include "mflab/kernel.hpp"

namespace mflab {

// Free-space convolution h = g * rho for cell-averaged densities on a grid.
// The output grid extends the source box by `pad` cells on every side; the
// transform is zero-padded so nothing wraps around.
class PotentialSolver
{
  public:
    PotentialSolver(const GridGeometry& source, const KernelSpec& spec, int pad);

    const GridGeometry& source() const;
    const GridGeometry& output() const;
    const KernelSpec& kernel() const;

    ScalarField solve(std::span<const double> density) const;
    // Double grid sum of rho (g * rho) over the source grid.
    double energy(std::span<const double> density) const;

  private:
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

// Mean of g over the cube of side h centred at offset * h.
double cell_average_kernel(const KernelSpec& spec, std::span<const int> offset, double h);

} // namespace mflab
