#pragma once

#include "mflab/grid.hpp"
#include "mflab/kernel.hpp"

namespace mflab {

// Grid estimates of the regularity of mu and of its potential h = g * mu.
struct FieldBounds
{
    double mass = 0;
    double sup_density = 0;
    double sup_grad = 0;     // max |grad h| over cell centres
    double sup_hessian = 0;  // max Frobenius norm of the finite-difference Hessian
    double holder_exponent = 0;
    double holder_seminorm = 0;  // max |mu(x) - mu(y)| / |x - y|^sigma over axis offsets up to `reach` cells
};

FieldBounds field_bounds(const MeasureGrid& mu, const KernelSpec& spec, double sigma = 0.5, int reach = 4);

} // namespace mflab
