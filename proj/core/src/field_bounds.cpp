#include "mflab/field_bounds.hpp"

#include <algorithm>
#include <cmath>

#include "mflab/potential_solver.hpp"

namespace mflab {

FieldBounds field_bounds(const MeasureGrid& mu, const KernelSpec& spec, double sigma, int reach)
{
    const auto& g = mu.geom;
    const int d = g.d;
    const int n = g.n;
    FieldBounds out;
    out.holder_exponent = sigma;
    out.mass = mu.mass();

    PotentialSolver solver(g, spec, 1);
    auto h = solver.solve(mu.values);
    const auto& H = h.values();
    const int m = n + 2;
    std::size_t ps[3], s[3];
    {
        std::size_t a1 = 1, a2 = 1;
        for (int a = d - 1; a >= 0; --a)
        {
            ps[a] = a1;
            s[a] = a2;
            a1 *= m;
            a2 *= n;
        }
    }
    const double dx = g.h;
    double sup_rho = 0, sup_grad = 0, sup_hess = 0, holder = 0;
#pragma omp parallel for schedule(static) reduction(max : sup_rho, sup_grad, sup_hess, holder)
    for (std::ptrdiff_t kk = 0; kk < std::ptrdiff_t(g.size()); ++kk)
    {
        int ijk[3];
        g.unflatten(kk, {ijk, std::size_t(d)});
        std::size_t p = 0;
        for (int a = 0; a < d; ++a)
            p = p * m + (ijk[a] + 1);
        double grad2 = 0, hess2 = 0;
        for (int a = 0; a < d; ++a)
        {
            double ga = (H[p + ps[a]] - H[p - ps[a]]) / (2 * dx);
            grad2 += ga * ga;
            for (int b = 0; b < d; ++b)
            {
                double hab;
                if (a == b)
                    hab = (H[p + ps[a]] - 2 * H[p] + H[p - ps[a]]) / (dx * dx);
                else
                    hab = (H[p + ps[a] + ps[b]] - H[p + ps[a] - ps[b]] - H[p - ps[a] + ps[b]]
                           + H[p - ps[a] - ps[b]])
                          / (4 * dx * dx);
                hess2 += hab * hab;
            }
        }
        sup_grad = std::max(sup_grad, std::sqrt(grad2));
        sup_hess = std::max(sup_hess, std::sqrt(hess2));
        const double v = mu.values[kk];
        sup_rho = std::max(sup_rho, v);
        for (int a = 0; a < d; ++a)
            for (int k = 1; k <= reach && ijk[a] + k < n; ++k)
            {
                double diff = std::abs(mu.values[kk + k * s[a]] - v);
                holder = std::max(holder, diff / std::pow(k * dx, sigma));
            }
    }
    out.sup_density = sup_rho;
    out.sup_grad = sup_grad;
    out.sup_hessian = sup_hess;
    out.holder_seminorm = holder;
    return out;
}

} // namespace mflab
