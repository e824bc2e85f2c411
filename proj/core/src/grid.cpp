#include "mflab/grid.hpp"

#include <algorithm>
#include <cmath>

#include "mflab/errors.hpp"

namespace mflab {

GridGeometry GridGeometry::box(int d, int n, double L)
{
    if (d < 1 || d > 3)
        throw RegimeError("grids support 1 <= d <= 3");
    if (n < 2)
        throw RegimeError("grid needs at least 2 cells per axis");
    if (!(L > 0))
        throw RegimeError("grid half-width must be positive");
    return {d, n, -L, 2 * L / n};
}

std::size_t GridGeometry::size() const
{
    std::size_t s = 1;
    for (int a = 0; a < d; ++a)
        s *= std::size_t(n);
    return s;
}

double GridGeometry::cell_volume() const
{
    return std::pow(h, d);
}

void GridGeometry::unflatten(std::size_t idx, std::span<int> ijk) const
{
    for (int a = d - 1; a >= 0; --a)
    {
        ijk[a] = int(idx % n);
        idx /= n;
    }
}

std::size_t GridGeometry::flatten(std::span<const int> ijk) const
{
    std::size_t idx = 0;
    for (int a = 0; a < d; ++a)
        idx = idx * n + ijk[a];
    return idx;
}

void GridGeometry::cell_center(std::size_t idx, std::span<double> out) const
{
    for (int a = d - 1; a >= 0; --a)
    {
        out[a] = center(int(idx % n));
        idx /= n;
    }
}

bool GridGeometry::contains(std::span<const double> x) const
{
    for (int a = 0; a < d; ++a)
        if (!(x[a] >= lo && x[a] <= hi()))
            return false;
    return true;
}

MeasureGrid::MeasureGrid(const GridGeometry& g, double t) : geom(g), values(g.size(), 0.0), time(t) {}

double MeasureGrid::mass() const
{
    double m = 0;
    for (double v : values)
        m += v;
    return m * geom.cell_volume();
}

void MeasureGrid::normalize()
{
    double m = mass();
    if (!(m > 0))
        throw RegimeError("cannot normalize a measure with zero mass");
    for (double& v : values)
        v /= m;
}

void MeasureGrid::validate() const
{
    if (values.size() != geom.size())
        throw RegimeError("measure grid size mismatch");
    for (double v : values)
        if (!(v >= 0) || !std::isfinite(v))
            throw RegimeError("measure grid has negative or non-finite density");
}

VelocityGrid::VelocityGrid(const GridGeometry& g) : geom(g), values(g.size() * g.d, 0.0) {}

void VelocityGrid::validate() const
{
    if (values.size() != geom.size() * geom.d)
        throw RegimeError("velocity grid size mismatch");
    for (double v : values)
        if (!std::isfinite(v))
            throw RegimeError("velocity grid has non-finite entries");
}

ScalarField::ScalarField(const GridGeometry& g, std::vector<double> values) : geom_(g), values_(std::move(values))
{
    if (values_.size() != geom_.size())
        throw RegimeError("scalar field size mismatch");
}

Stencil interpolation_stencil(const GridGeometry& g, std::span<const double> x)
{
    if (!g.contains(x))
        throw ExtrapolationError("query point outside the grid box");
    const int d = g.d;
    int base[3];
    double frac[3];
    for (int a = 0; a < d; ++a)
    {
        double u = (x[a] - g.lo) / g.h - 0.5;
        int i = std::clamp(int(std::floor(u)), 0, g.n - 2);
        base[a] = i;
        frac[a] = u - i;
    }
    Stencil st;
    const int corners = 1 << d;
    st.index.resize(corners);
    st.weight.resize(corners);
    int ijk[3];
    for (int c = 0; c < corners; ++c)
    {
        double w = 1;
        for (int a = 0; a < d; ++a)
        {
            int bit = (c >> a) & 1;
            ijk[a] = base[a] + bit;
            w *= bit ? frac[a] : 1 - frac[a];
        }
        st.index[c] = g.flatten({ijk, std::size_t(d)});
        st.weight[c] = w;
    }
    return st;
}

double ScalarField::at(std::span<const double> x) const
{
    auto st = interpolation_stencil(geom_, x);
    double v = 0;
    for (std::size_t c = 0; c < st.index.size(); ++c)
        v += st.weight[c] * values_[st.index[c]];
    return v;
}

std::vector<ScalarField> ScalarField::gradient() const
{
    const int d = geom_.d;
    const int n = geom_.n;
    std::vector<ScalarField> out;
    std::size_t stride = 1;
    std::vector<std::size_t> strides(d);
    for (int a = d - 1; a >= 0; --a)
    {
        strides[a] = stride;
        stride *= n;
    }
    for (int a = 0; a < d; ++a)
    {
        std::vector<double> g(values_.size());
        const std::size_t st = strides[a];
#pragma omp parallel for schedule(static)
        for (std::ptrdiff_t ii = 0; ii < std::ptrdiff_t(values_.size()); ++ii)
        {
            std::size_t idx = ii;
            int i = int((idx / st) % n);
            if (i == 0)
                g[idx] = (values_[idx + st] - values_[idx]) / geom_.h;
            else if (i == n - 1)
                g[idx] = (values_[idx] - values_[idx - st]) / geom_.h;
            else
                g[idx] = (values_[idx + st] - values_[idx - st]) / (2 * geom_.h);
        }
        out.emplace_back(geom_, std::move(g));
    }
    return out;
}

void interpolate_vector(const VelocityGrid& field, std::span<const double> x, std::span<double> out)
{
    const int d = field.geom.d;
    auto st = interpolation_stencil(field.geom, x);
    for (int a = 0; a < d; ++a)
        out[a] = 0;
    for (std::size_t c = 0; c < st.index.size(); ++c)
        for (int a = 0; a < d; ++a)
            out[a] += st.weight[c] * field.values[st.index[c] * d + a];
}

} // namespace mflab
