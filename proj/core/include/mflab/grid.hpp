#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mflab {

// Cell-centred cube [lo, lo + n h]^d, row-major with the last axis fastest.
struct GridGeometry
{
    int d = 0;
    int n = 0;
    double lo = 0;
    double h = 0;

    // [-L, L]^d split into n cells per axis
    static GridGeometry box(int d, int n, double L);

    std::size_t size() const;
    double cell_volume() const;
    double hi() const { return lo + n * h; }
    double center(int i) const { return lo + (i + 0.5) * h; }
    void cell_center(std::size_t idx, std::span<double> out) const;
    void unflatten(std::size_t idx, std::span<int> ijk) const;
    std::size_t flatten(std::span<const int> ijk) const;
    bool contains(std::span<const double> x) const;

    bool operator==(const GridGeometry&) const = default;
};

// Cell-averaged probability density on a grid.
struct MeasureGrid
{
    GridGeometry geom;
    std::vector<double> values;
    double time = 0;

    MeasureGrid() = default;
    explicit MeasureGrid(const GridGeometry& g, double t = 0);

    double mass() const;
    void normalize();
    // Throws RegimeError on negative or non-finite values.
    void validate() const;
};

// Cell-centred vector field, components fastest: values[idx * d + a].
struct VelocityGrid
{
    GridGeometry geom;
    std::vector<double> values;

    VelocityGrid() = default;
    explicit VelocityGrid(const GridGeometry& g);
    void validate() const;
};

// Scalar samples at cell centres with multilinear interpolation.
class ScalarField
{
  public:
    ScalarField() = default;
    ScalarField(const GridGeometry& g, std::vector<double> values);

    const GridGeometry& geometry() const { return geom_; }
    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

    // Throws ExtrapolationError outside the grid box.
    double at(std::span<const double> x) const;
    // Centred differences (one-sided at the faces), one field per axis.
    std::vector<ScalarField> gradient() const;

  private:
    GridGeometry geom_;
    std::vector<double> values_;
};

// Interpolation stencil of a point: 2^d corner indices and weights.
struct Stencil
{
    std::vector<std::size_t> index;
    std::vector<double> weight;
};

// Multilinear weights over the cell centres surrounding x; points within half
// a cell of the box faces are extrapolated from the nearest pair of centres.
Stencil interpolation_stencil(const GridGeometry& g, std::span<const double> x);

// Multilinear interpolation of a vector field sampled at cell centres.
void interpolate_vector(const VelocityGrid& field, std::span<const double> x, std::span<double> out);

} // namespace mflab
