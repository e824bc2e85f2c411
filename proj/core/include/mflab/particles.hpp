#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mflab/kernel.hpp"

namespace mflab {

// N points in R^d stored row-major, with optional velocities of the same shape.
class ParticleSystem
{
  public:
    ParticleSystem() = default;
    ParticleSystem(int d, std::vector<double> positions);
    ParticleSystem(int d, std::vector<double> positions, std::vector<double> velocities);

    int dim() const { return d_; }
    std::size_t size() const { return d_ ? x_.size() / d_ : 0; }
    bool has_velocities() const { return !v_.empty(); }

    std::span<const double> position(std::size_t i) const { return {x_.data() + i * d_, std::size_t(d_)}; }
    std::span<double> position(std::size_t i) { return {x_.data() + i * d_, std::size_t(d_)}; }
    std::span<const double> velocity(std::size_t i) const { return {v_.data() + i * d_, std::size_t(d_)}; }
    std::span<double> velocity(std::size_t i) { return {v_.data() + i * d_, std::size_t(d_)}; }

    const std::vector<double>& positions() const { return x_; }
    std::vector<double>& positions() { return x_; }
    const std::vector<double>& velocities() const { return v_; }
    std::vector<double>& velocities() { return v_; }

    void set_velocities(std::vector<double> v);

  private:
    int d_ = 0;
    std::vector<double> x_;
    std::vector<double> v_;
};

// Sum over ordered pairs i != j of g(x_i - x_j).
double interaction_energy(const ParticleSystem& sys, const KernelSpec& spec);

// Row i is -(2/N) sum_j grad g(x_i - x_j), i.e. -(1/N) grad_{x_i} H_N.
std::vector<double> pairwise_force(const ParticleSystem& sys, const KernelSpec& spec);

struct ForceEvaluation
{
    std::vector<double> force;    // N x d, as pairwise_force
    std::vector<double> nearest;  // distance from each particle to its nearest neighbour
};

// Force and nearest-neighbour distances in one pass over pairs.
ForceEvaluation evaluate_forces(int d, std::span<const double> x, const KernelSpec& spec);

struct MinimalDistances
{
    std::vector<double> r;  // r_i = min(nearest/4, N^{-1/d}); 1 for a single particle
    bool degenerate = false;  // two particles coincide
};

MinimalDistances minimal_distances(const ParticleSystem& sys);

// Length scale used by the collision guard.
double configuration_scale(int d, std::span<const double> x);

} // namespace mflab
