#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mflab/particles.hpp"
#include "mflab/reference.hpp"

namespace mflab {

// Samples per draw and number of draws used by the d >= 2 distance.
inline constexpr std::size_t bl_samples = 512;
inline constexpr int bl_draws = 4;

/*
 * Weak-convergence indicator between mu_N and mu. In d = 1 it is the exact
 * 1-Wasserstein distance int |F_N - F|. In d >= 2 it is the mean optimal
 * assignment cost, with cost min(|x - y|, 2), between bl_samples stratified
 * draws of mu and the particles (replicated or subsampled to bl_samples),
 * averaged over bl_draws draws.
 */
double bounded_lipschitz_distance(const ParticleSystem& sys, const Reference& mu, std::uint64_t seed = 0);

// Minimum over permutations of sum_k min(|a_k - b_{pi(k)}|, cap), point-major sets of equal size.
double assignment_cost(int d, std::span<const double> a, std::span<const double> b, double cap);

// Hungarian algorithm on a dense n x n row-major cost matrix; returns the column of each row.
std::vector<std::size_t> solve_assignment(std::size_t n, std::span<const double> cost);

} // namespace mflab
