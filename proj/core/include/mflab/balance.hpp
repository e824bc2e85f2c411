#pragma once

#include "mflab/dynamics.hpp"
#include "mflab/particles.hpp"
#include "mflab/reference.hpp"

namespace mflab {

/*
 * Energy balance of F_N along a first-order flow with mobility M.
 * With G_i = sum_{j != i} grad g(x_i - x_j) and H = grad h^mu,
 *   A   = -2N sum_i |G_i/N - H(x_i)|^2
 *   B_M = N^2 iint_{off-diagonal} M(H(x) - H(y)) . grad g(x - y) d(mu_N - mu)^2
 * and, on the particle clock (twice the PDE clock), dF_N/dt = 2 (alpha A - B_M)
 * for M = alpha I + beta J.
 */
struct BalanceResult
{
    double lhs = 0;            // centred difference of F_N over two steps of size dt
    double rhs = 0;            // 2 (alpha A - B_M) at the middle state
    double rhs_as_stated = 0;  // 2 (alpha A + B_M), the sign as usually quoted for the gradient case
    double dissipation = 0;    // A
    double commutator = 0;     // B_M
    double relative = 0;       // |lhs - rhs| / (|lhs| + |rhs| + N)
};

// Terms A and B_M for the current state; mu must be backed by a grid.
// Requires s < d - 1 so that grad h^mu is an absolutely convergent integral.
std::pair<double, double> balance_terms(const ParticleSystem& sys, const Reference& mu, const FlowSpec& flow);

// mu is advanced on a private copy. Needs an unforced first-order flow.
BalanceResult f1_balance_check(const ParticleSystem& sys, const Reference& mu, const FlowSpec& flow, double dt);

} // namespace mflab
