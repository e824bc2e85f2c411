#include "quadrature.hpp"

#include <boost/math/special_functions/legendre.hpp>
#include <stdexcept>

namespace mflab::quad {

Rule gauss_legendre_unit(int n)
{
    if (n < 1)
        throw std::invalid_argument("rule needs at least one node");
    // legendre_p_zeros returns the non-negative roots in increasing order
    auto zeros = boost::math::legendre_p_zeros<double>(n);
    Rule r;
    auto push = [&](double x) {
        double dp = boost::math::legendre_p_prime(n, x);
        r.x.push_back(0.5 * x);
        r.w.push_back(1 / ((1 - x * x) * dp * dp));
    };
    for (auto it = zeros.rbegin(); it != zeros.rend(); ++it)
        if (*it != 0)
            push(-*it);
    for (double z : zeros)
        push(z);
    return r;
}

} // namespace mflab::quad
