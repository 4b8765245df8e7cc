#pragma once

// Taylor coefficients beta_k of x / (1 - e^{-x}), computed by exact formal
// series division.  These drive the finite (nilpotent) evaluation of the
// series omega / (1 - e^{-omega}).

#include "dgatlas/rat.hpp"

#include <stdexcept>
#include <vector>

namespace dgatlas {

/// beta_0..beta_{k_max} with sum beta_k x^k = x / (1 - e^{-x}).
///
/// Writing 1 - e^{-x} = x * g(x) with g(x) = sum_{j>=0} (-1)^j x^j/(j+1)!,
/// the result is the series inverse of g.
inline std::vector<Rat> todd_like_coeffs(int k_max) {
    if (k_max < 0) throw std::invalid_argument("todd_like_coeffs: negative bound");
    std::vector<Rat> g(static_cast<std::size_t>(k_max) + 1);
    Int fact = 1;  // (j+1)!
    for (int j = 0; j <= k_max; ++j) {
        fact *= j + 1;
        g[static_cast<std::size_t>(j)] = Rat(sign_pow(j)) / Rat(fact);
    }
    // beta = g^{-1}: beta_0 = 1/g_0; beta_k = -(1/g_0) sum_{j=1..k} g_j beta_{k-j}.
    std::vector<Rat> beta(static_cast<std::size_t>(k_max) + 1);
    beta[0] = Rat(1) / g[0];
    for (int k = 1; k <= k_max; ++k) {
        Rat acc = 0;
        for (int j = 1; j <= k; ++j)
            acc += g[static_cast<std::size_t>(j)] * beta[static_cast<std::size_t>(k - j)];
        beta[static_cast<std::size_t>(k)] = -acc / g[0];
    }
    return beta;
}

}  // namespace dgatlas
