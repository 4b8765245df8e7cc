#pragma once

// Permutations, (p,q)-shuffles and Koszul signs.
//
// The Koszul sign kappa(sigma; d_1..d_n) is defined so that
//   x_1 ... x_n = kappa(sigma) x_{sigma(1)} ... x_{sigma(n)}
// for homogeneous factors of the given degrees: one (-1) for every inversion
// of sigma whose two factors both have odd degree.

#include "dgatlas/chart.hpp"
#include "dgatlas/rat.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dgatlas {

/// A permutation of {1..n}, stored as 1-based images: images[i-1] = sigma(i).
struct Permutation {
    std::vector<int> images;

    std::size_t size() const { return images.size(); }
    int operator()(int i) const { return images.at(static_cast<std::size_t>(i) - 1); }

    static Permutation identity(std::size_t n) {
        Permutation s;
        s.images.resize(n);
        std::iota(s.images.begin(), s.images.end(), 1);
        return s;
    }

    /// (this o other)(i) = this(other(i)).
    Permutation compose(const Permutation& other) const {
        if (size() != other.size()) throw std::invalid_argument("permutation size mismatch");
        Permutation r;
        r.images.reserve(size());
        for (std::size_t i = 1; i <= size(); ++i)
            r.images.push_back((*this)(other(static_cast<int>(i))));
        return r;
    }

    bool valid() const {
        std::vector<bool> seen(images.size(), false);
        for (int v : images) {
            if (v < 1 || static_cast<std::size_t>(v) > images.size()) return false;
            if (seen[static_cast<std::size_t>(v) - 1]) return false;
            seen[static_cast<std::size_t>(v) - 1] = true;
        }
        return true;
    }
};

using Shuffle = Permutation;

/// kappa(sigma) for factors x_1..x_n of the given degrees, defined by
/// x_1 ... x_n = kappa * x_{sigma(1)} ... x_{sigma(n)}.
///
/// The right-hand word lists the original factors in the order
/// sigma(1), ..., sigma(n); an inversion (i < j with position of factor
/// sigma(i)=a after sigma(j)=b in the original word, i.e. a > b) corresponds
/// to one transposition of the factors a and b, contributing (-1)^{d_a d_b}.
inline Rat koszul_sign(const Permutation& sigma, const std::vector<Degree>& degrees) {
    if (sigma.size() != degrees.size()) throw std::invalid_argument("koszul_sign: size mismatch");
    long long parity = 0;
    const int n = static_cast<int>(sigma.size());
    for (int i = 1; i <= n; ++i)
        for (int j = i + 1; j <= n; ++j) {
            int a = sigma(i), b = sigma(j);
            if (a > b && is_odd(degrees[static_cast<std::size_t>(a) - 1]) &&
                is_odd(degrees[static_cast<std::size_t>(b) - 1]))
                ++parity;
        }
    return sign_pow(parity);
}

/// All (p,q)-shuffles: sigma with sigma(1)<...<sigma(p) and
/// sigma(p+1)<...<sigma(p+q).  Ordered lexicographically by the first block.
inline std::vector<Shuffle> shuffles(int p, int q) {
    if (p < 0 || q < 0) throw std::invalid_argument("shuffles: negative block size");
    const int n = p + q;
    std::vector<Shuffle> out;
    // Enumerate p-subsets of {1..n} in lexicographic order as the first block.
    std::vector<int> pick(static_cast<std::size_t>(p));
    std::iota(pick.begin(), pick.end(), 1);
    while (true) {
        Shuffle s;
        s.images.reserve(static_cast<std::size_t>(n));
        std::vector<bool> used(static_cast<std::size_t>(n) + 1, false);
        for (int v : pick) {
            s.images.push_back(v);
            used[static_cast<std::size_t>(v)] = true;
        }
        for (int v = 1; v <= n; ++v)
            if (!used[static_cast<std::size_t>(v)]) s.images.push_back(v);
        out.push_back(std::move(s));
        if (p == 0) break;
        // next lexicographic p-subset of {1..n}
        int i = p - 1;
        while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - (p - 1 - i)) --i;
        if (i < 0) break;
        ++pick[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < p; ++k)
            pick[static_cast<std::size_t>(k)] = pick[static_cast<std::size_t>(k - 1)] + 1;
    }
    return out;
}

}  // namespace dgatlas
