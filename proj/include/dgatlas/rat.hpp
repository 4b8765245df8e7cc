#pragma once

// Exact rational scalars.  All arithmetic in the library is performed over Q;
// there is no floating point anywhere.

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace dgatlas {

using Int = boost::multiprecision::cpp_int;

/// Arbitrary-precision rational, always reduced, denominator > 0.
using Rat = boost::multiprecision::cpp_rational;

inline Int rat_num(const Rat& r) { return numerator(r); }
inline Int rat_den(const Rat& r) { return denominator(r); }

/// Renders "n" or "n/d".
inline std::string rat_str(const Rat& r) {
    if (rat_den(r) == 1) return rat_num(r).str();
    return rat_num(r).str() + "/" + rat_den(r).str();
}

/// (-1)^k as a Rat, for any integer k.
inline Rat sign_pow(long long k) { return (k % 2 == 0) ? Rat(1) : Rat(-1); }

}  // namespace dgatlas
