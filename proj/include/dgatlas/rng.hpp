#pragma once

// Deterministic 64-bit linear congruential generator.
//
// state' = state * 6364136223846793005 + 1442695040888963407  (mod 2^64)
//
// These are the MMIX constants; they are part of the scene-file contract so
// that any reimplementation reproduces the same corpora from the same seed.
// Bounded draws use the high 32 bits reduced modulo the range size.

#include <cstdint>

namespace dgatlas {

class Lcg {
public:
    static constexpr std::uint64_t kMul = 6364136223846793005ULL;
    static constexpr std::uint64_t kInc = 1442695040888963407ULL;

    explicit Lcg(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        state_ = state_ * kMul + kInc;
        return state_;
    }

    /// Uniform draw from [0, n); n > 0.
    std::uint64_t next_below(std::uint64_t n) { return (next_u64() >> 32) % n; }

    /// Uniform draw from [lo, hi] inclusive.
    long long next_range(long long lo, long long hi) {
        return lo + static_cast<long long>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

private:
    std::uint64_t state_;
};

}  // namespace dgatlas
