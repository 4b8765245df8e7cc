#pragma once

// Exact linear algebra over the rationals: an incremental row-echelon span
// used for membership and rank questions.  No pivoting heuristics are needed
// since all arithmetic is exact.

#include "dgatlas/rat.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace dgatlas {

class RatSpan {
public:
    explicit RatSpan(std::size_t dim) : dim_(dim) {}

    std::size_t dim() const { return dim_; }
    std::size_t rank() const { return rows_.size(); }

    /// Adds v to the span; returns true iff v was independent of it.
    bool insert(std::vector<Rat> v) {
        reduce(v);
        std::size_t p = pivot(v);
        if (p == dim_) return false;
        Rat lead = v[p];
        for (auto& x : v) x /= lead;
        std::size_t at = 0;
        while (at < rows_.size() && rows_[at].first < p) ++at;
        rows_.insert(rows_.begin() + static_cast<std::ptrdiff_t>(at), {p, std::move(v)});
        return true;
    }

    bool contains(std::vector<Rat> v) const {
        reduce(v);
        return pivot(v) == dim_;
    }

private:
    void reduce(std::vector<Rat>& v) const {
        for (const auto& [p, row] : rows_) {
            if (v[p] == 0) continue;
            Rat c = v[p];
            for (std::size_t i = p; i < dim_; ++i) v[i] -= c * row[i];
        }
    }

    std::size_t pivot(const std::vector<Rat>& v) const {
        for (std::size_t i = 0; i < dim_; ++i)
            if (v[i] != 0) return i;
        return dim_;
    }

    std::size_t dim_;
    std::vector<std::pair<std::size_t, std::vector<Rat>>> rows_;  // pivot, unit row
};

}  // namespace dgatlas
