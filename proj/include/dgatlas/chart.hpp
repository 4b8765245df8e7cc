#pragma once

// Graded coordinate charts.  A chart is an ordered list of named coordinates,
// each carrying an integer degree.  The declaration order is the canonical
// order used by every normal form in the library.

#include <memory>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dgatlas {

/// Z-grading: a single integer degree.
using Degree = int;

/// Bigrading (horizontal p, vertical q); total degree is p + q.
struct BiDegree {
    int p = 0;  // horizontal
    int q = 0;  // vertical
    int total() const { return p + q; }
    friend bool operator==(const BiDegree&, const BiDegree&) = default;
};

/// True iff the degree is odd (the only thing Koszul signs care about).
inline bool is_odd(Degree d) { return ((d % 2) + 2) % 2 == 1; }

struct Coordinate {
    std::string name;
    Degree degree = 0;
};

/// An ordered set of graded coordinates.  Shared immutably between all values
/// built over it; cross-chart operations throw ChartMismatch.
class Chart {
public:
    explicit Chart(std::vector<Coordinate> coords) : coords_(std::move(coords)) {
        for (std::size_t i = 0; i < coords_.size(); ++i) {
            if (!index_.emplace(coords_[i].name, i).second)
                throw std::invalid_argument("duplicate coordinate name: " + coords_[i].name);
        }
    }

    std::size_t size() const { return coords_.size(); }
    const Coordinate& at(std::size_t i) const { return coords_.at(i); }
    Degree degree(std::size_t i) const { return coords_.at(i).degree; }
    bool odd(std::size_t i) const { return is_odd(coords_.at(i).degree); }
    const std::string& name(std::size_t i) const { return coords_.at(i).name; }

    /// Index of a named coordinate, or npos.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t find(const std::string& n) const {
        auto it = index_.find(n);
        return it == index_.end() ? npos : it->second;
    }

private:
    std::vector<Coordinate> coords_;
    std::unordered_map<std::string, std::size_t> index_;
};

using ChartPtr = std::shared_ptr<const Chart>;

inline ChartPtr make_chart(std::vector<Coordinate> coords) {
    return std::make_shared<const Chart>(std::move(coords));
}

struct ChartMismatch : std::invalid_argument {
    ChartMismatch() : std::invalid_argument("operands live over different charts") {}
};

inline void require_same_chart(const ChartPtr& a, const ChartPtr& b) {
    if (a != b) throw ChartMismatch();
}

}  // namespace dgatlas
