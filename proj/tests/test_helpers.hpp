#pragma once

#include "dgatlas/diffop.hpp"
#include "dgatlas/parse.hpp"

namespace dgatlas::testing {

/// x even, xi odd (+1), th odd (-1): the mixed-degree workhorse chart.
inline ChartPtr mixed_chart() {
    static ChartPtr c = make_chart({{"x", 0}, {"xi", 1}, {"th", -1}});
    return c;
}

/// g[1] for the 2-dimensional nonabelian Lie algebra: two odd degree-1
/// coordinates with Q = -xi1*xi2 d_2.
inline ChartPtr g1_chart() {
    static ChartPtr c = make_chart({{"xi1", 1}, {"xi2", 1}});
    return c;
}

inline VectorField g1_q_field() {
    VectorField Q(g1_chart());
    Q.set_component(1, parse_poly("-xi1*xi2", g1_chart()));
    return Q;
}

inline HomologicalField g1_q() { return HomologicalField(g1_q_field()); }

}  // namespace dgatlas::testing
