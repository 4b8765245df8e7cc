#pragma once

// Seeded random generators for corpus-based property checks.  All draws go
// through the documented Lcg so a (scene, seed) pair reproduces bit-identical
// corpora.

#include "dgatlas/diffop.hpp"
#include "dgatlas/poly.hpp"
#include "dgatlas/polydiff.hpp"
#include "dgatlas/rng.hpp"

namespace dgatlas {

/// Bounds shared by the property-check corpora.
struct Bounds {
    int max_arity = 3;
    int max_order = 2;
    int max_poly_degree = 4;
    int samples = 200;
};

inline Rat random_rat(Lcg& rng) {
    // Small numerators/denominators keep normal forms readable in reports.
    long long num = rng.next_range(-6, 6);
    if (num == 0) num = 1;
    long long den = rng.next_range(1, 4);
    return Rat(num, den);
}

inline Monomial random_monomial(Lcg& rng, const Chart& chart, int max_degree) {
    Monomial m{std::vector<int>(chart.size(), 0)};
    int budget = static_cast<int>(rng.next_range(0, max_degree));
    for (int step = 0; step < budget; ++step) {
        std::size_t i = static_cast<std::size_t>(rng.next_below(chart.size()));
        if (chart.odd(i) && m.exponents[i] >= 1) continue;
        ++m.exponents[i];
    }
    return m;
}

inline Poly random_poly(Lcg& rng, const ChartPtr& chart, int max_degree, int max_terms = 3) {
    Poly p(chart);
    int n = static_cast<int>(rng.next_range(0, max_terms));
    for (int t = 0; t < n; ++t)
        p.add_term(random_monomial(rng, *chart, max_degree), random_rat(rng));
    return p;
}

inline DerMonomial random_der_word(Lcg& rng, const Chart& chart, int max_order) {
    DerMonomial w = DerMonomial::empty(chart);
    int budget = static_cast<int>(rng.next_range(0, max_order));
    for (int step = 0; step < budget; ++step) {
        std::size_t i = static_cast<std::size_t>(rng.next_below(chart.size()));
        if (chart.odd(i) && w.exponents[i] >= 1) continue;
        ++w.exponents[i];
    }
    return w;
}

inline DiffOp random_diffop(Lcg& rng, const ChartPtr& chart, int max_order, int max_degree,
                            int max_terms = 3) {
    DiffOp d(chart);
    int n = static_cast<int>(rng.next_range(1, max_terms));
    for (int t = 0; t < n; ++t)
        d.add_term(random_monomial(rng, *chart, max_degree), random_der_word(rng, *chart, max_order),
                   random_rat(rng));
    return d;
}

inline VectorField random_vector_field(Lcg& rng, const ChartPtr& chart, int max_degree) {
    VectorField X(chart);
    for (std::size_t i = 0; i < chart->size(); ++i)
        X.set_component(i, random_poly(rng, chart, max_degree, 2));
    return X;
}

/// A random vector field that is homogeneous of the requested degree.
inline VectorField random_homogeneous_field(Lcg& rng, const ChartPtr& chart, Degree degree,
                                            int max_degree) {
    VectorField X(chart);
    for (std::size_t i = 0; i < chart->size(); ++i) {
        Degree want = degree + chart->degree(i);  // component degree
        Poly p(chart);
        for (int tries = 0; tries < 8; ++tries) {
            Monomial m = random_monomial(rng, *chart, max_degree);
            if (m.degree(*chart) == want) p.add_term(m, random_rat(rng));
        }
        X.set_component(i, std::move(p));
    }
    return X;
}

inline PolyDiffOp random_polydiffop(Lcg& rng, const ChartPtr& chart, int max_arity, int max_order,
                                    int max_degree, int max_terms = 2) {
    PolyDiffOp d(chart);
    int nterms = static_cast<int>(rng.next_range(1, max_terms));
    for (int t = 0; t < nterms; ++t) {
        int n = static_cast<int>(rng.next_range(0, max_arity));
        DerTuple tup;
        for (int k = 0; k < n; ++k) tup.push_back(random_der_word(rng, *chart, max_order));
        d.add(tup, random_poly(rng, chart, max_degree, 2));
    }
    return d;
}

inline PolyVector random_polyvector(Lcg& rng, const ChartPtr& chart, int max_arity, int max_degree,
                                    int max_terms = 2) {
    PolyVector v(chart);
    int nterms = static_cast<int>(rng.next_range(1, max_terms));
    for (int t = 0; t < nterms; ++t) {
        int n = static_cast<int>(rng.next_range(1, max_arity));
        std::vector<std::size_t> idx;
        for (int k = 0; k < n; ++k) idx.push_back(rng.next_below(chart->size()));
        v.add_word(std::move(idx), random_poly(rng, chart, max_degree, 2));
    }
    return v;
}

/// A random nonzero (arity, vertical)-bihomogeneous operator with arity at
/// least arity_min; zero only if rejection sampling runs dry.
inline PolyDiffOp random_bihomog_polydiffop(Lcg& rng, const ChartPtr& chart, int arity_min,
                                            int max_arity, int max_order, int max_degree) {
    for (int tries = 0; tries < 16; ++tries) {
        PolyDiffOp d = random_polydiffop(rng, chart, max_arity, max_order, max_degree, 2);
        std::vector<PolyDiffOp> ok;
        for (const auto& [k, p] : d.bihomogeneous_parts())
            if (k.first >= arity_min) ok.push_back(p);
        if (!ok.empty()) return ok[rng.next_below(ok.size())];
    }
    return PolyDiffOp::zero(chart);
}

}  // namespace dgatlas
