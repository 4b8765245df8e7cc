#pragma once

// Graded-commutative polynomials over Q in the coordinates of a chart.
//
// A Monomial stores one exponent per coordinate, in chart order; odd
// coordinates square to zero, so their exponents are 0 or 1.  A Poly is a
// finite Rat-linear combination of monomials with no zero coefficients.

#include "dgatlas/chart.hpp"
#include "dgatlas/rat.hpp"

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace dgatlas {

struct Monomial {
    std::vector<int> exponents;  // one entry per chart coordinate

    friend auto operator<=>(const Monomial&, const Monomial&) = default;

    Degree degree(const Chart& chart) const {
        Degree d = 0;
        for (std::size_t i = 0; i < exponents.size(); ++i)
            d += exponents[i] * chart.degree(i);
        return d;
    }

    bool is_one() const {
        for (int e : exponents)
            if (e != 0) return false;
        return true;
    }
};

class Poly {
public:
    Poly() = default;
    explicit Poly(ChartPtr chart) : chart_(std::move(chart)) {}

    static Poly zero(ChartPtr chart) { return Poly(std::move(chart)); }

    static Poly constant(ChartPtr chart, const Rat& c) {
        Poly p(chart);
        if (c != 0) p.terms_[Monomial{std::vector<int>(chart->size(), 0)}] = c;
        return p;
    }

    /// The i-th coordinate as a Poly.
    static Poly coordinate(ChartPtr chart, std::size_t i) {
        Poly p(chart);
        Monomial m{std::vector<int>(chart->size(), 0)};
        m.exponents.at(i) = 1;
        p.terms_[m] = 1;
        return p;
    }

    static Poly monomial(ChartPtr chart, Monomial m, const Rat& c) {
        Poly p(chart);
        if (c != 0) p.terms_[std::move(m)] = c;
        return p;
    }

    const ChartPtr& chart() const { return chart_; }
    const std::map<Monomial, Rat>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Degree of a homogeneous Poly; nullopt for 0 or inhomogeneous input.
    std::optional<Degree> degree() const {
        std::optional<Degree> d;
        for (const auto& [m, c] : terms_) {
            Degree md = m.degree(*chart_);
            if (!d)
                d = md;
            else if (*d != md)
                return std::nullopt;
        }
        return d;
    }

    bool is_homogeneous() const { return terms_.empty() || degree().has_value(); }

    /// Splits into homogeneous components, keyed by degree.
    std::map<Degree, Poly> homogeneous_parts() const {
        std::map<Degree, Poly> parts;
        for (const auto& [m, c] : terms_) {
            Degree d = m.degree(*chart_);
            auto it = parts.find(d);
            if (it == parts.end()) it = parts.emplace(d, Poly(chart_)).first;
            it->second.terms_[m] = c;
        }
        return parts;
    }

    void add_term(const Monomial& m, const Rat& c) {
        if (c == 0) return;
        auto it = terms_.find(m);
        if (it == terms_.end()) {
            terms_.emplace(m, c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Poly& operator+=(const Poly& other) {
        require_same_chart(chart_, other.chart_);
        for (const auto& [m, c] : other.terms_) add_term(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& other) {
        require_same_chart(chart_, other.chart_);
        for (const auto& [m, c] : other.terms_) add_term(m, -c);
        return *this;
    }
    Poly& operator*=(const Rat& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(Poly a, const Rat& s) { return a *= s; }
    friend Poly operator*(const Rat& s, Poly a) { return a *= s; }
    friend Poly operator-(Poly a) { return a *= Rat(-1); }
    friend bool operator==(const Poly& a, const Poly& b) {
        return a.chart_ == b.chart_ && a.terms_ == b.terms_;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [m, c] : terms_) {
            Rat a = c;
            if (first) {
                if (a < 0) {
                    os << "-";
                    a = -a;
                }
            } else {
                os << (a < 0 ? " - " : " + ");
                if (a < 0) a = -a;
            }
            first = false;
            bool wrote = false;
            if (a != 1 || m.is_one()) {
                os << rat_str(a);
                wrote = true;
            }
            for (std::size_t i = 0; i < m.exponents.size(); ++i) {
                if (m.exponents[i] == 0) continue;
                if (wrote) os << "*";
                wrote = true;
                os << chart_->name(i);
                if (m.exponents[i] > 1) os << "^" << m.exponents[i];
            }
        }
        return os.str();
    }

private:
    ChartPtr chart_;
    std::map<Monomial, Rat> terms_;
};

/// Product of two monomials in canonical order.  Returns the Koszul sign, or
/// 0 if an odd coordinate squares; writes the merged exponents into out.
inline Rat monomial_mul(const Chart& chart, const Monomial& a, const Monomial& b, Monomial& out) {
    const std::size_t n = chart.size();
    out.exponents.assign(n, 0);
    long long parity = 0;
    // Factors of b must move left past the factors of a with larger index.
    // Only odd-degree coordinates (exponent 0/1) contribute signs.
    long long odd_suffix = 0;  // number of odd factors of a at index > j, built backwards
    // Precompute: for each odd j with b_j = 1, count odd factors of a at index > j.
    for (std::size_t j = n; j-- > 0;) {
        if (b.exponents[j] != 0 && chart.odd(j)) parity += odd_suffix;
        if (a.exponents[j] != 0 && chart.odd(j)) ++odd_suffix;
    }
    for (std::size_t i = 0; i < n; ++i) {
        int e = a.exponents[i] + b.exponents[i];
        if (chart.odd(i) && e > 1) return Rat(0);
        out.exponents[i] = e;
    }
    return sign_pow(parity);
}

/// Graded-commutative product.
inline Poly poly_mul(const Poly& a, const Poly& b) {
    require_same_chart(a.chart(), b.chart());
    Poly r(a.chart());
    Monomial m;
    for (const auto& [ma, ca] : a.terms())
        for (const auto& [mb, cb] : b.terms()) {
            Rat s = monomial_mul(*a.chart(), ma, mb, m);
            if (s != 0) r.add_term(m, s * ca * cb);
        }
    return r;
}

inline Poly operator*(const Poly& a, const Poly& b) { return poly_mul(a, b); }

}  // namespace dgatlas
