#pragma once

// Differential operators on a graded polynomial chart.
//
// A DiffOp is kept in normal form: a Rat-linear combination of terms
// (coordinate monomial) * (partial-derivative word), with the derivative word
// in canonical chart order.  Partials act from the left as graded
// derivations:  d_i(x_j) = delta_ij,  d_i(fg) = d_i(f) g + (-1)^{|d_i||f|} f d_i(g),
// with deg d_i = -deg x_i.

#include "dgatlas/poly.hpp"

#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace dgatlas {

/// A word of partial derivatives, as a multi-exponent over the coordinates.
/// Odd partials square to zero, so their exponents are 0 or 1.
struct DerMonomial {
    std::vector<int> exponents;

    friend auto operator<=>(const DerMonomial&, const DerMonomial&) = default;

    Degree degree(const Chart& chart) const {
        Degree d = 0;
        for (std::size_t i = 0; i < exponents.size(); ++i)
            d -= exponents[i] * chart.degree(i);
        return d;
    }
    int order() const {
        int o = 0;
        for (int e : exponents) o += e;
        return o;
    }
    bool is_empty() const { return order() == 0; }

    static DerMonomial empty(const Chart& chart) {
        return DerMonomial{std::vector<int>(chart.size(), 0)};
    }
};

/// The single left graded derivation d_i applied to f.
inline Poly partial(std::size_t i, const Poly& f) {
    const Chart& chart = *f.chart();
    Poly out(f.chart());
    const bool odd_i = chart.odd(i);
    for (const auto& [m, c] : f.terms()) {
        int e = m.exponents[i];
        if (e == 0) continue;
        long long prefix_parity = 0;
        if (odd_i) {
            for (std::size_t j = 0; j < i; ++j)
                if (chart.odd(j) && m.exponents[j] != 0) ++prefix_parity;
        }
        Monomial m2 = m;
        m2.exponents[i] = e - 1;
        out.add_term(m2, c * Rat(e) * sign_pow(prefix_parity));
    }
    return out;
}

/// Applies a derivative word, rightmost partial first.
inline Poly apply_word(const DerMonomial& w, Poly f) {
    for (std::size_t i = w.exponents.size(); i-- > 0;)
        for (int k = 0; k < w.exponents[i]; ++k) f = partial(i, f);
    return f;
}

class DiffOp {
public:
    struct Key {
        Monomial m;
        DerMonomial w;
        friend auto operator<=>(const Key&, const Key&) = default;
    };

    DiffOp() = default;
    explicit DiffOp(ChartPtr chart) : chart_(std::move(chart)) {}

    static DiffOp zero(ChartPtr chart) { return DiffOp(std::move(chart)); }

    /// The identity operator id (unit coefficient, empty derivative word).
    static DiffOp identity(ChartPtr chart) {
        DiffOp d(chart);
        d.add_term(Monomial{std::vector<int>(chart->size(), 0)}, DerMonomial::empty(*chart),
                   Rat(1));
        return d;
    }

    /// Multiplication operator f * id.
    static DiffOp times(const Poly& f) {
        DiffOp d(f.chart());
        DerMonomial e = DerMonomial::empty(*f.chart());
        for (const auto& [m, c] : f.terms()) d.add_term(m, e, c);
        return d;
    }

    /// The bare partial d_i.
    static DiffOp partial_op(ChartPtr chart, std::size_t i) {
        DiffOp d(chart);
        DerMonomial w = DerMonomial::empty(*chart);
        w.exponents.at(i) = 1;
        d.add_term(Monomial{std::vector<int>(chart->size(), 0)}, w, Rat(1));
        return d;
    }

    const ChartPtr& chart() const { return chart_; }
    const std::map<Key, Rat>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(const Monomial& m, const DerMonomial& w, const Rat& c) {
        if (c == 0) return;
        Key k{m, w};
        auto it = terms_.find(k);
        if (it == terms_.end()) {
            terms_.emplace(std::move(k), c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    DiffOp& operator+=(const DiffOp& o) {
        require_same_chart(chart_, o.chart_);
        for (const auto& [k, c] : o.terms_) add_term(k.m, k.w, c);
        return *this;
    }
    DiffOp& operator-=(const DiffOp& o) {
        require_same_chart(chart_, o.chart_);
        for (const auto& [k, c] : o.terms_) add_term(k.m, k.w, -c);
        return *this;
    }
    DiffOp& operator*=(const Rat& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [k, c] : terms_) c *= s;
        return *this;
    }
    friend DiffOp operator+(DiffOp a, const DiffOp& b) { return a += b; }
    friend DiffOp operator-(DiffOp a, const DiffOp& b) { return a -= b; }
    friend DiffOp operator*(DiffOp a, const Rat& s) { return a *= s; }
    friend DiffOp operator*(const Rat& s, DiffOp a) { return a *= s; }
    friend DiffOp operator-(DiffOp a) { return a *= Rat(-1); }
    friend bool operator==(const DiffOp& a, const DiffOp& b) {
        return a.chart_ == b.chart_ && a.terms_ == b.terms_;
    }

    /// Vertical degree of the term (m, w).
    Degree term_degree(const Key& k) const {
        return k.m.degree(*chart_) + k.w.degree(*chart_);
    }

    /// Degree if homogeneous; nullopt for 0 or mixed degrees.
    std::optional<Degree> degree() const {
        std::optional<Degree> d;
        for (const auto& [k, c] : terms_) {
            Degree td = term_degree(k);
            if (!d)
                d = td;
            else if (*d != td)
                return std::nullopt;
        }
        return d;
    }

    int max_order() const {
        int o = 0;
        for (const auto& [k, c] : terms_) o = std::max(o, k.w.order());
        return o;
    }

    std::map<Degree, DiffOp> homogeneous_parts() const {
        std::map<Degree, DiffOp> parts;
        for (const auto& [k, c] : terms_) {
            Degree d = term_degree(k);
            auto it = parts.find(d);
            if (it == parts.end()) it = parts.emplace(d, DiffOp(chart_)).first;
            it->second.add_term(k.m, k.w, c);
        }
        return parts;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [k, c] : terms_) {
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
            if (a != 1) {
                os << rat_str(a);
                wrote = true;
            }
            for (std::size_t i = 0; i < k.m.exponents.size(); ++i) {
                if (k.m.exponents[i] == 0) continue;
                if (wrote) os << "*";
                wrote = true;
                os << chart_->name(i);
                if (k.m.exponents[i] > 1) os << "^" << k.m.exponents[i];
            }
            for (std::size_t i = 0; i < k.w.exponents.size(); ++i) {
                if (k.w.exponents[i] == 0) continue;
                if (wrote) os << "*";
                wrote = true;
                os << "d_" << chart_->name(i);
                if (k.w.exponents[i] > 1) os << "^" << k.w.exponents[i];
            }
            if (!wrote) os << "id";
        }
        return os.str();
    }

private:
    ChartPtr chart_;
    std::map<Key, Rat> terms_;
};

/// Evaluates D on f.
inline Poly apply(const DiffOp& D, const Poly& f) {
    require_same_chart(D.chart(), f.chart());
    Poly out(f.chart());
    for (const auto& [k, c] : D.terms()) {
        Poly g = apply_word(k.w, f);
        if (g.is_zero()) continue;
        out += c * poly_mul(Poly::monomial(D.chart(), k.m, Rat(1)), g);
    }
    return out;
}

namespace detail {

/// d_i composed from the left onto the normal-form operator T:
///   d_i o (m w) = d_i(m) w + (-1)^{|d_i||m|} m (d_i o w),
/// where d_i slides into its canonical slot of w with a Koszul sign.
inline DiffOp push_partial(std::size_t i, const DiffOp& T) {
    const Chart& chart = *T.chart();
    const bool odd_i = chart.odd(i);
    DiffOp out(T.chart());
    for (const auto& [k, c] : T.terms()) {
        // Leibniz term: differentiate the coefficient monomial.
        Poly dm = partial(i, Poly::monomial(T.chart(), k.m, Rat(1)));
        for (const auto& [m2, c2] : dm.terms()) out.add_term(m2, k.w, c * c2);
        // Pass-through term: insert d_i into the derivative word.
        if (odd_i && k.w.exponents[i] != 0) continue;  // odd square of a partial
        long long parity = 0;
        if (odd_i) {
            if (is_odd(k.m.degree(chart))) ++parity;
            for (std::size_t j = 0; j < i; ++j)
                if (chart.odd(j) && k.w.exponents[j] != 0) ++parity;
        }
        DerMonomial w2 = k.w;
        ++w2.exponents[i];
        out.add_term(k.m, w2, c * sign_pow(parity));
    }
    return out;
}

}  // namespace detail

/// Normal form of D o E:  apply(compose(D,E), f) = apply(D, apply(E, f)).
inline DiffOp compose(const DiffOp& D, const DiffOp& E) {
    require_same_chart(D.chart(), E.chart());
    DiffOp out(D.chart());
    for (const auto& [kd, cd] : D.terms()) {
        // Seed with the E-side term, then push D's partials on from the right
        // end of D's derivative word inward, and finally multiply by D's
        // coefficient monomial on the left.
        DiffOp acc(D.chart());
        for (const auto& [ke, ce] : E.terms()) acc.add_term(ke.m, ke.w, ce);
        for (std::size_t i = kd.w.exponents.size(); i-- > 0;)
            for (int r = 0; r < kd.w.exponents[i]; ++r) acc = detail::push_partial(i, acc);
        Poly mono = Poly::monomial(D.chart(), kd.m, cd);
        for (const auto& [ka, ca] : acc.terms()) {
            Poly coeff = poly_mul(mono, Poly::monomial(D.chart(), ka.m, Rat(1)));
            for (const auto& [m2, c2] : coeff.terms()) out.add_term(m2, ka.w, ca * c2);
        }
    }
    return out;
}

/// Graded commutator [D,E] = D o E - (-1)^{|D||E|} E o D, extended bilinearly
/// over homogeneous parts.
inline DiffOp graded_commutator(const DiffOp& D, const DiffOp& E) {
    DiffOp out(D.chart());
    for (const auto& [dd, Dp] : D.homogeneous_parts())
        for (const auto& [de, Ep] : E.homogeneous_parts()) {
            out += compose(Dp, Ep);
            out -= sign_pow(static_cast<long long>(dd) * de) * compose(Ep, Dp);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Vector fields

/// A derivation X = sum_i X^i d_i, stored by components.
class VectorField {
public:
    VectorField() = default;
    explicit VectorField(ChartPtr chart)
        : chart_(std::move(chart)), components_(chart_->size(), Poly(chart_)) {}

    static VectorField zero(ChartPtr chart) { return VectorField(std::move(chart)); }

    const ChartPtr& chart() const { return chart_; }
    const Poly& component(std::size_t i) const { return components_.at(i); }
    void set_component(std::size_t i, Poly p) {
        require_same_chart(chart_, p.chart());
        components_.at(i) = std::move(p);
    }

    bool is_zero() const {
        for (const auto& p : components_)
            if (!p.is_zero()) return false;
        return true;
    }

    DiffOp to_diffop() const {
        DiffOp d(chart_);
        for (std::size_t i = 0; i < components_.size(); ++i) {
            DerMonomial w = DerMonomial::empty(*chart_);
            w.exponents[i] = 1;
            for (const auto& [m, c] : components_[i].terms()) d.add_term(m, w, c);
        }
        return d;
    }

    /// Inverse of to_diffop; fails if D has terms of order != 1.
    static VectorField from_diffop(const DiffOp& D) {
        VectorField X(D.chart());
        for (const auto& [k, c] : D.terms()) {
            if (k.w.order() != 1)
                throw std::invalid_argument("from_diffop: operator is not a vector field");
            for (std::size_t i = 0; i < k.w.exponents.size(); ++i)
                if (k.w.exponents[i] == 1) {
                    Poly p = X.components_[i];
                    p.add_term(k.m, c);
                    X.components_[i] = std::move(p);
                }
        }
        return X;
    }

    Poly apply(const Poly& f) const {
        Poly out(chart_);
        for (std::size_t i = 0; i < components_.size(); ++i) {
            if (components_[i].is_zero()) continue;
            out += poly_mul(components_[i], partial(i, f));
        }
        return out;
    }

    std::optional<Degree> degree() const { return to_diffop().degree(); }
    bool is_homogeneous(Degree d) const {
        auto deg = degree();
        return is_zero() || (deg && *deg == d);
    }

    VectorField& operator+=(const VectorField& o) {
        require_same_chart(chart_, o.chart_);
        for (std::size_t i = 0; i < components_.size(); ++i) components_[i] += o.components_[i];
        return *this;
    }
    VectorField& operator-=(const VectorField& o) {
        require_same_chart(chart_, o.chart_);
        for (std::size_t i = 0; i < components_.size(); ++i) components_[i] -= o.components_[i];
        return *this;
    }
    VectorField& operator*=(const Rat& s) {
        for (auto& p : components_) p *= s;
        return *this;
    }
    friend VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
    friend VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
    friend VectorField operator*(const Rat& s, VectorField a) { return a *= s; }
    friend bool operator==(const VectorField& a, const VectorField& b) {
        return a.chart_ == b.chart_ && a.components_ == b.components_;
    }

    std::string str() const { return to_diffop().str(); }

private:
    ChartPtr chart_;
    std::vector<Poly> components_;
};

/// [X,Y] = X o Y - (-1)^{|X||Y|} Y o X as a derivation.
inline VectorField lie_bracket(const VectorField& X, const VectorField& Y) {
    return VectorField::from_diffop(graded_commutator(X.to_diffop(), Y.to_diffop()));
}

/// True iff X (homogeneous of degree +1) satisfies [X,X] = 0.
inline bool check_homological(const VectorField& X) {
    if (!X.is_homogeneous(1))
        throw std::invalid_argument("check_homological: field must be homogeneous of degree +1");
    return lie_bracket(X, X).is_zero();
}

/// A degree +1 vector field with [Q,Q] = 0, validated at construction.
class HomologicalField {
public:
    explicit HomologicalField(VectorField field) : field_(std::move(field)) {
        if (!check_homological(field_))
            throw std::invalid_argument("HomologicalField: [Q,Q] != 0");
    }
    const VectorField& field() const { return field_; }
    const ChartPtr& chart() const { return field_.chart(); }
    Poly apply(const Poly& f) const { return field_.apply(f); }

private:
    VectorField field_;
};

/// L_Q(D) = [Q,D] = Q o D - (-1)^{|D|} D o Q; raises degree by one.
inline DiffOp L_Q(const HomologicalField& Q, const DiffOp& D) {
    return graded_commutator(Q.field().to_diffop(), D);
}

// ---------------------------------------------------------------------------
// Order <= 1 operators and their bimodule structure

/// An element X + g of the bimodule of operators of order <= 1.
struct FirstOrderOp {
    VectorField vector_part;
    Poly scalar_part;

    friend bool operator==(const FirstOrderOp&, const FirstOrderOp&) = default;
};

/// f . (X + g) = fX + fg.
inline FirstOrderOp bimodule_left(const Poly& f, const FirstOrderOp& D) {
    FirstOrderOp out{VectorField(f.chart()), poly_mul(f, D.scalar_part)};
    for (std::size_t i = 0; i < f.chart()->size(); ++i)
        out.vector_part.set_component(i, poly_mul(f, D.vector_part.component(i)));
    return out;
}

/// (X + g) . f = (-1)^{|f||X|} fX + (X(f) + gf).
inline FirstOrderOp bimodule_right(const FirstOrderOp& D, const Poly& f) {
    const ChartPtr& chart = f.chart();
    FirstOrderOp out{VectorField(chart),
                     D.vector_part.apply(f) + poly_mul(D.scalar_part, f)};
    DiffOp xd = D.vector_part.to_diffop();
    for (const auto& [dx, Xp] : xd.homogeneous_parts()) {
        VectorField Xh = VectorField::from_diffop(Xp);
        for (const auto& [df, fp] : f.homogeneous_parts()) {
            Rat s = sign_pow(static_cast<long long>(dx) * df);
            for (std::size_t i = 0; i < chart->size(); ++i)
                out.vector_part.set_component(
                    i, out.vector_part.component(i) + s * poly_mul(fp, Xh.component(i)));
        }
    }
    return out;
}

}  // namespace dgatlas
