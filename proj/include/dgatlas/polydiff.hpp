#pragma once

// Polydifferential operators: finite sums over arities n of n-fold tensor
// words of differential operators over the function algebra.
//
// Normal form: every term is (left Poly coefficient) * (tuple of pure
// derivative words).  This is valid because a coefficient can always be moved
// to the front across pure words W of total degree |W| = 1 + deg W via
//   x (x)tensor f y = (-1)^{|f||x|} f (x (x)tensor y).
//
// Degree conventions: a pure word W in slot k has total degree 1 + deg(W)
// (horizontal degree 1, vertical degree deg W); a term's vertical degree adds
// the coefficient degree; total degree = arity + vertical degree.
//
// Evaluation carries the sign
//   D(f_1,..,f_n) = (-1)^* D_1(f_1) ... D_n(f_n),
//   * = sum_{i<j} (deg f_i + 1) |D_j|.

#include "dgatlas/diffop.hpp"
#include "dgatlas/perm.hpp"

#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

namespace dgatlas {

using DerTuple = std::vector<DerMonomial>;

inline Degree tuple_vertical_degree(const Chart& chart, const DerTuple& t) {
    Degree d = 0;
    for (const auto& w : t) d += w.degree(chart);
    return d;
}

/// Sum of the total degrees |W_k| = 1 + deg W_k of the slots.
inline Degree tuple_total_degree(const Chart& chart, const DerTuple& t) {
    return static_cast<Degree>(t.size()) + tuple_vertical_degree(chart, t);
}

class PolyDiffOp {
public:
    PolyDiffOp() = default;
    explicit PolyDiffOp(ChartPtr chart) : chart_(std::move(chart)) {}

    static PolyDiffOp zero(ChartPtr chart) { return PolyDiffOp(std::move(chart)); }

    /// Inclusion of a function at arity 0.
    static PolyDiffOp from_function(const Poly& f) {
        PolyDiffOp d(f.chart());
        d.add(DerTuple{}, f);
        return d;
    }

    /// Inclusion of a differential operator at arity 1.
    static PolyDiffOp from_diffop(const DiffOp& D) {
        PolyDiffOp out(D.chart());
        for (const auto& [k, c] : D.terms())
            out.add(DerTuple{k.w}, Poly::monomial(D.chart(), k.m, c));
        return out;
    }

    /// The identity operator id at arity 1.
    static PolyDiffOp identity_op(ChartPtr chart) {
        return from_diffop(DiffOp::identity(std::move(chart)));
    }

    /// m = -id (x)tensor id, the (sign-adjusted) multiplication operator.
    static PolyDiffOp multiplication(ChartPtr chart) {
        PolyDiffOp d(chart);
        d.add(DerTuple{DerMonomial::empty(*chart), DerMonomial::empty(*chart)},
              Poly::constant(chart, -1));
        return d;
    }

    const ChartPtr& chart() const { return chart_; }
    const std::map<DerTuple, Poly>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add(const DerTuple& t, const Poly& c) {
        if (c.is_zero()) return;
        auto it = terms_.find(t);
        if (it == terms_.end()) {
            terms_.emplace(t, c);
        } else {
            it->second += c;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    /// Arity if all terms share one; nullopt for 0 or mixed.
    std::optional<int> arity() const {
        std::optional<int> a;
        for (const auto& [t, c] : terms_) {
            int n = static_cast<int>(t.size());
            if (!a)
                a = n;
            else if (*a != n)
                return std::nullopt;
        }
        return a;
    }

    /// Total degree (arity + vertical) if homogeneous.
    std::optional<Degree> total_degree() const {
        std::optional<Degree> d;
        for (const auto& [t, c] : terms_) {
            Degree base = tuple_total_degree(*chart_, t);
            for (const auto& [m, a] : c.terms()) {
                Degree td = base + m.degree(*chart_);
                if (!d)
                    d = td;
                else if (*d != td)
                    return std::nullopt;
            }
        }
        return d;
    }

    std::optional<BiDegree> bidegree() const {
        auto a = arity();
        auto t = total_degree();
        if (!a || !t) return std::nullopt;
        return BiDegree{*a, *t - *a};
    }

    /// Splits into (arity, vertical-degree)-homogeneous parts.
    std::map<std::pair<int, Degree>, PolyDiffOp> bihomogeneous_parts() const {
        std::map<std::pair<int, Degree>, PolyDiffOp> parts;
        for (const auto& [t, c] : terms_) {
            Degree base = tuple_vertical_degree(*chart_, t);
            for (const auto& [m, a] : c.terms()) {
                std::pair<int, Degree> key{static_cast<int>(t.size()), base + m.degree(*chart_)};
                auto it = parts.find(key);
                if (it == parts.end()) it = parts.emplace(key, PolyDiffOp(chart_)).first;
                it->second.add(t, Poly::monomial(chart_, m, a));
            }
        }
        return parts;
    }

    PolyDiffOp arity_part(int n) const {
        PolyDiffOp out(chart_);
        for (const auto& [t, c] : terms_)
            if (static_cast<int>(t.size()) == n) out.add(t, c);
        return out;
    }

    PolyDiffOp& operator+=(const PolyDiffOp& o) {
        require_same_chart(chart_, o.chart_);
        for (const auto& [t, c] : o.terms_) add(t, c);
        return *this;
    }
    PolyDiffOp& operator-=(const PolyDiffOp& o) {
        require_same_chart(chart_, o.chart_);
        for (const auto& [t, c] : o.terms_) add(t, -c);
        return *this;
    }
    PolyDiffOp& operator*=(const Rat& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [t, c] : terms_) c *= s;
        return *this;
    }
    friend PolyDiffOp operator+(PolyDiffOp a, const PolyDiffOp& b) { return a += b; }
    friend PolyDiffOp operator-(PolyDiffOp a, const PolyDiffOp& b) { return a -= b; }
    friend PolyDiffOp operator*(PolyDiffOp a, const Rat& s) { return a *= s; }
    friend PolyDiffOp operator*(const Rat& s, PolyDiffOp a) { return a *= s; }
    friend PolyDiffOp operator-(PolyDiffOp a) { return a *= Rat(-1); }
    friend bool operator==(const PolyDiffOp& a, const PolyDiffOp& b) {
        return a.chart_ == b.chart_ && a.terms_ == b.terms_;
    }

    std::string str() const {
        if (terms_.empty()) return "0";
        std::ostringstream os;
        bool first = true;
        for (const auto& [t, c] : terms_) {
            if (!first) os << " + ";
            first = false;
            os << "(" << c.str() << ")";
            if (t.empty()) continue;
            os << "*[";
            for (std::size_t k = 0; k < t.size(); ++k) {
                if (k) os << " # ";
                bool wrote = false;
                for (std::size_t i = 0; i < t[k].exponents.size(); ++i) {
                    if (t[k].exponents[i] == 0) continue;
                    if (wrote) os << "*";
                    wrote = true;
                    os << "d_" << chart_->name(i);
                    if (t[k].exponents[i] > 1) os << "^" << t[k].exponents[i];
                }
                if (!wrote) os << "id";
            }
            os << "]";
        }
        return os.str();
    }

private:
    ChartPtr chart_;
    std::map<DerTuple, Poly> terms_;
};

// ---------------------------------------------------------------------------
// Word assembly

/// The tensor word D_1 (x)tensor ... (x)tensor D_n of arity-1 operators, in
/// normal form: each factor's coefficient moves left across the pure words
/// before it, contributing (-1)^{deg(coeff) * (total degree of the prefix)}.
inline PolyDiffOp from_word(const ChartPtr& chart, const std::vector<DiffOp>& factors) {
    PolyDiffOp out(chart);
    DerTuple tuple(factors.size());
    Poly coeff = Poly::constant(chart, 1);
    std::function<void(std::size_t, long long, Poly)> rec = [&](std::size_t k, long long prefix_tot,
                                                                Poly acc) {
        if (k == factors.size()) {
            out.add(tuple, acc);
            return;
        }
        require_same_chart(chart, factors[k].chart());
        for (const auto& [key, c] : factors[k].terms()) {
            tuple[k] = key.w;
            long long move = is_odd(key.m.degree(*chart)) && (prefix_tot % 2 != 0) ? 1 : 0;
            Poly next = poly_mul(acc, Poly::monomial(chart, key.m, c)) * sign_pow(move);
            rec(k + 1, prefix_tot + 1 + key.w.degree(*chart), std::move(next));
        }
    };
    rec(0, 0, coeff);
    return out;
}

// ---------------------------------------------------------------------------
// Evaluation

/// D(f_1,...,f_n) with the Tamarkin-Tsygan sign.
inline Poly eval(const PolyDiffOp& D, const std::vector<Poly>& args) {
    const ChartPtr& chart = D.chart();
    for (const auto& f : args) require_same_chart(chart, f.chart());
    auto ar = D.arity();
    if (!D.is_zero() && (!ar || *ar != static_cast<int>(args.size())))
        throw std::invalid_argument("eval: arity mismatch");
    // Homogeneous pieces of the arguments (the sign needs their degrees).
    std::vector<std::vector<std::pair<Degree, Poly>>> parts(args.size());
    for (std::size_t i = 0; i < args.size(); ++i)
        for (auto& [d, p] : args[i].homogeneous_parts()) parts[i].emplace_back(d, p);

    Poly out(chart);
    for (const auto& [tuple, c] : D.terms()) {
        const std::size_t n = tuple.size();
        std::vector<Degree> slot_total(n);
        for (std::size_t k = 0; k < n; ++k) slot_total[k] = 1 + tuple[k].degree(*chart);
        std::vector<std::size_t> choice(n, 0);
        std::function<void(std::size_t, long long, Poly)> rec = [&](std::size_t k, long long star,
                                                                    Poly acc) {
            if (k == n) {
                out += sign_pow(star) * acc;
                return;
            }
            for (const auto& [df, fp] : parts[k]) {
                Poly val = apply_word(tuple[k], fp);
                if (val.is_zero()) continue;
                long long extra = 0;
                for (std::size_t j = k + 1; j < n; ++j)
                    extra += static_cast<long long>(((df + 1) % 2 + 2) % 2) *
                             (((slot_total[j] % 2) + 2) % 2);
                rec(k + 1, star + extra, poly_mul(acc, val));
            }
        };
        rec(0, 0, c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cup product (tensor concatenation)

inline PolyDiffOp cup(const PolyDiffOp& D, const PolyDiffOp& E) {
    require_same_chart(D.chart(), E.chart());
    const ChartPtr& chart = D.chart();
    PolyDiffOp out(chart);
    for (const auto& [ta, ca] : D.terms()) {
        long long ta_tot = tuple_total_degree(*chart, ta);
        for (const auto& [tb, cb] : E.terms()) {
            DerTuple t = ta;
            t.insert(t.end(), tb.begin(), tb.end());
            // E's coefficient passes the pure words of D's tuple.
            Poly moved(chart);
            for (const auto& [m, a] : cb.terms()) {
                long long p = is_odd(m.degree(*chart)) && (ta_tot % 2 != 0) ? 1 : 0;
                moved.add_term(m, a * sign_pow(p));
            }
            out.add(t, poly_mul(ca, moved));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Leibniz splitting of derivative words

namespace detail {

/// Enumerates all ways to distribute the word w over `blocks` ordered blocks.
/// Calls fn(blocks, multiplicity, epsilon_parity) where multiplicity is the
/// product of multinomials from even-coordinate exponents and epsilon is the
/// Koszul unshuffle sign parity: one flip per pair of odd partials i < j with
/// block(i) > block(j).
inline void enumerate_splits(const Chart& chart, const DerMonomial& w, std::size_t blocks,
                             const std::function<void(const std::vector<DerMonomial>&, const Rat&,
                                                      long long)>& fn) {
    std::vector<DerMonomial> parts(blocks, DerMonomial::empty(chart));
    std::vector<std::pair<std::size_t, std::size_t>> odd_assign;  // (coordinate, block)
    std::function<void(std::size_t, Rat)> rec = [&](std::size_t i, Rat mult) {
        if (i == chart.size()) {
            long long eps = 0;
            for (std::size_t a = 0; a < odd_assign.size(); ++a)
                for (std::size_t b = a + 1; b < odd_assign.size(); ++b) {
                    // odd_assign is ordered by coordinate index
                    if (odd_assign[a].second > odd_assign[b].second) ++eps;
                }
            fn(parts, mult, eps);
            return;
        }
        int e = w.exponents[i];
        if (e == 0) {
            rec(i + 1, mult);
            return;
        }
        if (chart.odd(i)) {
            for (std::size_t b = 0; b < blocks; ++b) {
                parts[b].exponents[i] = 1;
                odd_assign.emplace_back(i, b);
                rec(i + 1, mult);
                odd_assign.pop_back();
                parts[b].exponents[i] = 0;
            }
        } else {
            // compositions of e into `blocks` parts, with multinomial weight
            std::vector<int> comp(blocks, 0);
            std::function<void(std::size_t, int)> dist = [&](std::size_t b, int left) {
                if (b + 1 == blocks) {
                    comp[b] = left;
                    Int multinomial = 1, div = 1;
                    int used = 0;
                    for (std::size_t k = 0; k < blocks; ++k)
                        for (int r = 1; r <= comp[k]; ++r) {
                            ++used;
                            multinomial *= used;
                            div *= r;
                        }
                    for (std::size_t k = 0; k < blocks; ++k) parts[k].exponents[i] = comp[k];
                    rec(i + 1, mult * Rat(multinomial, div));
                    for (std::size_t k = 0; k < blocks; ++k) parts[k].exponents[i] = 0;
                    return;
                }
                for (int take = 0; take <= left; ++take) {
                    comp[b] = take;
                    dist(b + 1, left - take);
                }
            };
            dist(0, e);
        }
    };
    rec(0, Rat(1));
}

/// Merges two pure derivative words (operator composition S o V of coefficient
/// free words).  Returns false on an odd-partial collision; kappa picks up one
/// flip per odd pair i < j with i in V and j in S.
inline bool merge_words(const Chart& chart, const DerMonomial& S, const DerMonomial& V,
                        DerMonomial& out, long long& kappa_parity) {
    out = DerMonomial::empty(chart);
    kappa_parity = 0;
    long long odd_S_above = 0;  // odd partials of S with index > current, scanned downward
    for (std::size_t i = chart.size(); i-- > 0;) {
        int e = S.exponents[i] + V.exponents[i];
        if (chart.odd(i)) {
            if (e > 1) return false;
            if (V.exponents[i] != 0) kappa_parity += odd_S_above;
            if (S.exponents[i] != 0) ++odd_S_above;
        }
        out.exponents[i] = e;
    }
    return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Coproduct

/// One Leibniz split (S, T, coefficient) of a pure derivative word, so that
/// the coproduct of the word is the sum of coeff * (S (x)tensor T).
inline std::vector<std::tuple<DerMonomial, DerMonomial, Rat>> delta_word(const Chart& chart,
                                                                         const DerMonomial& w) {
    std::vector<std::tuple<DerMonomial, DerMonomial, Rat>> out;
    detail::enumerate_splits(chart, w, 2,
                             [&](const std::vector<DerMonomial>& parts, const Rat& mult,
                                 long long eps) {
                                 long long t_deg = parts[1].degree(chart);
                                 Rat c = mult * sign_pow(eps + t_deg);
                                 out.emplace_back(parts[0], parts[1], c);
                             });
    return out;
}

/// The arity-2 coproduct determined by Delta(D)(f1,f2) = (-1)^{deg f1 + 1} D(f1 f2).
inline PolyDiffOp coproduct_delta(const DiffOp& D) {
    PolyDiffOp out(D.chart());
    for (const auto& [k, c] : D.terms()) {
        Poly coeff = Poly::monomial(D.chart(), k.m, c);
        for (const auto& [S, T, s] : delta_word(*D.chart(), k.w)) out.add(DerTuple{S, T}, s * coeff);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Gerstenhaber product

namespace detail {

/// The arity-m operator (f_1..f_m) |-> P(E(f_1..f_m)) for a single-operator P
/// and an E-term d * (V_1,...,V_m), in normal form.
inline PolyDiffOp insert_into_slot(const DiffOp& P, const DerTuple& V, const Poly& d) {
    const ChartPtr& chart = P.chart();
    const std::size_t m = V.size();
    std::vector<long long> v(m);
    for (std::size_t k = 0; k < m; ++k) v[k] = (((V[k].degree(*chart) % 2) + 2) % 2);
    PolyDiffOp out(chart);
    for (const auto& [pk, pc] : P.terms()) {
        Poly mono_p = Poly::monomial(chart, pk.m, pc);
        for (const auto& [md, cd] : d.terms()) {
            long long delta = is_odd(md.degree(*chart)) ? 1 : 0;
            Poly mono_d = Poly::monomial(chart, md, cd);
            enumerate_splits(*chart, pk.w, m + 1,
                             [&](const std::vector<DerMonomial>& S, const Rat& mult, long long eps) {
                                 DerTuple U(m);
                                 long long parity = eps;
                                 long long v_prefix = 0;
                                 for (std::size_t k = 0; k < m; ++k) {
                                     long long kp;
                                     if (!merge_words(*chart, S[k + 1], V[k], U[k], kp)) return;
                                     parity += kp;
                                     long long wk = (((S[k + 1].degree(*chart) % 2) + 2) % 2);
                                     parity += wk * (static_cast<long long>(k) + delta + v_prefix);
                                     v_prefix += v[k];
                                 }
                                 Poly coeff = poly_mul(mono_p, apply_word(S[0], mono_d));
                                 if (coeff.is_zero()) return;
                                 out.add(U, coeff * (mult * sign_pow(parity)));
                             });
        }
    }
    return out;
}

inline long long par(Degree d) { return ((d % 2) + 2) % 2; }

}  // namespace detail

/// The Gerstenhaber (insertion) product D o E; arities n >= 1 and m >= 0
/// compose to arity n + m - 1.
inline PolyDiffOp gerstenhaber_product(const PolyDiffOp& D, const PolyDiffOp& E) {
    require_same_chart(D.chart(), E.chart());
    const ChartPtr& chart = D.chart();
    PolyDiffOp out(chart);
    for (const auto& [W, cD] : D.terms()) {
        const int n = static_cast<int>(W.size());
        if (n == 0)
            throw std::invalid_argument("gerstenhaber_product: left operand has arity 0 terms");
        std::vector<long long> omega(W.size());
        for (std::size_t l = 0; l < W.size(); ++l) omega[l] = detail::par(W[l].degree(*chart));
        for (const auto& [V, cE] : E.terms()) {
            const int m = static_cast<int>(V.size());
            long long v_sum = detail::par(tuple_vertical_degree(*chart, V));
            for (const auto& [mE, aE] : cE.terms()) {
                long long Etilde = (detail::par(mE.degree(*chart)) + v_sum) % 2;
                Poly e_piece = Poly::monomial(chart, mE, aE);
                for (int i = 1; i <= n; ++i) {
                    const int j = i - 1;  // arguments before the insertion slot
                    DiffOp Pword(chart);
                    Pword.add_term(Monomial{std::vector<int>(chart->size(), 0)},
                                   W[static_cast<std::size_t>(i - 1)], Rat(1));
                    PolyDiffOp R = detail::insert_into_slot(Pword, V, e_piece);
                    for (const auto& [U, cU] : R.terms()) {
                        // Sign bookkeeping evaluated at argument degrees zero;
                        // the dependence on argument degrees cancels exactly.
                        long long star_j = (static_cast<long long>(m) + Etilde + 1) * j;
                        long long star_D = 0;
                        for (int l = 1; l <= n; ++l)
                            star_D += static_cast<long long>(l - 1) *
                                      (omega[static_cast<std::size_t>(l - 1)] + 1);
                        long long tail = 0;
                        for (int l = i + 1; l <= n; ++l)
                            tail += omega[static_cast<std::size_t>(l - 1)] + 1;
                        star_D += Etilde * tail;
                        long long star_R = 0;
                        for (std::size_t l = 0; l < U.size(); ++l)
                            star_R += static_cast<long long>(l) *
                                      (detail::par(U[l].degree(*chart)) + 1);
                        DerTuple F;
                        F.reserve(static_cast<std::size_t>(n + m - 1));
                        F.insert(F.end(), W.begin(), W.begin() + (i - 1));
                        F.insert(F.end(), U.begin(), U.end());
                        F.insert(F.end(), W.begin() + i, W.end());
                        long long star_F = 0;
                        for (std::size_t l = 0; l < F.size(); ++l)
                            star_F += static_cast<long long>(l) *
                                      (detail::par(F[l].degree(*chart)) + 1);
                        long long move_prefix = 0;
                        for (int l = 1; l <= j; ++l)
                            move_prefix += omega[static_cast<std::size_t>(l - 1)];
                        for (const auto& [mc, ac] : cU.terms()) {
                            long long move =
                                is_odd(mc.degree(*chart)) && (move_prefix % 2 != 0) ? 1 : 0;
                            long long total = star_j + star_D + star_R + star_F + move;
                            Poly coeff =
                                poly_mul(cD, Poly::monomial(chart, mc, ac)) * sign_pow(total);
                            out.add(F, coeff);
                        }
                    }
                }
            }
        }
    }
    return out;
}

/// [D,E] = D o E - (-1)^{(|D|+1)(|E|+1)} E o D, extended bilinearly over
/// bihomogeneous parts.  Compositions whose left factor has arity 0 vanish
/// (there is no slot to insert into).
inline PolyDiffOp gerstenhaber_bracket(const PolyDiffOp& D, const PolyDiffOp& E) {
    require_same_chart(D.chart(), E.chart());
    const ChartPtr& chart = D.chart();
    auto comp = [&](const PolyDiffOp& A, const PolyDiffOp& B) {
        if (A.is_zero() || *A.arity() == 0) return PolyDiffOp::zero(chart);
        return gerstenhaber_product(A, B);
    };
    PolyDiffOp out(chart);
    for (const auto& [ka, Ap] : D.bihomogeneous_parts())
        for (const auto& [kb, Bp] : E.bihomogeneous_parts()) {
            long long da = ka.first + ka.second;  // total degree
            long long db = kb.first + kb.second;
            out += comp(Ap, Bp);
            out -= sign_pow((da + 1) * (db + 1)) * comp(Bp, Ap);
        }
    return out;
}

/// The canonical bracket <<D,E>> = D (x) E - (-1)^{|D||E|} E (x) D on tensor
/// words, extended bilinearly over bihomogeneous parts.
inline PolyDiffOp canonical_bracket(const PolyDiffOp& D, const PolyDiffOp& E) {
    require_same_chart(D.chart(), E.chart());
    PolyDiffOp out(D.chart());
    for (const auto& [ka, Ap] : D.bihomogeneous_parts())
        for (const auto& [kb, Bp] : E.bihomogeneous_parts()) {
            long long da = ka.first + ka.second;
            long long db = kb.first + kb.second;
            out += cup(Ap, Bp);
            out -= sign_pow(da * db) * cup(Bp, Ap);
        }
    return out;
}

// ---------------------------------------------------------------------------
// Hochschild differential

/// Explicit formula route.
inline PolyDiffOp hochschild_d(const PolyDiffOp& D) {
    const ChartPtr& chart = D.chart();
    PolyDiffOp out(chart);
    const DerMonomial id_word = DerMonomial::empty(*chart);
    for (const auto& [W, c] : D.terms()) {
        const std::size_t n = W.size();
        if (n == 0) continue;  // functions are d_H-closed
        long long S = detail::par(tuple_total_degree(*chart, W));
        for (const auto& [mc, ac] : c.terms()) {
            long long ctil = is_odd(mc.degree(*chart)) ? 1 : 0;
            Poly mono = Poly::monomial(chart, mc, ac);
            Rat base = sign_pow(S + ctil);
            // D (x) id
            DerTuple right = W;
            right.push_back(id_word);
            out.add(right, base * mono);
            // coproduct insertions
            for (std::size_t i = 0; i < n; ++i) {
                long long suffix = 0;
                for (std::size_t l = i + 1; l < n; ++l)
                    suffix += detail::par(W[l].degree(*chart)) + 1;
                Rat factor = -base * sign_pow(suffix);
                for (const auto& [Sw, Tw, s] : delta_word(*chart, W[i])) {
                    DerTuple t;
                    t.reserve(n + 1);
                    t.insert(t.end(), W.begin(), W.begin() + static_cast<long>(i));
                    t.push_back(Sw);
                    t.push_back(Tw);
                    t.insert(t.end(), W.begin() + static_cast<long>(i) + 1, W.end());
                    out.add(t, factor * s * mono);
                }
            }
            // id (x) D: the coefficient passes the prepended id.
            DerTuple left;
            left.reserve(n + 1);
            left.push_back(id_word);
            left.insert(left.end(), W.begin(), W.end());
            out.add(left, -sign_pow(ctil) * mono);
        }
    }
    return out;
}

/// Bracket route: d_H = [m, .] with m = -id (x)tensor id.
inline PolyDiffOp hochschild_d_via_m(const PolyDiffOp& D) {
    return gerstenhaber_bracket(PolyDiffOp::multiplication(D.chart()), D);
}

/// Vertical differential L_Q = [Q, .] (Gerstenhaber bracket with the arity-1
/// image of Q).
inline PolyDiffOp lie_q(const HomologicalField& Q, const PolyDiffOp& D) {
    return gerstenhaber_bracket(PolyDiffOp::from_diffop(Q.field().to_diffop()), D);
}

// ---------------------------------------------------------------------------
// Hopf structure

/// One term of an expansion in the outer tensor layer (never flattened).
struct PairTerm {
    PolyDiffOp left;
    PolyDiffOp right;
    Rat coeff;
};
using PairExpansion = std::vector<PairTerm>;

/// Shuffle coproduct: sum over (p,q)-shuffles of the factors of each tensor
/// word, with Koszul signs from total degrees.
inline PairExpansion shuffle_coproduct(const PolyDiffOp& D) {
    const ChartPtr& chart = D.chart();
    PairExpansion out;
    for (const auto& [W, c] : D.terms()) {
        const int n = static_cast<int>(W.size());
        for (const auto& [mc, ac] : c.terms()) {
            // Treat the term as the word (mc W_1, W_2, ..., W_n).
            std::vector<DiffOp> factors;
            std::vector<Degree> totals;
            for (int k = 0; k < n; ++k) {
                DiffOp f(chart);
                f.add_term(k == 0 ? mc : Monomial{std::vector<int>(chart->size(), 0)},
                           W[static_cast<std::size_t>(k)], Rat(1));
                Degree tot = 1 + W[static_cast<std::size_t>(k)].degree(*chart);
                if (k == 0) tot += mc.degree(*chart);
                factors.push_back(std::move(f));
                totals.push_back(tot);
            }
            if (n == 0) {
                out.push_back({PolyDiffOp::from_function(Poly::monomial(chart, mc, ac)),
                               PolyDiffOp::from_function(Poly::constant(chart, 1)), Rat(1)});
                continue;
            }
            for (int p = 0; p <= n; ++p) {
                for (const auto& sh : shuffles(p, n - p)) {
                    Rat kappa = koszul_sign(sh, totals);
                    std::vector<DiffOp> L, R;
                    for (int k = 1; k <= p; ++k)
                        L.push_back(factors[static_cast<std::size_t>(sh(k) - 1)]);
                    for (int k = p + 1; k <= n; ++k)
                        R.push_back(factors[static_cast<std::size_t>(sh(k) - 1)]);
                    PolyDiffOp lhs = L.empty()
                                         ? PolyDiffOp::from_function(Poly::constant(chart, 1))
                                         : from_word(chart, L);
                    PolyDiffOp rhs = R.empty()
                                         ? PolyDiffOp::from_function(Poly::constant(chart, 1))
                                         : from_word(chart, R);
                    out.push_back({std::move(lhs), std::move(rhs), ac * kappa});
                }
            }
        }
    }
    return out;
}

/// Canonical form of a pair expansion: coefficients of both sides moved to a
/// single left Poly, keyed by the two basis tuples.
inline std::map<std::pair<DerTuple, DerTuple>, Poly> pair_normal_form(const ChartPtr& chart,
                                                                      const PairExpansion& e) {
    std::map<std::pair<DerTuple, DerTuple>, Poly> out;
    auto fold = [&](const std::pair<DerTuple, DerTuple>& key, const Poly& add) {
        auto it = out.find(key);
        if (it == out.end())
            out.emplace(key, add);
        else {
            it->second += add;
            if (it->second.is_zero()) out.erase(it);
        }
    };
    for (const auto& term : e) {
        for (const auto& [tl, cl] : term.left.terms())
            for (const auto& [tr, cr] : term.right.terms()) {
                // The right coefficient crosses only the left pure words: its
                // reordering with the left coefficient is poly_mul's job.
                long long left_tot = tuple_total_degree(*chart, tl);
                for (const auto& [ml, al] : cl.terms()) {
                    for (const auto& [mr, ar] : cr.terms()) {
                        long long move = detail::par(mr.degree(*chart)) * (((left_tot % 2) + 2) % 2);
                        Poly coeff = poly_mul(Poly::monomial(chart, ml, al),
                                              Poly::monomial(chart, mr, ar)) *
                                     (term.coeff * sign_pow(move));
                        if (!coeff.is_zero()) fold({tl, tr}, coeff);
                    }
                }
            }
    }
    return out;
}

/// Antipode: reverses tensor words with the total-degree reversal sign.
inline PolyDiffOp antipode(const PolyDiffOp& D) {
    const ChartPtr& chart = D.chart();
    PolyDiffOp out(chart);
    for (const auto& [W, c] : D.terms()) {
        const int n = static_cast<int>(W.size());
        for (const auto& [mc, ac] : c.terms()) {
            std::vector<DiffOp> factors;
            std::vector<Degree> totals;
            for (int k = 0; k < n; ++k) {
                DiffOp f(chart);
                f.add_term(k == 0 ? mc : Monomial{std::vector<int>(chart->size(), 0)},
                           W[static_cast<std::size_t>(k)], Rat(1));
                Degree tot = 1 + W[static_cast<std::size_t>(k)].degree(*chart);
                if (k == 0) tot += mc.degree(*chart);
                factors.push_back(std::move(f));
                totals.push_back(tot);
            }
            if (n == 0) {
                out.add(W, Poly::monomial(chart, mc, ac));
                continue;
            }
            long long natural = 0;
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    natural += static_cast<long long>(detail::par(totals[static_cast<std::size_t>(a)])) *
                               detail::par(totals[static_cast<std::size_t>(b)]);
            std::vector<DiffOp> rev(factors.rbegin(), factors.rend());
            out += (ac * sign_pow(natural)) * from_word(chart, rev);
        }
    }
    return out;
}

/// Counit: projection to the arity-0 component.
inline Poly counit(const PolyDiffOp& D) {
    for (const auto& [t, c] : D.terms())
        if (t.empty()) return c;
    return Poly::zero(D.chart());
}

/// Unit: inclusion of functions at arity 0.
inline PolyDiffOp unit(const Poly& f) { return PolyDiffOp::from_function(f); }

// ---------------------------------------------------------------------------
// Appendix closed formula for the coproduct of a composition of fields

/// Delta(X_1 o ... o X_n) as the signed bracket sum over split permutations
/// fixing 1 in the first block, both blocks increasing.
inline PolyDiffOp delta_appendix(const std::vector<VectorField>& fields) {
    if (fields.empty()) throw std::invalid_argument("delta_appendix: empty composition");
    const ChartPtr& chart = fields.front().chart();
    std::vector<Degree> deg(fields.size());
    for (std::size_t i = 0; i < fields.size(); ++i) {
        auto d = fields[i].degree();
        if (!d && !fields[i].is_zero())
            throw std::invalid_argument("delta_appendix: fields must be homogeneous");
        deg[i] = d.value_or(0);
    }
    const std::size_t n = fields.size();
    PolyDiffOp out(chart);
    // Choose the subset of {2..n} joining X_1 in the first block.
    for (std::uint64_t mask = 0; mask < (1ULL << (n - 1)); ++mask) {
        std::vector<std::size_t> first{0}, second;
        for (std::size_t k = 1; k < n; ++k)
            if (mask & (1ULL << (k - 1)))
                first.push_back(k);
            else
                second.push_back(k);
        long long tau = 0, kappa = 0;
        for (std::size_t i : second) tau += detail::par(deg[i]);
        for (std::size_t i : second)
            for (std::size_t j : first)
                if (j > i && detail::par(deg[i]) && detail::par(deg[j])) ++kappa;
        auto chain = [&](const std::vector<std::size_t>& idx) {
            DiffOp acc = DiffOp::identity(chart);
            for (std::size_t i : idx) acc = compose(acc, fields[i].to_diffop());
            return acc;
        };
        PolyDiffOp A = PolyDiffOp::from_diffop(chain(first));
        PolyDiffOp B = PolyDiffOp::from_diffop(chain(second));
        out += sign_pow(tau + kappa) * canonical_bracket(A, B);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Polyvector fields

/// An element of the symmetric algebra over the vector fields, stored on
/// Koszul-sorted words of coordinate partials with a left Poly coefficient.
class PolyVector {
public:
    PolyVector() = default;
    explicit PolyVector(ChartPtr chart) : chart_(std::move(chart)) {}

    static PolyVector from_function(const Poly& f) {
        PolyVector v(f.chart());
        v.add_word({}, f);
        return v;
    }

    const ChartPtr& chart() const { return chart_; }
    const std::map<std::vector<std::size_t>, Poly>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    /// Adds c * (d_{i_1} sym ... sym d_{i_n}), sorting the word into canonical
    /// ascending order with the Koszul sign from total degrees |d_i| = 1 - deg x_i.
    void add_word(std::vector<std::size_t> idx, const Poly& c) {
        if (c.is_zero()) return;
        long long parity = 0;
        // insertion sort, counting odd-odd transpositions
        for (std::size_t a = 1; a < idx.size(); ++a)
            for (std::size_t b = a; b > 0 && idx[b - 1] > idx[b]; --b) {
                if (is_odd(1 - chart_->degree(idx[b - 1])) && is_odd(1 - chart_->degree(idx[b])))
                    ++parity;
                std::swap(idx[b - 1], idx[b]);
            }
        // repeated factor of odd total degree squares to zero
        for (std::size_t a = 1; a < idx.size(); ++a)
            if (idx[a] == idx[a - 1] && is_odd(1 - chart_->degree(idx[a]))) return;
        Poly add = c * sign_pow(parity);
        auto it = terms_.find(idx);
        if (it == terms_.end()) {
            terms_.emplace(std::move(idx), add);
        } else {
            it->second += add;
            if (it->second.is_zero()) terms_.erase(it);
        }
    }

    PolyVector& operator+=(const PolyVector& o) {
        require_same_chart(chart_, o.chart_);
        for (const auto& [t, c] : o.terms_) add_word(t, c);
        return *this;
    }
    friend PolyVector operator+(PolyVector a, const PolyVector& b) { return a += b; }
    friend bool operator==(const PolyVector& a, const PolyVector& b) {
        return a.chart_ == b.chart_ && a.terms_ == b.terms_;
    }

private:
    ChartPtr chart_;
    std::map<std::vector<std::size_t>, Poly> terms_;
};

}  // namespace dgatlas
