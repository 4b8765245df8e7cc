#pragma once

// A Lie subalgebra pair h in g over the rationals: the enveloping algebra
// with PBW straightening, the quotient by right h-multiples with its
// Hochschild complex and Hopf structure, Chevalley-Eilenberg differentials,
// the Bott action on the quotient, and the pair's Atiyah cocycle.

#include "dgatlas/linalg.hpp"
#include "dgatlas/perm.hpp"
#include "dgatlas/rat.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace dgatlas {

// ---------------------------------------------------------------------------
// The pair

/// A Lie algebra g with a distinguished subalgebra h spanned by the leading
/// basis vectors.  Structure constants c[i][j][k] give the e_k-coefficient
/// of [e_i, e_j]; antisymmetry, the Jacobi identity, and closure of h are
/// validated on construction.
class LiePairPoint {
public:
    LiePairPoint(std::size_t dim_g, std::size_t dim_h,
                 std::vector<std::vector<std::vector<Rat>>> c)
        : dim_g_(dim_g), dim_h_(dim_h), c_(std::move(c)) {
        if (dim_h > dim_g) throw std::invalid_argument("subalgebra larger than the algebra");
        if (c_.size() != dim_g) throw std::invalid_argument("structure constants: bad shape");
        for (const auto& ci : c_) {
            if (ci.size() != dim_g) throw std::invalid_argument("structure constants: bad shape");
            for (const auto& cij : ci)
                if (cij.size() != dim_g)
                    throw std::invalid_argument("structure constants: bad shape");
        }
        for (std::size_t i = 0; i < dim_g; ++i)
            for (std::size_t j = 0; j < dim_g; ++j)
                for (std::size_t k = 0; k < dim_g; ++k)
                    if (c_[i][j][k] != -c_[j][i][k])
                        throw std::invalid_argument("structure constants are not antisymmetric");
        for (std::size_t i = 0; i < dim_g; ++i)
            for (std::size_t j = 0; j < dim_g; ++j)
                for (std::size_t k = 0; k < dim_g; ++k)
                    for (std::size_t l = 0; l < dim_g; ++l) {
                        Rat s(0);
                        for (std::size_t m = 0; m < dim_g; ++m)
                            s += c_[i][j][m] * c_[m][k][l] + c_[j][k][m] * c_[m][i][l] +
                                 c_[k][i][m] * c_[m][j][l];
                        if (s != 0) throw std::invalid_argument("Jacobi identity fails");
                    }
        for (std::size_t a = 0; a < dim_h; ++a)
            for (std::size_t b = 0; b < dim_h; ++b)
                for (std::size_t k = dim_h; k < dim_g; ++k)
                    if (c_[a][b][k] != 0)
                        throw std::invalid_argument("subalgebra is not closed under the bracket");
    }

    std::size_t dim_g() const { return dim_g_; }
    std::size_t dim_h() const { return dim_h_; }
    std::size_t dim_b() const { return dim_g_ - dim_h_; }
    const Rat& c(std::size_t i, std::size_t j, std::size_t k) const { return c_[i][j][k]; }

    /// [x, y] in g-coordinates.
    std::vector<Rat> bracket(const std::vector<Rat>& x, const std::vector<Rat>& y) const {
        std::vector<Rat> out(dim_g_, Rat(0));
        for (std::size_t i = 0; i < dim_g_; ++i)
            for (std::size_t j = 0; j < dim_g_; ++j) {
                if (x[i] == 0 || y[j] == 0) continue;
                for (std::size_t k = 0; k < dim_g_; ++k) out[k] += x[i] * y[j] * c_[i][j][k];
            }
        return out;
    }

    /// PBW position: complement generators first, h-generators last, so the
    /// quotient basis is transparent.
    std::size_t pbw_position(std::size_t i) const {
        return i < dim_h_ ? dim_b() + i : i - dim_h_;
    }

private:
    std::size_t dim_g_, dim_h_;
    std::vector<std::vector<std::vector<Rat>>> c_;
};

using LiePairPtr = std::shared_ptr<const LiePairPoint>;

inline LiePairPtr make_lie_pair(std::size_t dim_g, std::size_t dim_h,
                                std::vector<std::vector<std::vector<Rat>>> c) {
    return std::make_shared<const LiePairPoint>(dim_g, dim_h, std::move(c));
}

inline void require_same_pair(const LiePairPtr& a, const LiePairPtr& b) {
    if (a != b) throw std::invalid_argument("elements live over different pairs");
}

// ---------------------------------------------------------------------------
// The enveloping algebra

/// Which adjacent inversion the straightening loop rewrites first; both
/// strategies must agree (confluence).
enum class StraightenOrder { leftmost, rightmost };

namespace detail {

/// Straightens a product word into PBW normal-order monomials, rewriting
/// e_b e_a -> e_a e_b + [e_b, e_a] whenever b follows a in the fixed order.
inline void straighten_into(const LiePairPoint& pair, std::vector<std::size_t> word, Rat coeff,
                            std::map<std::vector<int>, Rat>& out, StraightenOrder order) {
    std::vector<std::pair<std::vector<std::size_t>, Rat>> work;
    work.emplace_back(std::move(word), std::move(coeff));
    while (!work.empty()) {
        auto [w, c] = std::move(work.back());
        work.pop_back();
        std::ptrdiff_t inv = -1;
        if (order == StraightenOrder::leftmost) {
            for (std::size_t t = 0; t + 1 < w.size(); ++t)
                if (pair.pbw_position(w[t]) > pair.pbw_position(w[t + 1])) {
                    inv = static_cast<std::ptrdiff_t>(t);
                    break;
                }
        } else {
            for (std::size_t t = w.size(); t-- > 1;)
                if (pair.pbw_position(w[t - 1]) > pair.pbw_position(w[t])) {
                    inv = static_cast<std::ptrdiff_t>(t - 1);
                    break;
                }
        }
        if (inv < 0) {
            std::vector<int> exps(pair.dim_g(), 0);
            for (std::size_t i : w) ++exps[i];
            auto it = out.find(exps);
            if (it == out.end())
                out.emplace(std::move(exps), c);
            else {
                it->second += c;
                if (it->second == 0) out.erase(it);
            }
            continue;
        }
        std::size_t t = static_cast<std::size_t>(inv);
        std::size_t b = w[t], a = w[t + 1];
        std::vector<std::size_t> swapped = w;
        std::swap(swapped[t], swapped[t + 1]);
        work.emplace_back(std::move(swapped), c);
        for (std::size_t k = 0; k < pair.dim_g(); ++k) {
            if (pair.c(b, a, k) == 0) continue;
            std::vector<std::size_t> shorter;
            shorter.reserve(w.size() - 1);
            for (std::size_t s = 0; s < w.size(); ++s) {
                if (s == t) {
                    shorter.push_back(k);
                    ++s;  // skip the merged second factor
                } else {
                    shorter.push_back(w[s]);
                }
            }
            work.emplace_back(std::move(shorter), c * pair.c(b, a, k));
        }
    }
}

}  // namespace detail

/// An element of the enveloping algebra of g in PBW normal form: exponent
/// vectors over the g-basis, factors ordered complement-first, h-last.
class UEnvElt {
public:
    explicit UEnvElt(LiePairPtr pair) : pair_(std::move(pair)) {}

    static UEnvElt one(LiePairPtr pair) {
        UEnvElt u(std::move(pair));
        u.terms_[std::vector<int>(u.pair_->dim_g(), 0)] = Rat(1);
        return u;
    }
    static UEnvElt generator(LiePairPtr pair, std::size_t i) {
        UEnvElt u(std::move(pair));
        std::vector<int> e(u.pair_->dim_g(), 0);
        e[i] = 1;
        u.terms_[std::move(e)] = Rat(1);
        return u;
    }
    static UEnvElt from_word(LiePairPtr pair, const std::vector<std::size_t>& word,
                             StraightenOrder order = StraightenOrder::leftmost) {
        UEnvElt u(pair);
        detail::straighten_into(*pair, word, Rat(1), u.terms_, order);
        return u;
    }

    const LiePairPtr& pair() const { return pair_; }
    const std::map<std::vector<int>, Rat>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

    void add_term(std::vector<int> exps, const Rat& c) {
        if (c == 0) return;
        auto it = terms_.find(exps);
        if (it == terms_.end())
            terms_.emplace(std::move(exps), c);
        else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    UEnvElt& operator+=(const UEnvElt& o) {
        require_same_pair(pair_, o.pair_);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    UEnvElt& operator-=(const UEnvElt& o) {
        require_same_pair(pair_, o.pair_);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    friend UEnvElt operator+(UEnvElt a, const UEnvElt& b) { return a += b; }
    friend UEnvElt operator-(UEnvElt a, const UEnvElt& b) { return a -= b; }
    friend UEnvElt operator*(const Rat& s, UEnvElt a) {
        if (s == 0) return UEnvElt(a.pair_);
        for (auto& [e, c] : a.terms_) c *= s;
        return a;
    }
    friend bool operator==(const UEnvElt& a, const UEnvElt& b) { return a.terms_ == b.terms_; }

    /// Expands a normal-form monomial back into its product word.
    std::vector<std::size_t> word_of(const std::vector<int>& exps) const {
        std::vector<std::pair<std::size_t, std::size_t>> order;  // (position, index)
        for (std::size_t i = 0; i < exps.size(); ++i)
            if (exps[i] > 0) order.emplace_back(pair_->pbw_position(i), i);
        std::sort(order.begin(), order.end());
        std::vector<std::size_t> w;
        for (const auto& [pos, i] : order)
            for (int r = 0; r < exps[i]; ++r) w.push_back(i);
        return w;
    }

    friend UEnvElt operator*(const UEnvElt& a, const UEnvElt& b) {
        require_same_pair(a.pair_, b.pair_);
        UEnvElt out(a.pair_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) {
                std::vector<std::size_t> w = a.word_of(ea);
                std::vector<std::size_t> wb = b.word_of(eb);
                w.insert(w.end(), wb.begin(), wb.end());
                detail::straighten_into(*a.pair_, std::move(w), ca * cb, out.terms_,
                                        StraightenOrder::leftmost);
            }
        return out;
    }

private:
    LiePairPtr pair_;
    std::map<std::vector<int>, Rat> terms_;
};

/// One term of a coproduct expansion in the enveloping algebra.
struct UPairTerm {
    UEnvElt left;
    UEnvElt right;
    Rat coeff;
};

/// The cocommutative coproduct: generators are primitive, functions (here
/// scalars) are grouplike, extended as an algebra map.  On an ordered word
/// this is the sum over subsets, with no signs (generators are even here).
inline std::vector<UPairTerm> u_coproduct(const UEnvElt& u) {
    std::map<std::pair<std::vector<int>, std::vector<int>>, Rat> acc;
    const LiePairPtr& pair = u.pair();
    for (const auto& [exps, c] : u.terms()) {
        std::vector<std::size_t> w = u.word_of(exps);
        std::size_t n = w.size();
        for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
            std::vector<int> le(pair->dim_g(), 0), re(pair->dim_g(), 0);
            for (std::size_t t = 0; t < n; ++t)
                ++(mask & (std::size_t{1} << t) ? le : re)[w[t]];
            auto key = std::make_pair(std::move(le), std::move(re));
            auto it = acc.find(key);
            if (it == acc.end())
                acc.emplace(std::move(key), c);
            else
                it->second += c;
        }
    }
    std::vector<UPairTerm> out;
    for (const auto& [key, c] : acc) {
        if (c == 0) continue;
        UEnvElt l(pair), r(pair);
        l.add_term(key.first, Rat(1));
        r.add_term(key.second, Rat(1));
        out.push_back(UPairTerm{std::move(l), std::move(r), c});
    }
    return out;
}

// ---------------------------------------------------------------------------
// The quotient complex

/// An element of the tensor complex over the quotient of the enveloping
/// algebra by right h-multiples.  A term is a tuple of complement-exponent
/// monomials (the quotient basis); the empty tuple spans the scalars.
class DpolyB {
public:
    explicit DpolyB(LiePairPtr pair) : pair_(std::move(pair)) {}

    static DpolyB scalar(LiePairPtr pair, const Rat& c) {
        DpolyB d(std::move(pair));
        d.add({}, c);
        return d;
    }
    static DpolyB one_class(LiePairPtr pair) {
        DpolyB d(pair);
        d.add({std::vector<int>(pair->dim_b(), 0)}, Rat(1));
        return d;
    }

    const LiePairPtr& pair() const { return pair_; }
    const std::map<std::vector<std::vector<int>>, Rat>& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }

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

    void add(std::vector<std::vector<int>> tuple, const Rat& c) {
        if (c == 0) return;
        auto it = terms_.find(tuple);
        if (it == terms_.end())
            terms_.emplace(std::move(tuple), c);
        else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    DpolyB& operator+=(const DpolyB& o) {
        require_same_pair(pair_, o.pair_);
        for (const auto& [t, c] : o.terms_) add(t, c);
        return *this;
    }
    DpolyB& operator-=(const DpolyB& o) {
        require_same_pair(pair_, o.pair_);
        for (const auto& [t, c] : o.terms_) add(t, -c);
        return *this;
    }
    friend DpolyB operator+(DpolyB a, const DpolyB& b) { return a += b; }
    friend DpolyB operator-(DpolyB a, const DpolyB& b) { return a -= b; }
    friend DpolyB operator*(const Rat& s, DpolyB a) {
        if (s == 0) return DpolyB(a.pair_);
        for (auto& [t, c] : a.terms_) c *= s;
        return a;
    }
    friend bool operator==(const DpolyB& a, const DpolyB& b) { return a.terms_ == b.terms_; }

private:
    LiePairPtr pair_;
    std::map<std::vector<std::vector<int>>, Rat> terms_;
};

/// PBW-normalizes, kills every monomial with a trailing h-factor, and reads
/// the survivors on the complement-monomial basis of the quotient.
inline DpolyB quotient_to_DpolyB(const UEnvElt& u) {
    const LiePairPtr& pair = u.pair();
    DpolyB out(pair);
    for (const auto& [exps, c] : u.terms()) {
        bool has_h = false;
        for (std::size_t a = 0; a < pair->dim_h(); ++a)
            if (exps[a] > 0) {
                has_h = true;
                break;
            }
        if (has_h) continue;
        std::vector<int> be(pair->dim_b(), 0);
        for (std::size_t i = pair->dim_h(); i < pair->dim_g(); ++i)
            be[i - pair->dim_h()] = exps[i];
        out.add({std::move(be)}, c);
    }
    return out;
}

/// The left action of a g-basis vector on the quotient, slotwise on tensors.
inline DpolyB left_action(std::size_t gen, const DpolyB& x) {
    const LiePairPtr& pair = x.pair();
    DpolyB out(pair);
    for (const auto& [tuple, c] : x.terms()) {
        for (std::size_t slot = 0; slot < tuple.size(); ++slot) {
            // Lift the slot to the enveloping algebra, multiply, project.
            std::vector<int> lift(pair->dim_g(), 0);
            for (std::size_t b = 0; b < pair->dim_b(); ++b)
                lift[pair->dim_h() + b] = tuple[slot][b];
            UEnvElt rep(pair);
            rep.add_term(std::move(lift), Rat(1));
            DpolyB acted = quotient_to_DpolyB(UEnvElt::generator(pair, gen) * rep);
            for (const auto& [at, ac] : acted.terms()) {
                std::vector<std::vector<int>> t = tuple;
                t[slot] = at[0];
                out.add(std::move(t), c * ac);
            }
        }
    }
    return out;
}

/// The induced coproduct of one quotient-basis monomial, as a list of
/// (left factor, right factor) of quotient-basis monomials with
/// multiplicities.  Subwords of an ordered complement word are ordered, so
/// no straightening is needed.
inline std::vector<std::tuple<std::vector<int>, std::vector<int>, Rat>> d1_coproduct(
    const LiePairPoint& pair, const std::vector<int>& mono) {
    std::map<std::pair<std::vector<int>, std::vector<int>>, Rat> acc;
    std::vector<std::size_t> w;
    for (std::size_t b = 0; b < pair.dim_b(); ++b)
        for (int r = 0; r < mono[b]; ++r) w.push_back(b);
    std::size_t n = w.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        std::vector<int> le(pair.dim_b(), 0), re(pair.dim_b(), 0);
        for (std::size_t t = 0; t < n; ++t) ++(mask & (std::size_t{1} << t) ? le : re)[w[t]];
        acc[{std::move(le), std::move(re)}] += Rat(1);
    }
    std::vector<std::tuple<std::vector<int>, std::vector<int>, Rat>> out;
    for (const auto& [key, c] : acc) out.emplace_back(key.first, key.second, c);
    return out;
}

/// The Hochschild differential on the quotient complex, with its leading
/// minus sign:
///   d_H(p_1 (x) ... (x) p_n) = -(1 (x) p_1 ... - Delta(p_1) (x) ... + ...
///     + (-1)^n p_1 (x) ... (x) Delta(p_n) + (-1)^{n+1} p_1 (x) ... (x) 1).
inline DpolyB hochschild_d_B(const DpolyB& x) {
    const LiePairPtr& pair = x.pair();
    DpolyB out(pair);
    std::vector<int> unit(pair->dim_b(), 0);
    for (const auto& [tuple, c] : x.terms()) {
        std::size_t n = tuple.size();
        if (n == 0) continue;
        std::vector<std::vector<int>> front;
        front.push_back(unit);
        front.insert(front.end(), tuple.begin(), tuple.end());
        out.add(std::move(front), -c);
        for (std::size_t i = 0; i < n; ++i) {
            Rat s = -sign_pow(static_cast<long long>(i) + 1) * c;
            for (const auto& [le, re, m] : d1_coproduct(*pair, tuple[i])) {
                std::vector<std::vector<int>> t;
                t.insert(t.end(), tuple.begin(), tuple.begin() + static_cast<std::ptrdiff_t>(i));
                t.push_back(le);
                t.push_back(re);
                t.insert(t.end(), tuple.begin() + static_cast<std::ptrdiff_t>(i) + 1,
                         tuple.end());
                out.add(std::move(t), s * m);
            }
        }
        std::vector<std::vector<int>> back(tuple.begin(), tuple.end());
        back.push_back(unit);
        out.add(std::move(back), -sign_pow(static_cast<long long>(n) + 1) * c);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hopf structure on the quotient complex

/// Tensor concatenation (the product of the Hopf structure).
inline DpolyB cup_B(const DpolyB& a, const DpolyB& b) {
    require_same_pair(a.pair(), b.pair());
    DpolyB out(a.pair());
    for (const auto& [ta, ca] : a.terms())
        for (const auto& [tb, cb] : b.terms()) {
            std::vector<std::vector<int>> t = ta;
            t.insert(t.end(), tb.begin(), tb.end());
            out.add(std::move(t), ca * cb);
        }
    return out;
}

/// Word reversal with the sign (-1)^{n(n-1)/2}.
inline DpolyB t_map_B(const DpolyB& x) {
    DpolyB out(x.pair());
    for (const auto& [tuple, c] : x.terms()) {
        std::vector<std::vector<int>> rev(tuple.rbegin(), tuple.rend());
        long long n = static_cast<long long>(tuple.size());
        out.add(std::move(rev), sign_pow(n * (n - 1) / 2) * c);
    }
    return out;
}

struct BPairTerm {
    DpolyB left;
    DpolyB right;
    Rat coeff;
};

/// Shuffle coproduct; the generators sit in degree +1, so the Koszul sign
/// is the signature of the shuffle.
inline std::vector<BPairTerm> shuffle_coproduct_B(const DpolyB& x) {
    const LiePairPtr& pair = x.pair();
    std::vector<BPairTerm> out;
    for (const auto& [tuple, c] : x.terms()) {
        int n = static_cast<int>(tuple.size());
        std::vector<Degree> totals(static_cast<std::size_t>(n), 1);
        for (int p = 0; p <= n; ++p)
            for (const auto& sh : shuffles(p, n - p)) {
                Rat kappa = koszul_sign(sh, totals);
                DpolyB l(pair), r(pair);
                std::vector<std::vector<int>> lt, rt;
                for (int k = 1; k <= p; ++k)
                    lt.push_back(tuple[static_cast<std::size_t>(sh(k) - 1)]);
                for (int k = p + 1; k <= n; ++k)
                    rt.push_back(tuple[static_cast<std::size_t>(sh(k) - 1)]);
                l.add(std::move(lt), Rat(1));
                r.add(std::move(rt), Rat(1));
                out.push_back(BPairTerm{std::move(l), std::move(r), c * kappa});
            }
    }
    return out;
}

inline Rat counit_B(const DpolyB& x) {
    for (const auto& [tuple, c] : x.terms())
        if (tuple.empty()) return c;
    return Rat(0);
}

/// Canonical form of a pair expansion keyed by the two tuples.
inline std::map<std::pair<std::vector<std::vector<int>>, std::vector<std::vector<int>>>, Rat>
b_pair_normal_form(const std::vector<BPairTerm>& e) {
    std::map<std::pair<std::vector<std::vector<int>>, std::vector<std::vector<int>>>, Rat> out;
    for (const auto& term : e)
        for (const auto& [tl, cl] : term.left.terms())
            for (const auto& [tr, cr] : term.right.terms()) {
                auto key = std::make_pair(tl, tr);
                out[key] += term.coeff * cl * cr;
                if (out[key] == 0) out.erase(key);
            }
    return out;
}

// ---------------------------------------------------------------------------
// Free Lie layer on the quotient

/// Exact membership of x in the free Lie algebra generated by the quotient
/// basis monomials, decided by Gaussian elimination over the span of
/// left-normed bracket words [[u, v]] = u (x) v + v (x) u (degree +1
/// generators).
inline bool is_in_free_lie_B(const DpolyB& x, int max_len) {
    if (x.is_zero()) return true;
    const LiePairPtr& pair = x.pair();
    auto arity = x.arity();
    if (!arity) {
        // Split by arity and test each part.
        std::map<std::size_t, DpolyB> parts;
        for (const auto& [t, c] : x.terms()) {
            auto it = parts.find(t.size());
            if (it == parts.end()) it = parts.emplace(t.size(), DpolyB(pair)).first;
            it->second.add(t, c);
        }
        for (const auto& [n, p] : parts)
            if (!is_in_free_lie_B(p, max_len)) return false;
        return true;
    }
    if (*arity == 0 || *arity > max_len) return false;

    // Generators: every quotient monomial dividing a slot of x.
    std::set<std::vector<int>> gens;
    for (const auto& [tuple, c] : x.terms())
        for (const auto& slot : tuple) {
            std::vector<int> d(pair->dim_b(), 0);
            std::function<void(std::size_t)> go = [&](std::size_t b) {
                if (b == pair->dim_b()) {
                    gens.insert(d);
                    return;
                }
                for (d[b] = 0; d[b] <= slot[b]; ++d[b]) go(b + 1);
                d[b] = 0;
            };
            go(0);
        }
    std::vector<DpolyB> layer;
    for (const auto& g : gens) {
        DpolyB d(pair);
        d.add({g}, Rat(1));
        layer.push_back(std::move(d));
    }
    std::vector<DpolyB> gens_d1 = layer;

    // Index the coordinates of arity-n tuples seen anywhere.
    std::map<std::vector<std::vector<int>>, std::size_t> keys;
    auto flatten = [&](const DpolyB& d, bool grow) -> std::optional<std::vector<Rat>> {
        for (const auto& [t, c] : d.terms())
            if (static_cast<int>(t.size()) == *arity && !keys.count(t)) {
                if (!grow) return std::nullopt;
                std::size_t idx = keys.size();
                keys.emplace(t, idx);
            }
        std::vector<Rat> v(keys.size(), Rat(0));
        for (const auto& [t, c] : d.terms())
            if (static_cast<int>(t.size()) == *arity) v[keys.at(t)] = c;
        return v;
    };

    std::vector<DpolyB> span_elts;
    for (int len = 2; len <= *arity; ++len) {
        std::vector<DpolyB> next;
        for (const auto& g : gens_d1)
            for (const auto& w : layer) {
                // [[g, w]] with |g| = 1, |w| = len - 1.
                DpolyB br = cup_B(g, w) - sign_pow(static_cast<long long>(len) - 1) *
                                              cup_B(w, g);
                if (!br.is_zero()) next.push_back(br);
            }
        layer = std::move(next);
    }
    if (*arity == 1) layer = gens_d1;
    for (const auto& e : layer) flatten(e, true);
    std::optional<std::vector<Rat>> target = flatten(x, true);
    RatSpan span(keys.size());
    for (const auto& e : layer) span.insert(*flatten(e, true));
    return span.contains(*target);
}

// ---------------------------------------------------------------------------
// Chevalley-Eilenberg complex

using BVec = std::vector<Rat>;
using BMat = std::vector<std::vector<Rat>>;  // mat[row][col]

inline BVec mat_apply(const BMat& m, const BVec& v) {
    BVec out(m.size(), Rat(0));
    for (std::size_t r = 0; r < m.size(); ++r)
        for (std::size_t c = 0; c < v.size(); ++c) out[r] += m[r][c] * v[c];
    return out;
}

/// A Chevalley-Eilenberg cochain of the subalgebra h with coefficients in a
/// finite-dimensional module: alternating components on sorted index
/// tuples.
struct CECochain {
    std::size_t dim_h = 0;
    std::size_t val_dim = 0;
    int degree = 0;
    std::map<std::vector<std::size_t>, BVec> comps;  // key: strictly increasing tuple

    bool is_zero() const {
        for (const auto& [k, v] : comps)
            for (const Rat& r : v)
                if (r != 0) return false;
        return true;
    }
    friend bool operator==(const CECochain& a, const CECochain& b) {
        CECochain d = a;
        for (const auto& [k, v] : b.comps) {
            BVec& t = d.comps[k];
            t.resize(std::max(t.size(), v.size()), Rat(0));
            for (std::size_t i = 0; i < v.size(); ++i) t[i] -= v[i];
        }
        return d.is_zero();
    }
};

/// The module action: index of an h-basis vector and a value vector.
using CEAction = std::function<BVec(std::size_t, const BVec&)>;

/// The Lie-algebra Chevalley-Eilenberg differential
///   (d phi)(a_0..a_k) = sum_i (-1)^i a_i . phi(..^a_i..)
///     + sum_{i<j} (-1)^{i+j} phi([a_i,a_j], ..^a_i..^a_j..).
/// Throws unless the action is a representation of h.
inline CECochain ce_differential(const CECochain& phi, const LiePairPoint& pair,
                                 const CEAction& action) {
    std::size_t nh = pair.dim_h();
    // Representation check on basis vectors of the module.
    for (std::size_t a = 0; a < nh; ++a)
        for (std::size_t b = 0; b < nh; ++b)
            for (std::size_t v = 0; v < phi.val_dim; ++v) {
                BVec e(phi.val_dim, Rat(0));
                e[v] = Rat(1);
                BVec lhs = action(a, action(b, e));
                BVec rb = action(b, action(a, e));
                for (std::size_t r = 0; r < phi.val_dim; ++r) lhs[r] -= rb[r];
                BVec br(phi.val_dim, Rat(0));
                for (std::size_t k = 0; k < nh; ++k) {
                    if (pair.c(a, b, k) == 0) continue;
                    BVec ak = action(k, e);
                    for (std::size_t r = 0; r < phi.val_dim; ++r)
                        br[r] += pair.c(a, b, k) * ak[r];
                }
                if (lhs != br)
                    throw std::invalid_argument("action is not a representation of h");
            }

    auto lookup = [&](std::vector<std::size_t> idx) -> BVec {
        // Sort with the signature of the permutation; repeated indices kill
        // the alternating component.
        Rat sgn(1);
        for (std::size_t i = 1; i < idx.size(); ++i)
            for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
                if (idx[j - 1] == idx[j]) return BVec(phi.val_dim, Rat(0));
                std::swap(idx[j - 1], idx[j]);
                sgn = -sgn;
            }
        auto it = phi.comps.find(idx);
        if (it == phi.comps.end()) return BVec(phi.val_dim, Rat(0));
        BVec v = it->second;
        for (Rat& r : v) r *= sgn;
        return v;
    };

    CECochain out;
    out.dim_h = nh;
    out.val_dim = phi.val_dim;
    out.degree = phi.degree + 1;
    std::vector<std::size_t> tuple(static_cast<std::size_t>(phi.degree) + 1);
    std::function<void(std::size_t, std::size_t)> go = [&](std::size_t slot, std::size_t from) {
        if (slot == tuple.size()) {
            BVec acc(phi.val_dim, Rat(0));
            for (std::size_t i = 0; i < tuple.size(); ++i) {
                std::vector<std::size_t> rest;
                for (std::size_t l = 0; l < tuple.size(); ++l)
                    if (l != i) rest.push_back(tuple[l]);
                BVec av = action(tuple[i], lookup(rest));
                Rat s = sign_pow(static_cast<long long>(i));
                for (std::size_t r = 0; r < phi.val_dim; ++r) acc[r] += s * av[r];
            }
            for (std::size_t i = 0; i < tuple.size(); ++i)
                for (std::size_t j = i + 1; j < tuple.size(); ++j) {
                    Rat s = sign_pow(static_cast<long long>(i + j));
                    for (std::size_t k = 0; k < nh; ++k) {
                        if (pair.c(tuple[i], tuple[j], k) == 0) continue;
                        std::vector<std::size_t> rest{k};
                        for (std::size_t l = 0; l < tuple.size(); ++l)
                            if (l != i && l != j) rest.push_back(tuple[l]);
                        BVec v = lookup(rest);
                        for (std::size_t r = 0; r < phi.val_dim; ++r)
                            acc[r] += s * pair.c(tuple[i], tuple[j], k) * v[r];
                    }
                }
            out.comps[tuple] = std::move(acc);
            return;
        }
        for (std::size_t a = from; a < nh; ++a) {
            tuple[slot] = a;
            go(slot + 1, a + 1);
        }
    };
    if (!tuple.empty()) go(0, 0);
    return out;
}

// ---------------------------------------------------------------------------
// Splittings, the Bott action, and the pair's Atiyah cocycle

/// A splitting of the quotient: j(b_beta) = e_{dim_h + beta} + sum_a
/// S[a][beta] e_a with the correction S valued in h.
struct Splitting {
    BMat h_correction;  // dim_h x dim_b

    static Splitting standard(const LiePairPoint& pair) {
        return Splitting{BMat(pair.dim_h(), BVec(pair.dim_b(), Rat(0)))};
    }
    std::vector<Rat> lift(const LiePairPoint& pair, const BVec& b) const {
        std::vector<Rat> out(pair.dim_g(), Rat(0));
        for (std::size_t beta = 0; beta < pair.dim_b(); ++beta) {
            out[pair.dim_h() + beta] += b[beta];
            for (std::size_t a = 0; a < pair.dim_h(); ++a)
                out[a] += h_correction[a][beta] * b[beta];
        }
        return out;
    }
};

inline BVec pr_B(const LiePairPoint& pair, const std::vector<Rat>& g) {
    return BVec(g.begin() + static_cast<std::ptrdiff_t>(pair.dim_h()), g.end());
}

/// The Bott action of a in h on the quotient: project the bracket with any
/// lift (independence of the lift is an h-closure consequence).
inline BVec bott_connection(const LiePairPoint& pair, const BVec& a_h, const BVec& b,
                            const Splitting& j) {
    std::vector<Rat> a(pair.dim_g(), Rat(0));
    for (std::size_t i = 0; i < pair.dim_h(); ++i) a[i] = a_h[i];
    return pr_B(pair, pair.bracket(a, j.lift(pair, b)));
}

/// A full connection on the quotient: one endomorphism per g-basis vector;
/// the h-directions must restrict to the Bott action (checked).
struct LPConnection {
    std::vector<BMat> full;  // dim_g matrices, dim_b x dim_b
};

inline BMat bott_matrix(const LiePairPoint& pair, std::size_t a_idx) {
    BMat m(pair.dim_b(), BVec(pair.dim_b(), Rat(0)));
    BVec a(pair.dim_h(), Rat(0));
    a[a_idx] = Rat(1);
    Splitting j = Splitting::standard(pair);
    for (std::size_t beta = 0; beta < pair.dim_b(); ++beta) {
        BVec b(pair.dim_b(), Rat(0));
        b[beta] = Rat(1);
        BVec col = bott_connection(pair, a, b, j);
        for (std::size_t r = 0; r < pair.dim_b(); ++r) m[r][beta] = col[r];
    }
    return m;
}

/// The Atiyah cocycle of the pair for a Bott-extending connection and a
/// splitting:
///   alpha(a, b) e = Bott_a (nabla_{j(b)} e) - nabla_{j(b)} (Bott_a e)
///     - nabla_{[i(a), j(b)]} e,
/// returned as a CE 1-cochain valued in maps (b, e) -> quotient, flattened
/// as (beta, gamma, delta) -> coefficient of the delta basis vector.
inline CECochain lie_pair_atiyah_cocycle(const LiePairPoint& pair, const LPConnection& conn,
                                         const Splitting& j) {
    std::size_t nb = pair.dim_b();
    if (conn.full.size() != pair.dim_g())
        throw std::invalid_argument("connection: one endomorphism per basis vector required");
    for (std::size_t a = 0; a < pair.dim_h(); ++a)
        if (conn.full[a] != bott_matrix(pair, a))
            throw std::invalid_argument("connection does not extend the Bott action");

    auto nabla_along = [&](const std::vector<Rat>& l) {
        BMat m(nb, BVec(nb, Rat(0)));
        for (std::size_t k = 0; k < pair.dim_g(); ++k) {
            if (l[k] == 0) continue;
            for (std::size_t r = 0; r < nb; ++r)
                for (std::size_t c = 0; c < nb; ++c) m[r][c] += l[k] * conn.full[k][r][c];
        }
        return m;
    };

    CECochain out;
    out.dim_h = pair.dim_h();
    out.val_dim = nb * nb * nb;
    out.degree = 1;
    for (std::size_t a = 0; a < pair.dim_h(); ++a) {
        BVec av(pair.dim_h(), Rat(0));
        av[a] = Rat(1);
        BVec flat(out.val_dim, Rat(0));
        for (std::size_t beta = 0; beta < nb; ++beta) {
            BVec b(nb, Rat(0));
            b[beta] = Rat(1);
            std::vector<Rat> jb = j.lift(pair, b);
            BMat njb = nabla_along(jb);
            std::vector<Rat> ia(pair.dim_g(), Rat(0));
            ia[a] = Rat(1);
            BMat nbr = nabla_along(pair.bracket(ia, jb));
            BMat bott = bott_matrix(pair, a);
            for (std::size_t gamma = 0; gamma < nb; ++gamma) {
                BVec e(nb, Rat(0));
                e[gamma] = Rat(1);
                BVec val = mat_apply(bott, mat_apply(njb, e));
                BVec t2 = mat_apply(njb, mat_apply(bott, e));
                BVec t3 = mat_apply(nbr, e);
                for (std::size_t delta = 0; delta < nb; ++delta)
                    flat[(beta * nb + gamma) * nb + delta] =
                        val[delta] - t2[delta] - t3[delta];
            }
        }
        out.comps[{a}] = std::move(flat);
    }
    return out;
}

/// The h-action on the cocycle's value space (b, e) -> quotient, induced by
/// the Bott action on each tensor leg.
inline CEAction atiyah_value_action(const LiePairPoint& pair) {
    std::size_t nb = pair.dim_b();
    return [&pair, nb](std::size_t a, const BVec& v) {
        BMat bott = bott_matrix(pair, a);
        BVec out(v.size(), Rat(0));
        for (std::size_t beta = 0; beta < nb; ++beta)
            for (std::size_t gamma = 0; gamma < nb; ++gamma)
                for (std::size_t delta = 0; delta < nb; ++delta) {
                    Rat c = v[(beta * nb + gamma) * nb + delta];
                    if (c == 0) continue;
                    std::size_t base = (beta * nb + gamma) * nb;
                    // Output leg: + Bott on delta.
                    for (std::size_t d2 = 0; d2 < nb; ++d2)
                        out[(beta * nb + gamma) * nb + d2] += bott[d2][delta] * c;
                    (void)base;
                    // Input legs: - precomposition with Bott.
                    for (std::size_t b2 = 0; b2 < nb; ++b2)
                        out[(b2 * nb + gamma) * nb + delta] -= bott[beta][b2] * c;
                    for (std::size_t g2 = 0; g2 < nb; ++g2)
                        out[(beta * nb + g2) * nb + delta] -= bott[gamma][g2] * c;
                }
        return out;
    };
}

}  // namespace dgatlas
