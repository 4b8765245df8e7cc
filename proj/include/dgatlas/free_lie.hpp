#pragma once

// The free Lie algebra generated by arity-1 operators inside the tensor
// algebra of polydifferential operators, with the symmetrization (PBW) map,
// the vector-field symmetrization map, a linear-algebra membership oracle,
// and the lowering series used by the commuting-square identity.

#include "dgatlas/linalg.hpp"
#include "dgatlas/perm.hpp"
#include "dgatlas/polydiff.hpp"
#include "dgatlas/series.hpp"

#include <algorithm>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace dgatlas {

// ---------------------------------------------------------------------------
// Free Lie elements

/// An element of the free Lie algebra on arity-1 operators: its expanded
/// tensor-word value together with the bracket-expression tree that produced
/// it.  Generators must be homogeneous so that Koszul bookkeeping stays exact.
class FreeLieElt {
public:
    struct Cert {
        std::optional<DiffOp> leaf;  // generator; otherwise a bracket node
        std::shared_ptr<const Cert> left, right;
    };

    static FreeLieElt generator(const DiffOp& D) {
        auto deg = D.degree();
        if (!deg) throw std::invalid_argument("free-Lie generator must be homogeneous");
        auto cert = std::make_shared<Cert>();
        cert->leaf = D;
        return FreeLieElt(PolyDiffOp::from_diffop(D), 1 + *deg, std::move(cert));
    }

    const PolyDiffOp& value() const { return value_; }
    Degree total_degree() const { return degree_; }
    const ChartPtr& chart() const { return value_.chart(); }
    const std::shared_ptr<const Cert>& certificate() const { return cert_; }

    /// Re-expands the certificate tree; equality with value() is the class
    /// invariant and is asserted in tests.
    PolyDiffOp certificate_value() const { return expand(*cert_); }

    /// Deterministic structural key used for the canonical word order.
    std::string structure_key() const {
        std::string s;
        render(*cert_, s);
        return s;
    }

    friend FreeLieElt lie_bracket_free(const FreeLieElt& a, const FreeLieElt& b) {
        require_same_chart(a.chart(), b.chart());
        auto cert = std::make_shared<Cert>();
        cert->left = a.cert_;
        cert->right = b.cert_;
        return FreeLieElt(canonical_bracket(a.value_, b.value_), a.degree_ + b.degree_,
                          std::move(cert));
    }

    friend bool operator==(const FreeLieElt& a, const FreeLieElt& b) {
        return a.value_ == b.value_;
    }

private:
    FreeLieElt(PolyDiffOp value, Degree degree, std::shared_ptr<const Cert> cert)
        : value_(std::move(value)), degree_(degree), cert_(std::move(cert)) {}

    static PolyDiffOp expand(const Cert& c) {
        if (c.leaf) return PolyDiffOp::from_diffop(*c.leaf);
        return canonical_bracket(expand(*c.left), expand(*c.right));
    }

    static void render(const Cert& c, std::string& out) {
        if (c.leaf) {
            out += c.leaf->str();
            return;
        }
        out += "[";
        render(*c.left, out);
        out += ",";
        render(*c.right, out);
        out += "]";
    }

    PolyDiffOp value_;
    Degree degree_;
    std::shared_ptr<const Cert> cert_;
};

// ---------------------------------------------------------------------------
// Symmetric words

/// A symmetric word of FreeLieElt factors kept in a canonical order (sorted
/// by total degree, then structural key), with the Koszul sign of the sort
/// reported at construction time.
class SymWord {
public:
    explicit SymWord(ChartPtr chart) : chart_(std::move(chart)) {}

    /// Canonicalizes the given factor list.  Returns the sorted word and the
    /// Koszul sign kappa relating it to the input order; kappa is 0 when the
    /// word vanishes because an odd-total-degree factor repeats.
    static std::pair<SymWord, Rat> make(ChartPtr chart, std::vector<FreeLieElt> factors) {
        SymWord w(std::move(chart));
        long long parity = 0;
        // Insertion sort, counting transpositions of odd pairs.
        for (std::size_t i = 1; i < factors.size(); ++i) {
            for (std::size_t j = i; j > 0 && less(factors[j], factors[j - 1]); --j) {
                parity += (factors[j].total_degree() % 2) * (factors[j - 1].total_degree() % 2);
                std::swap(factors[j], factors[j - 1]);
            }
        }
        for (std::size_t i = 0; i + 1 < factors.size(); ++i)
            if (factors[i].total_degree() % 2 != 0 && factors[i] == factors[i + 1])
                return {w, Rat(0)};
        w.factors_ = std::move(factors);
        return {std::move(w), sign_pow(parity)};
    }

    const ChartPtr& chart() const { return chart_; }
    const std::vector<FreeLieElt>& factors() const { return factors_; }
    std::size_t length() const { return factors_.size(); }

    std::vector<Degree> factor_degrees() const {
        std::vector<Degree> d;
        for (const auto& f : factors_) d.push_back(f.total_degree());
        return d;
    }

    /// The word with factor i removed; the canonical order is preserved.
    SymWord without(std::size_t i) const {
        SymWord w(chart_);
        for (std::size_t k = 0; k < factors_.size(); ++k)
            if (k != i) w.factors_.push_back(factors_[k]);
        return w;
    }

private:
    static bool less(const FreeLieElt& a, const FreeLieElt& b) {
        if (a.total_degree() != b.total_degree()) return a.total_degree() < b.total_degree();
        return a.structure_key() < b.structure_key();
    }

    ChartPtr chart_;
    std::vector<FreeLieElt> factors_;
};

// ---------------------------------------------------------------------------
// Symmetrization maps

/// pbw(D_1 sym ... sym D_n) = (1/n!) sum_sigma kappa(sigma) D_sigma(1) (x) ...
/// The empty word maps to the algebra unit.
inline PolyDiffOp pbw(const SymWord& w) {
    const ChartPtr& chart = w.chart();
    std::size_t n = w.length();
    if (n == 0) return PolyDiffOp::from_function(Poly::constant(chart, 1));
    std::vector<Degree> degs = w.factor_degrees();
    std::vector<int> images(n);
    std::iota(images.begin(), images.end(), 1);
    PolyDiffOp out(chart);
    Rat fact(1);
    for (std::size_t k = 2; k <= n; ++k) fact *= Rat(static_cast<long long>(k));
    std::sort(images.begin(), images.end());
    do {
        Permutation sigma{images};
        PolyDiffOp word = w.factors()[static_cast<std::size_t>(images[0] - 1)].value();
        for (std::size_t k = 1; k < n; ++k)
            word = cup(word, w.factors()[static_cast<std::size_t>(images[k] - 1)].value());
        out += (koszul_sign(sigma, degs) / fact) * word;
    } while (std::next_permutation(images.begin(), images.end()));
    return out;
}

/// The inclusion of a vector field as a length-1 generator word.
inline FreeLieElt theta(const VectorField& X) { return FreeLieElt::generator(X.to_diffop()); }

/// Symmetrization of polyvector words into tensor words of coordinate vector
/// fields, extended left-linearly over coefficients.
inline PolyDiffOp hkr(const PolyVector& v) {
    const ChartPtr& chart = v.chart();
    PolyDiffOp out(chart);
    for (const auto& [idx, coeff] : v.terms()) {
        std::vector<FreeLieElt> factors;
        for (std::size_t i : idx)
            factors.push_back(FreeLieElt::generator(DiffOp::partial_op(chart, i)));
        auto [word, kappa] = SymWord::make(chart, std::move(factors));
        if (kappa == 0) continue;
        out += kappa * cup(PolyDiffOp::from_function(coeff), pbw(word));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Membership oracle

namespace detail {

/// Extracts the finite generator set used by the membership solver: monomial
/// divisors of the coefficients of D crossed with the derivative words that
/// occur in its slots, plus the identity.
inline std::vector<DiffOp> membership_generators(const PolyDiffOp& D) {
    const ChartPtr& chart = D.chart();
    std::set<std::vector<int>> monos, words;
    monos.insert(std::vector<int>(chart->size(), 0));
    words.insert(std::vector<int>(chart->size(), 0));
    for (const auto& [tup, c] : D.terms()) {
        for (const auto& w : tup) words.insert(w.exponents);
        for (const auto& [m, a] : c.terms()) {
            // All divisors of m, by product over per-coordinate exponents.
            std::vector<std::vector<int>> divs{std::vector<int>(chart->size(), 0)};
            for (std::size_t i = 0; i < m.exponents.size(); ++i) {
                std::vector<std::vector<int>> next;
                for (const auto& d : divs)
                    for (int e = 0; e <= m.exponents[i]; ++e) {
                        auto d2 = d;
                        d2[i] = e;
                        next.push_back(std::move(d2));
                    }
                divs = std::move(next);
            }
            for (auto& d : divs) monos.insert(std::move(d));
        }
    }
    std::vector<DiffOp> gens;
    for (const auto& m : monos)
        for (const auto& w : words) {
            DiffOp g(chart);
            g.add_term(Monomial{m}, DerMonomial{w}, Rat(1));
            if (g.degree()) gens.push_back(std::move(g));
        }
    return gens;
}

/// Flattens a PolyDiffOp into a coordinate vector over the given basis keys.
inline std::vector<Rat> flatten(const PolyDiffOp& D,
                                const std::map<std::pair<DerTuple, Monomial>, std::size_t>& keys) {
    std::vector<Rat> v(keys.size());
    for (const auto& [tup, c] : D.terms())
        for (const auto& [m, a] : c.terms()) v[keys.at({tup, m})] = a;
    return v;
}

}  // namespace detail

/// Decides whether D lies in the rational span of bracket words of length at
/// most max_len built from the generators extracted from D's normal form.
/// Left-normed bracket words span the free Lie algebra, so enumerating those
/// suffices at each length.
inline bool is_in_free_lie(const PolyDiffOp& D, int max_len) {
    if (D.is_zero()) return true;
    const ChartPtr& chart = D.chart();
    for (const auto& [tup, c] : D.terms())
        if (tup.empty() || static_cast<int>(tup.size()) > max_len) return false;

    std::vector<DiffOp> gens = detail::membership_generators(D);
    std::vector<PolyDiffOp> gen_ops;
    for (const auto& g : gens) gen_ops.push_back(PolyDiffOp::from_diffop(g));

    // Left-normed bracket words by length: length n+1 words are
    // <<g, w>> for each generator g and each length-n word w.
    std::vector<PolyDiffOp> span_ops = gen_ops, layer = gen_ops;
    for (int len = 2; len <= max_len; ++len) {
        std::vector<PolyDiffOp> next;
        for (const auto& g : gen_ops)
            for (const auto& w : layer) {
                PolyDiffOp b = canonical_bracket(g, w);
                if (!b.is_zero()) next.push_back(std::move(b));
            }
        span_ops.insert(span_ops.end(), next.begin(), next.end());
        layer = std::move(next);
    }

    std::map<std::pair<DerTuple, Monomial>, std::size_t> keys;
    auto index = [&](const PolyDiffOp& X) {
        for (const auto& [tup, c] : X.terms())
            for (const auto& [m, a] : c.terms()) keys.emplace(std::make_pair(tup, m), 0);
    };
    index(D);
    for (const auto& X : span_ops) index(X);
    std::size_t next_id = 0;
    for (auto& [k, id] : keys) id = next_id++;

    RatSpan span(keys.size());
    for (const auto& X : span_ops) span.insert(detail::flatten(X, keys));
    return span.contains(detail::flatten(D, keys));
}

// ---------------------------------------------------------------------------
// The lowering series

struct OmegaTerm {
    SymWord word;
    FreeLieElt elt;
    Rat coeff;
};
using OmegaExpansion = std::vector<OmegaTerm>;

/// One application of the lowering map:
///   omega((G_1 sym ... sym G_n) (x) G)
///     = sum_i (-1)^{(|G_{i+1}|+...+|G_n|)|G_i|}
///       (G_1 sym ... ^G_i ... sym G_n) (x) <<G_i, G>>.
inline OmegaExpansion omega(const SymWord& s, const FreeLieElt& g) {
    OmegaExpansion out;
    std::vector<Degree> degs = s.factor_degrees();
    for (std::size_t i = 0; i < s.length(); ++i) {
        long long tail = 0;
        for (std::size_t j = i + 1; j < s.length(); ++j) tail += degs[j];
        out.push_back(OmegaTerm{s.without(i), lie_bracket_free(s.factors()[i], g),
                                sign_pow(tail * degs[i])});
    }
    return out;
}

inline OmegaExpansion omega_step(const OmegaExpansion& terms) {
    OmegaExpansion out;
    for (const auto& t : terms)
        for (auto& u : omega(t.word, t.elt)) {
            u.coeff *= t.coeff;
            out.push_back(std::move(u));
        }
    return out;
}

namespace detail {

/// pbw of the symmetric product mu(word (x) elt) = word sym elt.
inline PolyDiffOp pbw_mu(const SymWord& word, const FreeLieElt& elt) {
    std::vector<FreeLieElt> factors = word.factors();
    factors.push_back(elt);
    auto [w, kappa] = SymWord::make(word.chart(), std::move(factors));
    if (kappa == 0) return PolyDiffOp::zero(word.chart());
    return kappa * pbw(w);
}

}  // namespace detail

/// Left side of the commuting square: pbw applied to the finite series
/// sum_k beta_k mu(omega^k(s (x) g)), with beta_k the coefficients of
/// x/(1-e^{-x}); nilpotence of omega truncates the series exactly.
inline PolyDiffOp r1_lhs(const SymWord& s, const FreeLieElt& g) {
    const ChartPtr& chart = s.chart();
    auto beta = todd_like_coeffs(static_cast<int>(s.length()));
    PolyDiffOp out(chart);
    OmegaExpansion cur = {OmegaTerm{s, g, Rat(1)}};
    for (std::size_t k = 0; k <= s.length(); ++k) {
        for (const auto& t : cur) out += (beta[k] * t.coeff) * detail::pbw_mu(t.word, t.elt);
        if (k < s.length()) cur = omega_step(cur);
    }
    return out;
}

/// Right side of the commuting square: pbw(s) cup g.
inline PolyDiffOp r1_rhs(const SymWord& s, const FreeLieElt& g) {
    return cup(pbw(s), g.value());
}

}  // namespace dgatlas
