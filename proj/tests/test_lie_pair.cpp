#include <catch2/catch_amalgamated.hpp>

#include "dgatlas/lie_pair.hpp"
#include "dgatlas/rng.hpp"

#include <map>
#include <vector>

using namespace dgatlas;

namespace {

std::vector<std::vector<std::vector<Rat>>> zero_c(std::size_t n) {
    return std::vector<std::vector<std::vector<Rat>>>(
        n, std::vector<std::vector<Rat>>(n, std::vector<Rat>(n, Rat(0))));
}

/// Sets [e_i, e_j] += v e_k together with the antisymmetric counterpart.
void set_c(std::vector<std::vector<std::vector<Rat>>>& c, std::size_t i, std::size_t j,
           std::size_t k, const Rat& v) {
    c[i][j][k] += v;
    c[j][i][k] -= v;
}

/// Two-dimensional nonabelian algebra, [e0, e1] = e1, with h spanned by e0.
LiePairPtr std2_pair() {
    auto c = zero_c(2);
    set_c(c, 0, 1, 1, Rat(1));
    return make_lie_pair(2, 1, c);
}

/// Three-dimensional solvable algebra, [e0, e1] = e1, [e0, e2] = mu e2,
/// with the nonabelian h spanned by e0, e1.
LiePairPtr solv3_pair(const Rat& mu) {
    auto c = zero_c(3);
    set_c(c, 0, 1, 1, Rat(1));
    set_c(c, 0, 2, 2, mu);
    return make_lie_pair(3, 2, c);
}

UEnvElt random_u(Lcg& rng, const LiePairPtr& pair, int max_len) {
    UEnvElt u(pair);
    int terms = static_cast<int>(rng.next_range(1, 3));
    for (int t = 0; t < terms; ++t) {
        int len = static_cast<int>(rng.next_range(0, max_len));
        std::vector<std::size_t> w;
        for (int s = 0; s < len; ++s)
            w.push_back(static_cast<std::size_t>(
                rng.next_range(0, static_cast<long long>(pair->dim_g()) - 1)));
        Rat coeff(rng.next_range(-4, 4), rng.next_range(1, 3));
        u += coeff * UEnvElt::from_word(pair, w);
    }
    return u;
}

/// Random quotient element of the given arity with small monomial slots.
DpolyB random_d(Lcg& rng, const LiePairPtr& pair, int arity) {
    DpolyB d(pair);
    int terms = static_cast<int>(rng.next_range(1, 3));
    for (int t = 0; t < terms; ++t) {
        std::vector<std::vector<int>> tuple;
        for (int s = 0; s < arity; ++s) {
            std::vector<int> mono(pair->dim_b(), 0);
            for (std::size_t b = 0; b < pair->dim_b(); ++b)
                mono[b] = static_cast<int>(rng.next_range(0, 2));
            tuple.push_back(std::move(mono));
        }
        d.add(std::move(tuple), Rat(rng.next_range(-4, 4), rng.next_range(1, 3)));
    }
    return d;
}

using UNormal = std::map<std::pair<std::vector<int>, std::vector<int>>, Rat>;

UNormal u_pair_normal(const std::vector<UPairTerm>& e) {
    UNormal out;
    for (const auto& t : e)
        for (const auto& [le, lc] : t.left.terms())
            for (const auto& [re, rc] : t.right.terms()) {
                auto key = std::make_pair(le, re);
                out[key] += t.coeff * lc * rc;
                if (out[key] == 0) out.erase(key);
            }
    return out;
}

/// Componentwise product of pair expansions (everything here is even).
UNormal u_pair_mul(const std::vector<UPairTerm>& a, const std::vector<UPairTerm>& b) {
    UNormal out;
    for (const auto& ta : a)
        for (const auto& tb : b) {
            UEnvElt l = ta.left * tb.left;
            UEnvElt r = ta.right * tb.right;
            for (const auto& [le, lc] : l.terms())
                for (const auto& [re, rc] : r.terms()) {
                    auto key = std::make_pair(le, re);
                    out[key] += ta.coeff * tb.coeff * lc * rc;
                    if (out[key] == 0) out.erase(key);
                }
        }
    return out;
}

/// Left action of a general h-element on a quotient element.
DpolyB h_act(const BVec& a, const DpolyB& x) {
    DpolyB out(x.pair());
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != 0) out += a[i] * left_action(i, x);
    return out;
}

/// Chevalley-Eilenberg differential for quotient-complex valued cochains,
/// with the slotwise left action of h.  Mirrors the finite-dimensional
/// implementation but keeps values symbolic.
using DCochain = std::map<std::vector<std::size_t>, DpolyB>;

DCochain ce_d_dpoly(const DCochain& phi, int degree, const LiePairPtr& pair) {
    std::size_t nh = pair->dim_h();
    auto lookup = [&](std::vector<std::size_t> idx) -> DpolyB {
        Rat sgn(1);
        for (std::size_t i = 1; i < idx.size(); ++i)
            for (std::size_t j = i; j > 0 && idx[j - 1] >= idx[j]; --j) {
                if (idx[j - 1] == idx[j]) return DpolyB(pair);
                std::swap(idx[j - 1], idx[j]);
                sgn = -sgn;
            }
        auto it = phi.find(idx);
        return it == phi.end() ? DpolyB(pair) : sgn * it->second;
    };
    DCochain out;
    std::vector<std::size_t> tuple(static_cast<std::size_t>(degree) + 1);
    std::function<void(std::size_t, std::size_t)> go = [&](std::size_t slot, std::size_t from) {
        if (slot == tuple.size()) {
            DpolyB acc(pair);
            for (std::size_t i = 0; i < tuple.size(); ++i) {
                std::vector<std::size_t> rest;
                for (std::size_t l = 0; l < tuple.size(); ++l)
                    if (l != i) rest.push_back(tuple[l]);
                acc += sign_pow(static_cast<long long>(i)) *
                       left_action(tuple[i], lookup(rest));
            }
            for (std::size_t i = 0; i < tuple.size(); ++i)
                for (std::size_t j = i + 1; j < tuple.size(); ++j)
                    for (std::size_t k = 0; k < nh; ++k) {
                        if (pair->c(tuple[i], tuple[j], k) == 0) continue;
                        std::vector<std::size_t> rest{k};
                        for (std::size_t l = 0; l < tuple.size(); ++l)
                            if (l != i && l != j) rest.push_back(tuple[l]);
                        acc += sign_pow(static_cast<long long>(i + j)) *
                               pair->c(tuple[i], tuple[j], k) * lookup(rest);
                    }
            out.insert_or_assign(tuple, std::move(acc));
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

DpolyB d1_mono(const LiePairPtr& pair, const std::vector<int>& mono) {
    DpolyB d(pair);
    d.add({mono}, Rat(1));
    return d;
}

}  // namespace

TEST_CASE("pair validation", "[lie_pair]") {
    REQUIRE_NOTHROW(std2_pair());
    REQUIRE_NOTHROW(solv3_pair(Rat(3)));

    // Non-antisymmetric table.
    auto bad = zero_c(2);
    bad[0][1][1] = Rat(1);  // missing the antisymmetric counterpart
    REQUIRE_THROWS_AS(make_lie_pair(2, 1, bad), std::invalid_argument);

    // Jacobi failure: [e0,e1]=e2 and [e0,e2]=e0 leave a stray -e2 in the
    // cyclic sum.
    auto nj = zero_c(3);
    set_c(nj, 0, 1, 2, Rat(1));
    set_c(nj, 0, 2, 0, Rat(1));
    REQUIRE_THROWS_AS(make_lie_pair(3, 1, nj), std::invalid_argument);

    // Heisenberg with h spanned by e0, e1: [e0,e1]=e2 leaves h.
    auto heis = zero_c(3);
    set_c(heis, 0, 1, 2, Rat(1));
    REQUIRE_NOTHROW(make_lie_pair(3, 1, heis));
    REQUIRE_THROWS_AS(make_lie_pair(3, 2, heis), std::invalid_argument);
}

TEST_CASE("PBW straightening and confluence", "[lie_pair]") {
    LiePairPtr p2 = std2_pair();

    // e1 e0 is already in normal order (complement first, h last).
    UEnvElt w10 = UEnvElt::from_word(p2, {1, 0});
    REQUIRE(w10.terms().size() == 1);
    REQUIRE(w10.terms().at({1, 1}) == Rat(1));

    // e0 e1 = e1 e0 + [e0, e1] = e1 e0 + e1.
    UEnvElt w01 = UEnvElt::from_word(p2, {0, 1});
    UEnvElt expect = w10 + UEnvElt::generator(p2, 1);
    REQUIRE(w01 == expect);
    REQUIRE(UEnvElt::generator(p2, 0) * UEnvElt::generator(p2, 1) == expect);

    // Left-greedy and right-greedy rewriting agree on all words of total
    // exponent up to 5, and multiplication is associative.
    Lcg rng(20250825);
    for (const LiePairPtr& pair : {p2, solv3_pair(Rat(2))}) {
        for (int len = 0; len <= 5; ++len) {
            std::vector<std::size_t> w(static_cast<std::size_t>(len), 0);
            std::function<void(std::size_t)> go = [&](std::size_t slot) {
                if (slot == w.size()) {
                    REQUIRE(UEnvElt::from_word(pair, w, StraightenOrder::leftmost) ==
                            UEnvElt::from_word(pair, w, StraightenOrder::rightmost));
                    return;
                }
                for (std::size_t i = 0; i < pair->dim_g(); ++i) {
                    w[slot] = i;
                    go(slot + 1);
                }
            };
            go(0);
        }
        for (int s = 0; s < 20; ++s) {
            UEnvElt u = random_u(rng, pair, 2), v = random_u(rng, pair, 2),
                    w = random_u(rng, pair, 2);
            REQUIRE((u * v) * w == u * (v * w));
        }
    }
}

TEST_CASE("enveloping coproduct", "[lie_pair]") {
    LiePairPtr p2 = std2_pair();

    // Generators are primitive.
    for (std::size_t i : {0u, 1u}) {
        UEnvElt g = UEnvElt::generator(p2, i);
        UNormal nf = u_pair_normal(u_coproduct(g));
        UNormal want;
        std::vector<int> e{0, 0}, one{0, 0};
        e[i] = 1;
        want[{e, one}] = Rat(1);
        want[{one, e}] = Rat(1);
        REQUIRE(nf == want);
    }

    // Delta(e1 e0) = e1e0 (x) 1 + e1 (x) e0 + e0 (x) e1 + 1 (x) e1e0.
    UEnvElt u = UEnvElt::from_word(p2, {1, 0});
    UNormal nf = u_pair_normal(u_coproduct(u));
    UNormal want;
    std::vector<int> one{0, 0}, e0{1, 0}, e1{0, 1}, e10{1, 1};
    want[{e10, one}] = Rat(1);
    want[{e1, e0}] = Rat(1);
    want[{e0, e1}] = Rat(1);
    want[{one, e10}] = Rat(1);
    REQUIRE(nf == want);

    // Algebra map: Delta(uv) = Delta(u) Delta(v).
    Lcg rng(77001);
    for (const LiePairPtr& pair : {p2, solv3_pair(Rat(-1))}) {
        for (int s = 0; s < 15; ++s) {
            UEnvElt a = random_u(rng, pair, 2), b = random_u(rng, pair, 2);
            REQUIRE(u_pair_normal(u_coproduct(a * b)) ==
                    u_pair_mul(u_coproduct(a), u_coproduct(b)));
        }
    }

    // Cocommutativity.
    for (int s = 0; s < 10; ++s) {
        UEnvElt a = random_u(rng, p2, 3);
        UNormal fwd = u_pair_normal(u_coproduct(a));
        UNormal flip;
        for (const auto& [k, c] : fwd) flip[{k.second, k.first}] = c;
        REQUIRE(fwd == flip);
    }
}

TEST_CASE("quotient by right h-multiples", "[lie_pair]") {
    LiePairPtr p2 = std2_pair();

    // e1 e0 has a trailing h-factor and dies; the class of e1 survives.
    REQUIRE(quotient_to_DpolyB(UEnvElt::from_word(p2, {1, 0})).is_zero());
    DpolyB cls = quotient_to_DpolyB(UEnvElt::generator(p2, 1));
    REQUIRE(cls.terms().size() == 1);
    REQUIRE(cls.terms().at({{1}}) == Rat(1));

    Lcg rng(31415);
    for (const LiePairPtr& pair : {p2, solv3_pair(Rat(3))}) {
        for (int s = 0; s < 25; ++s) {
            UEnvElt v = random_u(rng, pair, 3);
            std::size_t a = static_cast<std::size_t>(
                rng.next_range(0, static_cast<long long>(pair->dim_h()) - 1));
            // Right h-multiples die in the quotient.
            REQUIRE(quotient_to_DpolyB(v * UEnvElt::generator(pair, a)).is_zero());
            // The action is computed on representatives: a.[v] = [a v].
            REQUIRE(left_action(a, quotient_to_DpolyB(v)) ==
                    quotient_to_DpolyB(UEnvElt::generator(pair, a) * v));
        }
    }
}

TEST_CASE("Hochschild differential on the quotient complex", "[lie_pair]") {
    LiePairPtr p2 = std2_pair();
    LiePairPtr p3 = solv3_pair(Rat(1, 2));

    // Scalars are closed; the unit class maps to minus the square of the unit.
    REQUIRE(hochschild_d_B(DpolyB::scalar(p2, Rat(5))).is_zero());
    DpolyB unit = DpolyB::one_class(p2);
    REQUIRE(hochschild_d_B(unit) == Rat(-1) * cup_B(unit, unit));

    Lcg rng(6021023);
    for (const LiePairPtr& pair : {p2, p3}) {
        for (int s = 0; s < 25; ++s) {
            int arity = static_cast<int>(rng.next_range(1, 2));
            DpolyB x = random_d(rng, pair, arity);
            REQUIRE(hochschild_d_B(hochschild_d_B(x)).is_zero());
            // h-equivariance of the differential.
            std::size_t a = static_cast<std::size_t>(
                rng.next_range(0, static_cast<long long>(pair->dim_h()) - 1));
            REQUIRE(hochschild_d_B(left_action(a, x)) == left_action(a, hochschild_d_B(x)));
        }
    }
}

TEST_CASE("Chevalley-Eilenberg differential", "[lie_pair]") {
    LiePairPtr p3 = solv3_pair(Rat(3));

    // Bott action of the nonabelian h on the one-dimensional quotient:
    // e0 acts by mu = 3, e1 acts by zero.
    CEAction bott = [&](std::size_t a, const BVec& v) {
        return mat_apply(bott_matrix(*p3, a), v);
    };
    REQUIRE(bott_matrix(*p3, 0) == BMat{{Rat(3)}});
    REQUIRE(bott_matrix(*p3, 1) == BMat{{Rat(0)}});

    Lcg rng(90210);
    for (int s = 0; s < 10; ++s) {
        CECochain phi;
        phi.dim_h = 2;
        phi.val_dim = 1;
        phi.degree = 0;
        phi.comps[{}] = {Rat(rng.next_range(-5, 5), rng.next_range(1, 4))};
        CECochain d1 = ce_differential(phi, *p3, bott);
        REQUIRE(d1.degree == 1);
        CECochain d2 = ce_differential(d1, *p3, bott);
        REQUIRE(d2.is_zero());

        CECochain psi;
        psi.dim_h = 2;
        psi.val_dim = 1;
        psi.degree = 1;
        psi.comps[{0}] = {Rat(rng.next_range(-5, 5))};
        psi.comps[{1}] = {Rat(rng.next_range(-5, 5))};
        REQUIRE(ce_differential(ce_differential(psi, *p3, bott), *p3, bott).is_zero());
    }

    // A non-representation is rejected: with [e0,e1]=e1 in h, rho(e0)=0 and
    // rho(e1)=id fail the bracket condition.
    CEAction bad = [](std::size_t a, const BVec& v) {
        return a == 0 ? BVec(v.size(), Rat(0)) : v;
    };
    CECochain phi;
    phi.dim_h = 2;
    phi.val_dim = 2;
    phi.degree = 0;
    phi.comps[{}] = {Rat(1), Rat(0)};
    REQUIRE_THROWS_AS(ce_differential(phi, *p3, bad), std::invalid_argument);

    // The differential commutes with the Hochschild differential on
    // quotient-valued forms.
    for (const LiePairPtr& pair : {std2_pair(), p3}) {
        for (int s = 0; s < 10; ++s) {
            DCochain zero_form{{{}, random_d(rng, pair, 2)}};
            DCochain d_zero = ce_d_dpoly(zero_form, 0, pair);
            DCochain dh_zero;
            for (const auto& [k, v] : zero_form) dh_zero.insert_or_assign(k, hochschild_d_B(v));
            DCochain lhs = ce_d_dpoly(dh_zero, 0, pair);
            for (const auto& [k, v] : d_zero) REQUIRE(lhs.at(k) == hochschild_d_B(v));

            DCochain one_form;
            for (std::size_t a = 0; a < pair->dim_h(); ++a)
                one_form.insert_or_assign({a}, random_d(rng, pair, 1));
            DCochain d_one = ce_d_dpoly(one_form, 1, pair);
            DCochain dh_one;
            for (const auto& [k, v] : one_form) dh_one.insert_or_assign(k, hochschild_d_B(v));
            DCochain lhs2 = ce_d_dpoly(dh_one, 1, pair);
            for (const auto& [k, v] : d_one) REQUIRE(lhs2.at(k) == hochschild_d_B(v));
        }
    }
}

TEST_CASE("Hopf maps on the quotient complex", "[lie_pair]") {
    LiePairPtr p3 = solv3_pair(Rat(1));
    Lcg rng(424242);

    // Reversal: t(p1 (x) p2) = -p2 (x) p1.
    DpolyB p = d1_mono(p3, {1}), q = d1_mono(p3, {2});
    REQUIRE(t_map_B(cup_B(p, q)) == Rat(-1) * cup_B(q, p));
    REQUIRE(t_map_B(p) == p);

    // Arity-one elements are primitive for the shuffle coproduct.
    auto nf = b_pair_normal_form(shuffle_coproduct_B(p));
    std::map<std::pair<std::vector<std::vector<int>>, std::vector<std::vector<int>>>, Rat> want;
    want[{{{1}}, {}}] = Rat(1);
    want[{{}, {{1}}}] = Rat(1);
    REQUIRE(nf == want);

    // Counit: eps(unit) = 1 and (eps (x) id) Delta = id.
    REQUIRE(counit_B(DpolyB::scalar(p3, Rat(1))) == Rat(1));
    for (int s = 0; s < 15; ++s) {
        int arity = static_cast<int>(rng.next_range(0, 3));
        DpolyB x = random_d(rng, p3, arity);
        DpolyB left(p3), right(p3);
        for (const auto& term : shuffle_coproduct_B(x)) {
            left += (term.coeff * counit_B(term.left)) * term.right;
            right += (term.coeff * counit_B(term.right)) * term.left;
        }
        REQUIRE(left == x);
        REQUIRE(right == x);

        // Convolution inverse of the identity: cup (S (x) id) Delta = eta eps
        // with S = (-1)^arity t.
        auto antipode_B = [](const DpolyB& y) {
            DpolyB out(y.pair());
            DpolyB rev = t_map_B(y);
            for (const auto& [tuple, c] : rev.terms()) {
                DpolyB term(y.pair());
                term.add(tuple, c);
                out += sign_pow(static_cast<long long>(tuple.size())) * term;
            }
            return out;
        };
        DpolyB conv(p3), conv2(p3);
        for (const auto& term : shuffle_coproduct_B(x)) {
            conv += term.coeff * cup_B(antipode_B(term.left), term.right);
            conv2 += term.coeff * cup_B(term.left, antipode_B(term.right));
        }
        DpolyB eta_eps = DpolyB::scalar(p3, counit_B(x));
        REQUIRE(conv == eta_eps);
        REQUIRE(conv2 == eta_eps);

        // Coassociativity.
        std::map<std::tuple<std::vector<std::vector<int>>, std::vector<std::vector<int>>,
                            std::vector<std::vector<int>>>,
                 Rat>
            lhs3, rhs3;
        for (const auto& term : shuffle_coproduct_B(x)) {
            for (const auto& inner : shuffle_coproduct_B(term.left))
                for (const auto& [tl, cl] : inner.left.terms())
                    for (const auto& [tm, cm] : inner.right.terms())
                        for (const auto& [tr, cr] : term.right.terms()) {
                            auto key = std::make_tuple(tl, tm, tr);
                            lhs3[key] += term.coeff * inner.coeff * cl * cm * cr;
                            if (lhs3[key] == 0) lhs3.erase(key);
                        }
            for (const auto& inner : shuffle_coproduct_B(term.right))
                for (const auto& [tl, cl] : term.left.terms())
                    for (const auto& [tm, cm] : inner.left.terms())
                        for (const auto& [tr, cr] : inner.right.terms()) {
                            auto key = std::make_tuple(tl, tm, tr);
                            rhs3[key] += term.coeff * inner.coeff * cl * cm * cr;
                            if (rhs3[key] == 0) rhs3.erase(key);
                        }
        }
        REQUIRE(lhs3 == rhs3);
    }

    // Multiplicativity with the Koszul sign (degrees are arities).
    for (int s = 0; s < 10; ++s) {
        DpolyB x = random_d(rng, p3, static_cast<int>(rng.next_range(0, 2)));
        DpolyB y = random_d(rng, p3, static_cast<int>(rng.next_range(0, 2)));
        auto lhs = b_pair_normal_form(shuffle_coproduct_B(cup_B(x, y)));
        std::vector<BPairTerm> prod;
        for (const auto& tx : shuffle_coproduct_B(x))
            for (const auto& ty : shuffle_coproduct_B(y))
                for (const auto& [r1, c1] : tx.right.terms())
                    for (const auto& [l2, c2] : ty.left.terms()) {
                        Rat sgn = sign_pow(static_cast<long long>(r1.size()) *
                                           static_cast<long long>(l2.size()));
                        DpolyB rr(p3), ll(p3);
                        rr.add(r1, Rat(1));
                        ll.add(l2, Rat(1));
                        prod.push_back(BPairTerm{cup_B(tx.left, ll), cup_B(rr, ty.right),
                                                 sgn * tx.coeff * ty.coeff * c1 * c2});
                    }
        REQUIRE(lhs == b_pair_normal_form(prod));
    }
}

TEST_CASE("free Lie layer of the quotient complex", "[lie_pair]") {
    Lcg rng(555111);
    for (const LiePairPtr& pair : {std2_pair(), solv3_pair(Rat(2))}) {
        for (int s = 0; s < 25; ++s) {
            DpolyB p = random_d(rng, pair, 1);
            // The differential of an arity-one class lands in the free Lie
            // algebra layer of arity two.
            REQUIRE(is_in_free_lie_B(hochschild_d_B(p), 2));
            // Brackets of arity-one classes are symmetric (odd generators)
            // and in the layer by construction.
            DpolyB q = random_d(rng, pair, 1);
            DpolyB br = cup_B(p, q) + cup_B(q, p);
            REQUIRE(is_in_free_lie_B(br, 2));
        }
    }

    // An antisymmetric combination of independent monomials is not a bracket.
    LiePairPtr p3 = solv3_pair(Rat(2));
    DpolyB u = d1_mono(p3, {1}), v = d1_mono(p3, {2});
    REQUIRE_FALSE(is_in_free_lie_B(cup_B(u, v) - cup_B(v, u), 2));
}

TEST_CASE("Bott action and lift independence", "[lie_pair]") {
    LiePairPtr p2 = std2_pair();

    // [e0, e1] = e1 projects to the quotient generator.
    REQUIRE(bott_matrix(*p2, 0) == BMat{{Rat(1)}});

    Lcg rng(808080);
    for (const LiePairPtr& pair : {p2, solv3_pair(Rat(-2))}) {
        Splitting std_j = Splitting::standard(*pair);
        for (int s = 0; s < 20; ++s) {
            Splitting other = std_j;
            for (auto& row : other.h_correction)
                for (auto& x : row) x = Rat(rng.next_range(-3, 3), rng.next_range(1, 2));
            BVec a(pair->dim_h()), b(pair->dim_b());
            for (auto& x : a) x = Rat(rng.next_range(-3, 3));
            for (auto& x : b) x = Rat(rng.next_range(-3, 3));
            REQUIRE(bott_connection(*pair, a, b, std_j) ==
                    bott_connection(*pair, a, b, other));
        }
    }
}

TEST_CASE("Atiyah cocycle of the pair", "[lie_pair]") {
    LiePairPtr p2 = std2_pair();
    Splitting j2 = Splitting::standard(*p2);

    // One-parameter family: nabla along the quotient direction acts by
    // lambda; the cocycle value is -lambda.
    for (const Rat& lambda : {Rat(2), Rat(-3, 5), Rat(7)}) {
        LPConnection conn{{bott_matrix(*p2, 0), BMat{{lambda}}}};
        CECochain alpha = lie_pair_atiyah_cocycle(*p2, conn, j2);
        REQUIRE(alpha.comps.at({0}) == BVec{-lambda});
        // Top Chevalley-Eilenberg degree: closedness is automatic.
        REQUIRE(ce_differential(alpha, *p2, atiyah_value_action(*p2)).is_zero());
    }

    // A connection that does not extend the Bott action is rejected.
    LPConnection bad{{BMat{{Rat(0)}}, BMat{{Rat(1)}}}};
    REQUIRE_THROWS_AS(lie_pair_atiyah_cocycle(*p2, bad, j2), std::invalid_argument);

    // Nontrivial closedness with a two-dimensional h.
    Lcg rng(13579);
    for (const Rat& mu : {Rat(1), Rat(1, 2), Rat(-3)}) {
        LiePairPtr p3 = solv3_pair(mu);
        Splitting j3 = Splitting::standard(*p3);
        for (int s = 0; s < 10; ++s) {
            LPConnection conn{{bott_matrix(*p3, 0), bott_matrix(*p3, 1),
                               BMat{{Rat(rng.next_range(-4, 4), rng.next_range(1, 3))}}}};
            Splitting jj = j3;
            for (auto& row : jj.h_correction)
                for (auto& x : row) x = Rat(rng.next_range(-2, 2));
            CECochain alpha = lie_pair_atiyah_cocycle(*p3, conn, jj);
            REQUIRE(ce_differential(alpha, *p3, atiyah_value_action(*p3)).is_zero());
        }
    }

    // Class independence: changing the connection or the splitting shifts
    // the cocycle by an exact term.
    for (const Rat& mu : {Rat(1), Rat(2)}) {
        LiePairPtr p3 = solv3_pair(mu);
        CEAction act = atiyah_value_action(*p3);
        std::size_t val_dim = 1;
        // Image of the degree-zero differential, flattened over the two
        // one-index components.
        RatSpan image(2 * val_dim);
        for (std::size_t v = 0; v < val_dim; ++v) {
            CECochain e;
            e.dim_h = 2;
            e.val_dim = val_dim;
            e.degree = 0;
            e.comps[{}] = BVec(val_dim, Rat(0));
            e.comps[{}][v] = Rat(1);
            CECochain de = ce_differential(e, *p3, act);
            BVec flat;
            for (std::size_t a = 0; a < 2; ++a) {
                BVec comp = de.comps.count({a}) ? de.comps.at({a}) : BVec(val_dim, Rat(0));
                flat.insert(flat.end(), comp.begin(), comp.end());
            }
            image.insert(flat);
        }
        Lcg rng2(2468);
        Splitting j3 = Splitting::standard(*p3);
        for (int s = 0; s < 15; ++s) {
            auto sample = [&](Lcg& r) {
                LPConnection conn{{bott_matrix(*p3, 0), bott_matrix(*p3, 1),
                                   BMat{{Rat(r.next_range(-4, 4), r.next_range(1, 3))}}}};
                Splitting jj = j3;
                for (auto& row : jj.h_correction)
                    for (auto& x : row) x = Rat(r.next_range(-2, 2));
                return lie_pair_atiyah_cocycle(*p3, conn, jj);
            };
            CECochain a1 = sample(rng2), a2 = sample(rng2);
            BVec diff;
            for (std::size_t a = 0; a < 2; ++a) {
                BVec c1 = a1.comps.at({a}), c2 = a2.comps.at({a});
                for (std::size_t v = 0; v < val_dim; ++v) diff.push_back(c1[v] - c2[v]);
            }
            REQUIRE(image.contains(diff));
        }
    }
}
