#pragma once

// The check registry: named, seeded, exact property checks over a scene.
// Every failing check carries a counterexample with the rendered input and
// the two unequal normal forms; re-running the named check with the recorded
// seed reproduces the failure.

#include "dgatlas/atiyah.hpp"
#include "dgatlas/free_lie.hpp"
#include "dgatlas/lie_pair.hpp"
#include "dgatlas/polydiff.hpp"
#include "dgatlas/random_gen.hpp"
#include "dgatlas/scene.hpp"

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace dgatlas {

struct UnknownCheckError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace checks_detail {

inline std::uint64_t mix_seed(std::uint64_t seed, const std::string& name) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : name) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return seed ^ h;
}

inline nlohmann::json make_ce(const std::string& check, std::uint64_t seed, long long sample,
                              nlohmann::json input, const std::string& lhs,
                              const std::string& rhs) {
    nlohmann::json ce;
    ce["check"] = check;
    ce["seed"] = seed;
    ce["sample"] = sample;
    ce["input"] = std::move(input);
    ce["lhs"] = lhs;
    ce["rhs"] = rhs;
    return ce;
}

/// A failure payload or nothing; "skipped" is reported via the status field.
struct Outcome {
    std::string status = "pass";
    nlohmann::json ce;
};

inline std::string render_field(const VectorField& X) { return X.to_diffop().str(); }

inline std::string render_elt(const ModElt& e) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < e.c.size(); ++i) {
        if (i) os << ", ";
        os << e.c[i].str();
    }
    os << ")";
    return os.str();
}

inline std::string render_cochain(const HomCochain& phi) {
    std::ostringstream os;
    std::vector<std::size_t> idx(phi.inputs().size(), 0);
    std::function<void(std::size_t)> go = [&](std::size_t j) {
        if (j == idx.size()) {
            const ModElt& e = phi.component(idx);
            if (e.is_zero()) return;
            os << "[";
            for (std::size_t l = 0; l < idx.size(); ++l) os << (l ? "," : "") << idx[l];
            os << "]=" << render_elt(e) << " ";
            return;
        }
        for (std::size_t a = 0; a < phi.inputs()[j].rank(); ++a) {
            idx[j] = a;
            go(j + 1);
        }
    };
    go(0);
    std::string s = os.str();
    return s.empty() ? "0" : s;
}

inline std::string render_dpoly(const DpolyB& x) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [tuple, c] : x.terms()) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c << ")*";
        if (tuple.empty()) os << "1";
        for (std::size_t s = 0; s < tuple.size(); ++s) {
            if (s) os << "(x)";
            os << "[";
            for (std::size_t b = 0; b < tuple[s].size(); ++b)
                os << (b ? "," : "") << tuple[s][b];
            os << "]";
        }
    }
    return first ? "0" : os.str();
}

inline std::string render_uelt(const UEnvElt& u) {
    std::ostringstream os;
    bool first = true;
    for (const auto& [exps, c] : u.terms()) {
        if (!first) os << " + ";
        first = false;
        os << "(" << c << ")*e^[";
        for (std::size_t i = 0; i < exps.size(); ++i) os << (i ? "," : "") << exps[i];
        os << "]";
    }
    return first ? "0" : os.str();
}

inline long long par(Degree d) { return ((d % 2) + 2) % 2; }

inline Poly random_poly_of_degree(Lcg& rng, const ChartPtr& chart, Degree d) {
    Poly p = Poly::zero(chart);
    int terms = static_cast<int>(rng.next_range(0, 2));
    for (int t = 0; t < terms; ++t)
        for (int tries = 0; tries < 12; ++tries) {
            Monomial m = random_monomial(rng, *chart, 3);
            if (m.degree(*chart) == d) {
                p += Poly::monomial(chart, m, random_rat(rng));
                break;
            }
        }
    return p;
}

inline Connection random_connection(Lcg& rng, const FreeDgModule& N) {
    const ChartPtr& chart = N.chart();
    Connection conn = Connection::flat(N);
    for (std::size_t i = 0; i < chart->size(); ++i)
        for (std::size_t a = 0; a < N.rank(); ++a)
            for (std::size_t b = 0; b < N.rank(); ++b)
                conn.gamma[i][a].c[b] = random_poly_of_degree(
                    rng, chart, -chart->degree(i) + N.degree(a) - N.degree(b));
    return conn;
}

/// The homological field of the scene, or a ready-made failure payload with
/// the nonzero [Q,Q] term rendered.
inline std::optional<HomologicalField> get_q(const Scene& s, const std::string& check,
                                             std::uint64_t seed, Outcome& out) {
    VectorField qq = lie_bracket(s.q, s.q);
    if (!qq.to_diffop().is_zero()) {
        nlohmann::json input;
        input["Q"] = render_field(s.q);
        out.status = "fail";
        out.ce = make_ce(check, seed, 0, std::move(input), "[Q,Q] = " + render_field(qq), "0");
        return std::nullopt;
    }
    return HomologicalField(s.q);
}

using CheckBody = std::function<Outcome(const Scene&, std::uint64_t)>;

// -- check bodies ----------------------------------------------------------

inline Outcome chk_homological(const Scene& s, std::uint64_t seed) {
    Outcome out;
    (void)get_q(s, "homological", seed, out);
    return out;
}

inline Outcome chk_hochschild_square(const Scene& s, std::uint64_t seed) {
    Outcome out;
    Lcg rng(mix_seed(seed, "hochschild-square"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        PolyDiffOp D = random_polydiffop(rng, s.chart, s.bounds.max_arity, s.bounds.max_order,
                                         s.bounds.max_poly_degree);
        PolyDiffOp dd = hochschild_d(hochschild_d(D));
        if (!dd.is_zero()) {
            out.status = "fail";
            out.ce = make_ce("hochschild-square", seed, t, {{"D", D.str()}},
                             "d_H(d_H(D)) = " + dd.str(), "0");
            return out;
        }
    }
    return out;
}

inline Outcome chk_dh_vs_bracket(const Scene& s, std::uint64_t seed) {
    Outcome out;
    Lcg rng(mix_seed(seed, "dh-vs-bracket"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        PolyDiffOp D = random_polydiffop(rng, s.chart, s.bounds.max_arity, s.bounds.max_order,
                                         s.bounds.max_poly_degree);
        PolyDiffOp lhs = hochschild_d(D);
        PolyDiffOp rhs = hochschild_d_via_m(D);
        if (!(lhs == rhs)) {
            out.status = "fail";
            out.ce = make_ce("dh-vs-bracket", seed, t, {{"D", D.str()}}, lhs.str(), rhs.str());
            return out;
        }
    }
    return out;
}

inline Outcome chk_dh_lq_anticommute(const Scene& s, std::uint64_t seed) {
    Outcome out;
    auto q = get_q(s, "dh-lq-anticommute", seed, out);
    if (!q) return out;
    PolyDiffOp mq = gerstenhaber_bracket(PolyDiffOp::multiplication(s.chart),
                                         PolyDiffOp::from_diffop(q->field().to_diffop()));
    if (!mq.is_zero()) {
        out.status = "fail";
        out.ce = make_ce("dh-lq-anticommute", seed, 0, {{"Q", render_field(s.q)}},
                         "[m,Q] = " + mq.str(), "0");
        return out;
    }
    Lcg rng(mix_seed(seed, "dh-lq-anticommute"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        PolyDiffOp D = random_polydiffop(rng, s.chart, s.bounds.max_arity, s.bounds.max_order,
                                         s.bounds.max_poly_degree);
        PolyDiffOp anti = hochschild_d(lie_q(*q, D)) + lie_q(*q, hochschild_d(D));
        if (!anti.is_zero()) {
            out.status = "fail";
            out.ce = make_ce("dh-lq-anticommute", seed, t,
                             {{"Q", render_field(s.q)}, {"D", D.str()}},
                             "(d_H L_Q + L_Q d_H)(D) = " + anti.str(), "0");
            return out;
        }
    }
    return out;
}

inline Outcome chk_leibniz_cup(const Scene& s, std::uint64_t seed) {
    Outcome out;
    Lcg rng(mix_seed(seed, "leibniz-cup"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        PolyDiffOp D = random_bihomog_polydiffop(rng, s.chart, 0, s.bounds.max_arity,
                                                 s.bounds.max_order, 2);
        PolyDiffOp E = random_polydiffop(rng, s.chart, s.bounds.max_arity, s.bounds.max_order,
                                         s.bounds.max_poly_degree);
        if (D.is_zero()) continue;
        PolyDiffOp lhs = hochschild_d(cup(D, E));
        PolyDiffOp rhs =
            cup(hochschild_d(D), E) + sign_pow(*D.total_degree()) * cup(D, hochschild_d(E));
        if (!(lhs == rhs)) {
            out.status = "fail";
            out.ce = make_ce("leibniz-cup", seed, t, {{"D", D.str()}, {"E", E.str()}},
                             lhs.str(), rhs.str());
            return out;
        }
    }
    return out;
}

inline Outcome chk_jacobi_gerstenhaber(const Scene& s, std::uint64_t seed) {
    Outcome out;
    Lcg rng(mix_seed(seed, "jacobi-gerstenhaber"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        PolyDiffOp D = random_bihomog_polydiffop(rng, s.chart, 1, 2, s.bounds.max_order, 2);
        PolyDiffOp E = random_bihomog_polydiffop(rng, s.chart, 1, 2, s.bounds.max_order, 2);
        PolyDiffOp F = random_bihomog_polydiffop(rng, s.chart, 1, 2, s.bounds.max_order, 2);
        if (D.is_zero() || E.is_zero() || F.is_zero()) continue;
        long long dd = *D.total_degree(), de = *E.total_degree();
        PolyDiffOp anti = gerstenhaber_bracket(D, E) +
                          sign_pow((dd + 1) * (de + 1)) * gerstenhaber_bracket(E, D);
        if (!anti.is_zero()) {
            out.status = "fail";
            out.ce = make_ce("jacobi-gerstenhaber", seed, t, {{"D", D.str()}, {"E", E.str()}},
                             "[D,E] + (-1)^{(|D|+1)(|E|+1)}[E,D] = " + anti.str(), "0");
            return out;
        }
        PolyDiffOp lhs = gerstenhaber_bracket(D, gerstenhaber_bracket(E, F));
        PolyDiffOp rhs =
            gerstenhaber_bracket(gerstenhaber_bracket(D, E), F) +
            sign_pow((dd + 1) * (de + 1)) * gerstenhaber_bracket(E, gerstenhaber_bracket(D, F));
        if (!(lhs == rhs)) {
            out.status = "fail";
            out.ce = make_ce("jacobi-gerstenhaber", seed, t,
                             {{"D", D.str()}, {"E", E.str()}, {"F", F.str()}}, lhs.str(),
                             rhs.str());
            return out;
        }
    }
    return out;
}

inline Outcome chk_delta_defining(const Scene& s, std::uint64_t seed) {
    Outcome out;
    Lcg rng(mix_seed(seed, "delta-defining"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        DiffOp D = random_diffop(rng, s.chart, s.bounds.max_order, s.bounds.max_poly_degree);
        PolyDiffOp delta = coproduct_delta(D);
        Poly f1 = Poly::monomial(s.chart, random_monomial(rng, *s.chart, 3), Rat(1));
        Poly f2 = Poly::monomial(s.chart, random_monomial(rng, *s.chart, 3), Rat(1));
        if (f1.is_zero() || f2.is_zero()) continue;
        Poly lhs = eval(delta, {f1, f2});
        Poly rhs = sign_pow(par(*f1.degree()) + 1) * apply(D, poly_mul(f1, f2));
        if (!(lhs == rhs)) {
            out.status = "fail";
            out.ce = make_ce("delta-defining", seed, t,
                             {{"D", D.str()}, {"f1", f1.str()}, {"f2", f2.str()}}, lhs.str(),
                             rhs.str());
            return out;
        }
    }
    return out;
}

inline Outcome chk_delta_appendix(const Scene& s, std::uint64_t seed) {
    Outcome out;
    Lcg rng(mix_seed(seed, "delta-appendix"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        // Closed bracket-sum formula vs. the defining coproduct on
        // composable words of homogeneous fields.
        std::size_t n = 1 + static_cast<std::size_t>(rng.next_range(0, 2));
        std::vector<VectorField> fields;
        DiffOp comp = DiffOp::identity(s.chart);
        bool ok = true;
        for (std::size_t k = 0; k < n; ++k) {
            VectorField X = random_homogeneous_field(
                rng, s.chart, static_cast<Degree>(rng.next_range(-1, 2)), 2);
            if (!X.degree()) {
                ok = false;
                break;
            }
            fields.push_back(X);
            comp = compose(comp, X.to_diffop());
        }
        if (ok) {
            PolyDiffOp lhs = delta_appendix(fields);
            PolyDiffOp rhs = coproduct_delta(comp);
            if (!(lhs == rhs)) {
                nlohmann::json input;
                for (const auto& X : fields) input["fields"].push_back(render_field(X));
                out.status = "fail";
                out.ce = make_ce("delta-appendix", seed, t, std::move(input), lhs.str(),
                                 rhs.str());
                return out;
            }
        }

        // Coboundary vs. insertion product with the classical cup-commutator
        // correction.
        PolyDiffOp D = random_bihomog_polydiffop(rng, s.chart, 1, 2, 1, 2);
        PolyDiffOp E = random_bihomog_polydiffop(rng, s.chart, 1, 2, 1, 2);
        if (!D.is_zero() && !E.is_zero()) {
            long long dD = *D.total_degree(), dE = *E.total_degree();
            PolyDiffOp lhs = hochschild_d(gerstenhaber_product(D, E));
            PolyDiffOp rhs =
                gerstenhaber_product(hochschild_d(D), E) +
                sign_pow(dD - 1) * gerstenhaber_product(D, hochschild_d(E)) +
                sign_pow(dD * (dE + 1)) * (cup(E, D) - sign_pow(dD * dE) * cup(D, E));
            if (!(lhs == rhs)) {
                out.status = "fail";
                out.ce = make_ce("delta-appendix", seed, t, {{"D", D.str()}, {"E", E.str()}},
                                 lhs.str(), rhs.str());
                return out;
            }

            // Insertion by a vector field distributes over the canonical
            // bracket.
            VectorField Xf = random_vector_field(rng, s.chart, 2);
            PolyDiffOp X = PolyDiffOp::from_diffop(Xf.to_diffop());
            if (!X.is_zero()) {
                PolyDiffOp l2 = gerstenhaber_product(X, canonical_bracket(D, E));
                PolyDiffOp r2 =
                    canonical_bracket(gerstenhaber_product(X, D), E) +
                    sign_pow(dD * dE + 1) * canonical_bracket(gerstenhaber_product(X, E), D);
                if (!(l2 == r2)) {
                    out.status = "fail";
                    out.ce = make_ce("delta-appendix", seed, t,
                                     {{"X", X.str()}, {"D", D.str()}, {"E", E.str()}},
                                     l2.str(), r2.str());
                    return out;
                }
            }
        }
    }
    return out;
}

inline Outcome chk_hopf_axioms(const Scene& s, std::uint64_t seed) {
    Outcome out;
    Lcg rng(mix_seed(seed, "hopf-axioms"));
    auto corrected_antipode = [&](const PolyDiffOp& l) {
        PolyDiffOp tl = antipode(l);
        PolyDiffOp sl(s.chart);
        for (const auto& [tup, cf] : tl.terms())
            sl.add(tup, sign_pow(static_cast<long long>(tup.size())) * cf);
        return sl;
    };
    for (int t = 0; t < s.bounds.samples; ++t) {
        PolyDiffOp D = random_polydiffop(rng, s.chart, std::min(s.bounds.max_arity, 3),
                                         s.bounds.max_order, s.bounds.max_poly_degree);

        // Counit axiom: (eps # id) Delta~ = id.
        PolyDiffOp acc(s.chart);
        for (const auto& [l, r, c] : shuffle_coproduct(D)) {
            Poly e = counit(l);
            if (e.is_zero()) continue;
            acc += c * cup(unit(e), r);
        }
        if (!(acc == D)) {
            out.status = "fail";
            out.ce = make_ce("hopf-axioms", seed, t, {{"D", D.str()}},
                             "(eps#id)Delta~(D) = " + acc.str(), D.str());
            return out;
        }

        // Convolution: cup (S # id) Delta~ = eta eps with S = (-1)^{arity} t.
        PolyDiffOp convolved(s.chart);
        for (const auto& [l, r, c] : shuffle_coproduct(D))
            convolved += c * cup(corrected_antipode(l), r);
        PolyDiffOp eta_eps = unit(counit(D));
        if (!(convolved == eta_eps)) {
            out.status = "fail";
            out.ce = make_ce("hopf-axioms", seed, t, {{"D", D.str()}},
                             "cup(S#id)Delta~(D) = " + convolved.str(),
                             "eta(eps(D)) = " + eta_eps.str());
            return out;
        }

        // Coassociativity via the canonical triple expansion.
        using Triple = std::tuple<DerTuple, DerTuple, DerTuple>;
        auto triple_nf =
            [&](const std::vector<std::tuple<PolyDiffOp, PolyDiffOp, PolyDiffOp, Rat>>& terms) {
                std::map<Triple, Poly> nf;
                for (const auto& [A, B, C, coeff] : terms)
                    for (const auto& [ta, ca] : A.terms())
                        for (const auto& [tb, cb] : B.terms())
                            for (const auto& [tc, cc] : C.terms()) {
                                long long tot_a = tuple_total_degree(*s.chart, ta);
                                long long tot_b = tuple_total_degree(*s.chart, tb);
                                for (const auto& [ma, aa] : ca.terms())
                                    for (const auto& [mb, ab] : cb.terms())
                                        for (const auto& [mc, ac] : cc.terms()) {
                                            long long move =
                                                par(mb.degree(*s.chart)) * (tot_a % 2) +
                                                par(mc.degree(*s.chart)) *
                                                    ((tot_a + tot_b) % 2);
                                            Poly c = poly_mul(
                                                          poly_mul(Poly::monomial(s.chart, ma, aa),
                                                                   Poly::monomial(s.chart, mb, ab)),
                                                          Poly::monomial(s.chart, mc, ac)) *
                                                      (coeff * sign_pow(move));
                                            if (c.is_zero()) continue;
                                            Triple key{ta, tb, tc};
                                            auto it = nf.find(key);
                                            if (it == nf.end())
                                                nf.emplace(key, c);
                                            else {
                                                it->second += c;
                                                if (it->second.is_zero()) nf.erase(it);
                                            }
                                        }
                            }
                return nf;
            };
        std::vector<std::tuple<PolyDiffOp, PolyDiffOp, PolyDiffOp, Rat>> lhs, rhs;
        for (const auto& [l, r, c] : shuffle_coproduct(D)) {
            for (const auto& [a, b, c2] : shuffle_coproduct(l)) lhs.emplace_back(a, b, r, c * c2);
            for (const auto& [b, c3, c2] : shuffle_coproduct(r))
                rhs.emplace_back(l, b, c3, c * c2);
        }
        if (!(triple_nf(lhs) == triple_nf(rhs))) {
            out.status = "fail";
            out.ce = make_ce("hopf-axioms", seed, t, {{"D", D.str()}},
                             "(Delta~#id)Delta~(D)", "(id#Delta~)Delta~(D)");
            return out;
        }
    }
    return out;
}

inline Outcome chk_pbw_hkr(const Scene& s, std::uint64_t seed) {
    Outcome out;
    auto q = get_q(s, "pbw-hkr-decomposition", seed, out);
    if (!q) return out;
    Lcg rng(mix_seed(seed, "pbw-hkr-decomposition"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        PolyVector v =
            random_polyvector(rng, s.chart, s.bounds.max_arity, s.bounds.max_poly_degree);
        PolyDiffOp h = hkr(v);

        // Decomposition through pbw of symmetrized coordinate-field words.
        PolyDiffOp via_pbw(s.chart);
        for (const auto& [idx, coeff] : v.terms()) {
            std::vector<FreeLieElt> factors;
            for (std::size_t i : idx)
                factors.push_back(FreeLieElt::generator(DiffOp::partial_op(s.chart, i)));
            auto [w, kappa] = SymWord::make(s.chart, std::move(factors));
            if (kappa == 0) continue;
            via_pbw += kappa * cup(PolyDiffOp::from_function(coeff), pbw(w));
        }
        if (!(h == via_pbw)) {
            out.status = "fail";
            out.ce = make_ce("pbw-hkr-decomposition", seed, t, nlohmann::json::object(),
                             "hkr(v) = " + h.str(), "pbw(S(theta(v))) = " + via_pbw.str());
            return out;
        }

        // Chain map into Hochschild cocycles.
        PolyDiffOp dh = hochschild_d(h);
        if (!dh.is_zero()) {
            out.status = "fail";
            out.ce = make_ce("pbw-hkr-decomposition", seed, t, nlohmann::json::object(),
                             "d_H(hkr(v)) = " + dh.str(), "0");
            return out;
        }

        // Intertwining on vector fields: hkr(theta([Q,X])) = L_Q hkr(theta X).
        VectorField X = random_homogeneous_field(
            rng, s.chart, static_cast<Degree>(rng.next_range(-1, 2)), 2);
        if (!X.to_diffop().is_zero()) {
            PolyDiffOp lhs = lie_q(*q, PolyDiffOp::from_diffop(X.to_diffop()));
            VectorField QX = lie_bracket(q->field(), X);
            PolyDiffOp rhs = QX.to_diffop().is_zero() ? PolyDiffOp::zero(s.chart)
                                                      : PolyDiffOp::from_diffop(QX.to_diffop());
            if (!(lhs == rhs)) {
                out.status = "fail";
                out.ce = make_ce("pbw-hkr-decomposition", seed, t, {{"X", render_field(X)}},
                                 lhs.str(), rhs.str());
                return out;
            }
        }
    }
    return out;
}

inline Outcome chk_theta_membership(const Scene& s, std::uint64_t seed) {
    Outcome out;
    Lcg rng(mix_seed(seed, "theta-membership"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        DiffOp D = random_diffop(rng, s.chart, s.bounds.max_order, s.bounds.max_poly_degree, 2);
        PolyDiffOp dh = hochschild_d(PolyDiffOp::from_diffop(D));
        if (!is_in_free_lie(dh, 2)) {
            out.status = "fail";
            out.ce = make_ce("theta-membership", seed, t, {{"D", D.str()}},
                             "d_H(D) = " + dh.str(),
                             "a length-<=2 free Lie combination (membership failed)");
            return out;
        }
    }
    return out;
}

inline Outcome chk_r1_diagram(const Scene& s, std::uint64_t seed) {
    Outcome out;
    Lcg rng(mix_seed(seed, "r1-diagram"));
    auto random_generator = [&](int max_order, int max_degree) {
        DiffOp D(s.chart);
        D.add_term(random_monomial(rng, *s.chart, max_degree),
                   random_der_word(rng, *s.chart, max_order), Rat(1));
        return FreeLieElt::generator(D);
    };
    for (int t = 0; t < s.bounds.samples; ++t) {
        int n = static_cast<int>(rng.next_range(0, 3));
        std::vector<FreeLieElt> factors;
        for (int k = 0; k < n; ++k) factors.push_back(random_generator(1, 1));
        FreeLieElt g = random_generator(1, 1);
        auto [w, kappa] = SymWord::make(s.chart, std::move(factors));
        if (kappa == 0) continue;
        PolyDiffOp lhs = r1_lhs(w, g);
        PolyDiffOp rhs = r1_rhs(w, g);
        if (!(lhs == rhs)) {
            out.status = "fail";
            out.ce = make_ce("r1-diagram", seed, t, {{"word_length", n}}, lhs.str(), rhs.str());
            return out;
        }
    }
    return out;
}

inline Outcome chk_atiyah_closed(const Scene& s, std::uint64_t seed) {
    Outcome out;
    auto q = get_q(s, "atiyah-cocycle-closed", seed, out);
    if (!q) return out;
    FreeDgModule T = tangent_module(s.chart, *q);
    Lcg rng(mix_seed(seed, "atiyah-cocycle-closed"));
    std::vector<std::pair<std::string, Connection>> conns;
    for (const auto& [name, c] : s.connections) conns.emplace_back(name, c);
    for (int t = 0; t < s.bounds.samples; ++t) {
        Connection conn = static_cast<std::size_t>(t) < conns.size()
                              ? conns[static_cast<std::size_t>(t)].second
                              : random_connection(rng, T);
        HomCochain alpha = atiyah_cocycle(conn, T, *q);

        // The Christoffel-dependent part of the cocycle is exactly the Hom
        // differential of the connection cochain.
        HomCochain alpha0 = atiyah_cocycle(Connection::flat(T), T, *q);
        HomCochain rel({T, T}, T, 0);
        for (std::size_t i = 0; i < T.rank(); ++i)
            for (std::size_t a = 0; a < T.rank(); ++a)
                rel.component({i, a}) = T.add(alpha.component({i, a}),
                                              T.scale(Rat(-1), alpha0.component({i, a})));
        HomCochain via_psi = hom_differential(connection_cochain(conn, *q), *q);
        if (!(rel == via_psi)) {
            out.status = "fail";
            out.ce = make_ce("atiyah-cocycle-closed", seed, t, nlohmann::json::object(),
                             render_cochain(rel), render_cochain(via_psi));
            return out;
        }
        HomCochain closed = hom_differential(alpha, *q);
        if (!closed.is_zero()) {
            out.status = "fail";
            out.ce = make_ce("atiyah-cocycle-closed", seed, t, nlohmann::json::object(),
                             "L_Q(alpha) = " + render_cochain(closed), "0");
            return out;
        }
    }
    return out;
}

inline Outcome chk_atiyah_independence(const Scene& s, std::uint64_t seed) {
    Outcome out;
    auto q = get_q(s, "atiyah-class-independence", seed, out);
    if (!q) return out;
    FreeDgModule T = tangent_module(s.chart, *q);
    Lcg rng(mix_seed(seed, "atiyah-class-independence"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        Connection c1 = random_connection(rng, T);
        Connection c2 = random_connection(rng, T);
        HomCochain a1 = atiyah_cocycle(c1, T, *q);
        HomCochain a2 = atiyah_cocycle(c2, T, *q);
        HomCochain p1 = connection_cochain(c1, *q);
        HomCochain p2 = connection_cochain(c2, *q);
        HomCochain diff({T, T}, T, -1);
        HomCochain adiff({T, T}, T, 0);
        for (std::size_t i = 0; i < T.rank(); ++i)
            for (std::size_t a = 0; a < T.rank(); ++a) {
                diff.component({i, a}) =
                    T.add(p1.component({i, a}), T.scale(Rat(-1), p2.component({i, a})));
                adiff.component({i, a}) =
                    T.add(a1.component({i, a}), T.scale(Rat(-1), a2.component({i, a})));
            }
        HomCochain coboundary = hom_differential(diff, *q);
        if (!(adiff == coboundary)) {
            out.status = "fail";
            out.ce = make_ce("atiyah-class-independence", seed, t, nlohmann::json::object(),
                             render_cochain(adiff), render_cochain(coboundary));
            return out;
        }
    }
    return out;
}

inline Outcome chk_tensor_cocycle(const Scene& s, std::uint64_t seed) {
    Outcome out;
    auto q = get_q(s, "tensor-cocycle", seed, out);
    if (!q) return out;
    FreeDgModule T = tangent_module(s.chart, *q);
    FreeDgModule T12 = tensor_module(T, T);
    Lcg rng(mix_seed(seed, "tensor-cocycle"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        Connection c1 = random_connection(rng, T);
        Connection c2 = random_connection(rng, T);
        HomCochain a12 = tensor_cocycle(c1, T, c2, T, *q);
        HomCochain a1 = atiyah_cocycle(c1, T, *q);
        HomCochain a2 = atiyah_cocycle(c2, T, *q);
        for (std::size_t i = 0; i < s.chart->size(); ++i) {
            long long shifted = 1 - s.chart->degree(i);
            for (std::size_t a = 0; a < T.rank(); ++a)
                for (std::size_t b = 0; b < T.rank(); ++b) {
                    ModElt lhs = a12.component({i, a * T.rank() + b});
                    ModElt rhs = tensor_elt(T, T, T12, a1.component({i, a}), T.basis_elt(b));
                    ModElt second = tensor_elt(T, T, T12, T.basis_elt(a), a2.component({i, b}));
                    rhs = T12.add(std::move(rhs),
                                  T12.scale(sign_pow(shifted * T.degree(a)), std::move(second)));
                    if (!(lhs == rhs)) {
                        out.status = "fail";
                        out.ce = make_ce(
                            "tensor-cocycle", seed, t,
                            {{"coordinate", i}, {"basis", {a, b}}}, render_elt(lhs),
                            render_elt(rhs));
                        return out;
                    }
                }
        }
    }
    return out;
}

inline Outcome chk_functoriality(const Scene& s, std::uint64_t seed) {
    Outcome out;
    auto q = get_q(s, "functoriality-homotopy", seed, out);
    if (!q) return out;
    FreeDgModule T = tangent_module(s.chart, *q);
    Lcg rng(mix_seed(seed, "functoriality-homotopy"));
    for (int t = 0; t < s.bounds.samples; ++t) {
        Connection c1 = random_connection(rng, T);
        Connection c2 = random_connection(rng, T);
        Rat lambda = random_rat(rng);
        HomCochain phi({T}, T, 0);
        for (std::size_t a = 0; a < T.rank(); ++a)
            phi.component({a}) = T.scale(lambda, T.basis_elt(a));
        auto [lhs, rhs] = functoriality_homotopy(phi, c1, c2, *q);
        if (!(lhs == rhs)) {
            out.status = "fail";
            out.ce = make_ce("functoriality-homotopy", seed, t,
                             {{"lambda", lambda.str()}}, render_cochain(lhs),
                             render_cochain(rhs));
            return out;
        }
    }
    return out;
}

inline Outcome chk_prop_bracket(const Scene& s, std::uint64_t seed) {
    Outcome out;
    auto q = get_q(s, "prop-bracket", seed, out);
    if (!q) return out;
    Lcg rng(mix_seed(seed, "prop-bracket"));
    const std::size_t n = s.chart->size();
    for (int t = 0; t < s.bounds.samples; ++t) {
        VectorField X = random_homogeneous_field(
            rng, s.chart, static_cast<Degree>(rng.next_range(-1, 2)), 2);
        if (!X.degree()) continue;
        std::vector<std::vector<DiffOp>> words;
        for (std::size_t i = 0; i < n; ++i) words.push_back({DiffOp::partial_op(s.chart, i)});
        std::size_t i = static_cast<std::size_t>(rng.next_range(0, static_cast<long long>(n) - 1));
        std::size_t j = static_cast<std::size_t>(rng.next_range(0, static_cast<long long>(n) - 1));
        words.push_back({DiffOp::partial_op(s.chart, i), DiffOp::partial_op(s.chart, j)});
        for (const auto& Ds : words) {
            if (!check_prop_bracket(X, Ds, *q)) {
                PolyDiffOp P = from_word(s.chart, Ds);
                PolyDiffOp lhs = canonical_atiyah(X, P, *q);
                PolyDiffOp rhs =
                    canonical_bracket(PolyDiffOp::from_diffop(X.to_diffop()), P);
                nlohmann::json input;
                input["X"] = render_field(X);
                for (const auto& d : Ds) input["word"].push_back(d.str());
                out.status = "fail";
                out.ce = make_ce("prop-bracket", seed, t, std::move(input), lhs.str(),
                                 rhs.str());
                return out;
            }
        }
    }
    return out;
}

inline Outcome chk_liepair_suite(const Scene& s, std::uint64_t seed) {
    Outcome out;
    if (!s.lie_pair) {
        out.status = "skipped";
        return out;
    }
    const LiePairPtr& pair = *s.lie_pair;
    Lcg rng(mix_seed(seed, "liepair-suite"));
    auto random_u = [&](int max_len) {
        UEnvElt u(pair);
        int terms = static_cast<int>(rng.next_range(1, 3));
        for (int t = 0; t < terms; ++t) {
            int len = static_cast<int>(rng.next_range(0, max_len));
            std::vector<std::size_t> w;
            for (int k = 0; k < len; ++k)
                w.push_back(static_cast<std::size_t>(
                    rng.next_range(0, static_cast<long long>(pair->dim_g()) - 1)));
            u += Rat(rng.next_range(-3, 3), rng.next_range(1, 2)) *
                 UEnvElt::from_word(pair, w);
        }
        return u;
    };
    auto random_dp = [&](int arity) {
        DpolyB d(pair);
        int terms = static_cast<int>(rng.next_range(1, 2));
        for (int t = 0; t < terms; ++t) {
            std::vector<std::vector<int>> tuple;
            for (int k = 0; k < arity; ++k) {
                std::vector<int> mono(pair->dim_b(), 0);
                for (std::size_t b = 0; b < pair->dim_b(); ++b)
                    mono[b] = static_cast<int>(rng.next_range(0, 2));
                tuple.push_back(std::move(mono));
            }
            d.add(std::move(tuple), Rat(rng.next_range(-3, 3), rng.next_range(1, 2)));
        }
        return d;
    };
    for (int t = 0; t < s.bounds.samples; ++t) {
        // PBW confluence on a random word.
        int len = static_cast<int>(rng.next_range(0, 4));
        std::vector<std::size_t> w;
        for (int k = 0; k < len; ++k)
            w.push_back(static_cast<std::size_t>(
                rng.next_range(0, static_cast<long long>(pair->dim_g()) - 1)));
        UEnvElt l = UEnvElt::from_word(pair, w, StraightenOrder::leftmost);
        UEnvElt r = UEnvElt::from_word(pair, w, StraightenOrder::rightmost);
        if (!(l == r)) {
            nlohmann::json input;
            for (std::size_t g : w) input["word"].push_back(g);
            out.status = "fail";
            out.ce = make_ce("liepair-suite", seed, t, std::move(input), render_uelt(l),
                             render_uelt(r));
            return out;
        }

        // Quotient linearity over h and death of right h-multiples.
        UEnvElt v = random_u(3);
        std::size_t a = static_cast<std::size_t>(
            rng.next_range(0, static_cast<long long>(pair->dim_h()) - 1));
        DpolyB lin_l = left_action(a, quotient_to_DpolyB(v));
        DpolyB lin_r = quotient_to_DpolyB(UEnvElt::generator(pair, a) * v);
        if (!(lin_l == lin_r)) {
            out.status = "fail";
            out.ce = make_ce("liepair-suite", seed, t, {{"v", render_uelt(v)}, {"a", a}},
                             render_dpoly(lin_l), render_dpoly(lin_r));
            return out;
        }
        DpolyB dead = quotient_to_DpolyB(v * UEnvElt::generator(pair, a));
        if (!dead.is_zero()) {
            out.status = "fail";
            out.ce = make_ce("liepair-suite", seed, t, {{"v", render_uelt(v)}, {"a", a}},
                             "[v e_a] = " + render_dpoly(dead), "0");
            return out;
        }

        // d_H^2 = 0 and equivariance on the quotient complex.
        DpolyB x = random_dp(static_cast<int>(rng.next_range(1, 2)));
        DpolyB dd = hochschild_d_B(hochschild_d_B(x));
        if (!dd.is_zero()) {
            out.status = "fail";
            out.ce = make_ce("liepair-suite", seed, t, {{"x", render_dpoly(x)}},
                             "d_H(d_H(x)) = " + render_dpoly(dd), "0");
            return out;
        }
        DpolyB eq_l = hochschild_d_B(left_action(a, x));
        DpolyB eq_r = left_action(a, hochschild_d_B(x));
        if (!(eq_l == eq_r)) {
            out.status = "fail";
            out.ce = make_ce("liepair-suite", seed, t, {{"x", render_dpoly(x)}, {"a", a}},
                             render_dpoly(eq_l), render_dpoly(eq_r));
            return out;
        }

        // Bott lift independence.
        Splitting std_j = Splitting::standard(*pair);
        Splitting other = std_j;
        for (auto& row : other.h_correction)
            for (auto& e : row) e = Rat(rng.next_range(-2, 2));
        BVec ah(pair->dim_h()), bv(pair->dim_b());
        for (auto& e : ah) e = Rat(rng.next_range(-2, 2));
        for (auto& e : bv) e = Rat(rng.next_range(-2, 2));
        BVec bott1 = bott_connection(*pair, ah, bv, std_j);
        BVec bott2 = bott_connection(*pair, ah, bv, other);
        if (!(bott1 == bott2)) {
            out.status = "fail";
            out.ce = make_ce("liepair-suite", seed, t, nlohmann::json::object(),
                             "Bott via standard lift", "Bott via corrected lift");
            return out;
        }

        // Closedness of the pair's Atiyah cocycle for a random extension of
        // the Bott action and a random splitting.
        LPConnection conn;
        for (std::size_t k = 0; k < pair->dim_g(); ++k) {
            if (k < pair->dim_h())
                conn.full.push_back(bott_matrix(*pair, k));
            else {
                BMat m(pair->dim_b(), BVec(pair->dim_b(), Rat(0)));
                for (auto& row : m)
                    for (auto& e : row) e = Rat(rng.next_range(-3, 3), rng.next_range(1, 2));
                conn.full.push_back(std::move(m));
            }
        }
        CECochain alpha = lie_pair_atiyah_cocycle(*pair, conn, other);
        CECochain dalpha = ce_differential(alpha, *pair, atiyah_value_action(*pair));
        if (!dalpha.is_zero()) {
            out.status = "fail";
            out.ce = make_ce("liepair-suite", seed, t, nlohmann::json::object(),
                             "d_CE(alpha) != 0", "0");
            return out;
        }
    }
    return out;
}

}  // namespace checks_detail

/// Stable registry of named checks.
inline const std::vector<std::pair<std::string, checks_detail::CheckBody>>& check_registry() {
    using namespace checks_detail;
    static const std::vector<std::pair<std::string, CheckBody>> reg = {
        {"homological", chk_homological},
        {"hochschild-square", chk_hochschild_square},
        {"dh-vs-bracket", chk_dh_vs_bracket},
        {"dh-lq-anticommute", chk_dh_lq_anticommute},
        {"leibniz-cup", chk_leibniz_cup},
        {"jacobi-gerstenhaber", chk_jacobi_gerstenhaber},
        {"delta-defining", chk_delta_defining},
        {"delta-appendix", chk_delta_appendix},
        {"hopf-axioms", chk_hopf_axioms},
        {"pbw-hkr-decomposition", chk_pbw_hkr},
        {"theta-membership", chk_theta_membership},
        {"r1-diagram", chk_r1_diagram},
        {"atiyah-cocycle-closed", chk_atiyah_closed},
        {"atiyah-class-independence", chk_atiyah_independence},
        {"tensor-cocycle", chk_tensor_cocycle},
        {"functoriality-homotopy", chk_functoriality},
        {"prop-bracket", chk_prop_bracket},
        {"liepair-suite", chk_liepair_suite},
    };
    return reg;
}

inline std::vector<std::string> list_checks() {
    std::vector<std::string> out;
    for (const auto& [name, fn] : check_registry()) out.push_back(name);
    return out;
}

/// Runs one named check; throws UnknownCheckError listing the registry.
inline CheckResult run_check(const std::string& name, const Scene& scene, std::uint64_t seed) {
    for (const auto& [n, fn] : check_registry()) {
        if (n != name) continue;
        auto start = std::chrono::steady_clock::now();
        checks_detail::Outcome o = fn(scene, seed);
        auto stop = std::chrono::steady_clock::now();
        CheckResult r;
        r.name = name;
        r.status = o.status;
        r.counterexample = o.status == "fail" ? o.ce : nlohmann::json(nullptr);
        r.millis = std::chrono::duration<double, std::milli>(stop - start).count();
        return r;
    }
    std::string msg = "unknown check '" + name + "'; available checks:";
    for (const auto& n : list_checks()) msg += " " + n;
    throw UnknownCheckError(msg);
}

/// Runs the scene's checks (the full registry when none are listed).
inline std::vector<CheckResult> run_scene_checks(const Scene& scene, std::uint64_t seed) {
    std::vector<std::string> names = scene.checks.empty() ? list_checks() : scene.checks;
    std::vector<CheckResult> out;
    for (const auto& n : names) out.push_back(run_check(n, scene, seed));
    return out;
}

}  // namespace dgatlas
