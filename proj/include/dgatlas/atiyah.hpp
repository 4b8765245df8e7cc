#pragma once

// Free dg modules over a chart with a homological vector field, smooth
// connections given by Christoffel data, the first-jet sequence, Atiyah
// cocycles and their identities, and the canonical connection on tensor
// words of differential operators.

#include "dgatlas/free_lie.hpp"
#include "dgatlas/polydiff.hpp"

#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace dgatlas {

// ---------------------------------------------------------------------------
// Free dg modules

/// An element of a free module: left polynomial coefficients per basis slot.
struct ModElt {
    std::vector<Poly> c;

    friend bool operator==(const ModElt& a, const ModElt& b) { return a.c == b.c; }
    bool is_zero() const {
        for (const auto& p : c)
            if (!p.is_zero()) return false;
        return true;
    }
};

/// A free graded module with a fixed homogeneous basis and a differential
/// recorded on the basis; the differential extends to all elements by
/// L_Q(f xi) = Q(f) xi + (-1)^{~f} f L_Q(xi).
class FreeDgModule {
public:
    FreeDgModule(ChartPtr chart, std::vector<std::pair<std::string, Degree>> basis)
        : chart_(std::move(chart)), basis_(std::move(basis)) {
        dmat_.assign(basis_.size(), std::vector<Poly>(basis_.size(), Poly::zero(chart_)));
    }

    const ChartPtr& chart() const { return chart_; }
    std::size_t rank() const { return basis_.size(); }
    const std::string& name(std::size_t a) const { return basis_[a].first; }
    Degree degree(std::size_t a) const { return basis_[a].second; }

    /// Sets the coefficient of e_b in L_Q(e_a).
    void set_differential(std::size_t b, std::size_t a, Poly p) { dmat_[b][a] = std::move(p); }
    const Poly& differential(std::size_t b, std::size_t a) const { return dmat_[b][a]; }

    ModElt zero_elt() const { return ModElt{std::vector<Poly>(rank(), Poly::zero(chart_))}; }
    ModElt basis_elt(std::size_t a) const {
        ModElt e = zero_elt();
        e.c[a] = Poly::constant(chart_, 1);
        return e;
    }

    ModElt add(ModElt x, const ModElt& y) const {
        for (std::size_t b = 0; b < rank(); ++b) x.c[b] += y.c[b];
        return x;
    }
    ModElt scale(const Rat& s, ModElt x) const {
        for (auto& p : x.c) p *= s;
        return x;
    }
    /// Left multiplication by a function.
    ModElt times(const Poly& f, ModElt x) const {
        for (auto& p : x.c) p = poly_mul(f, p);
        return x;
    }

    /// The module differential on a general element.
    ModElt lq(const HomologicalField& Q, const ModElt& x) const {
        ModElt out = zero_elt();
        for (std::size_t a = 0; a < rank(); ++a) {
            out.c[a] += Q.apply(x.c[a]);
            for (const auto& [df, f] : x.c[a].homogeneous_parts())
                for (std::size_t b = 0; b < rank(); ++b)
                    out.c[b] += sign_pow(df) * poly_mul(f, dmat_[b][a]);
        }
        return out;
    }

private:
    ChartPtr chart_;
    std::vector<std::pair<std::string, Degree>> basis_;
    std::vector<std::vector<Poly>> dmat_;  // dmat_[b][a]: e_b-coefficient of L_Q(e_a)
};

/// The stored differential squares to zero on every basis element and has
/// degree +1 relative to the basis grading.
inline bool check_dg_module(const FreeDgModule& N, const HomologicalField& Q) {
    for (std::size_t a = 0; a < N.rank(); ++a) {
        if (!N.lq(Q, N.lq(Q, N.basis_elt(a))).is_zero()) return false;
        for (std::size_t b = 0; b < N.rank(); ++b) {
            auto d = N.differential(b, a).degree();
            if (d && *d + N.degree(b) != N.degree(a) + 1) return false;
        }
    }
    return true;
}

/// The shifted tangent module: basis partial-derivative fields with degrees
/// raised by one, differential induced by the bracket with Q.
inline FreeDgModule tangent_module(const ChartPtr& chart, const HomologicalField& Q) {
    std::vector<std::pair<std::string, Degree>> basis;
    for (std::size_t i = 0; i < chart->size(); ++i)
        basis.emplace_back("d_" + chart->name(i), 1 - chart->degree(i));
    FreeDgModule T(chart, std::move(basis));
    for (std::size_t i = 0; i < chart->size(); ++i) {
        VectorField coord(chart);
        coord.set_component(i, Poly::constant(chart, 1));
        VectorField br = lie_bracket(Q.field(), coord);
        for (std::size_t b = 0; b < chart->size(); ++b) T.set_differential(b, i, br.component(b));
    }
    return T;
}

inline ModElt field_to_elt(const FreeDgModule& T, const VectorField& X) {
    ModElt e = T.zero_elt();
    for (std::size_t i = 0; i < T.rank(); ++i) e.c[i] = X.component(i);
    return e;
}

inline VectorField elt_to_field(const ModElt& e, const ChartPtr& chart) {
    VectorField X(chart);
    for (std::size_t i = 0; i < e.c.size(); ++i) X.set_component(i, e.c[i]);
    return X;
}

// ---------------------------------------------------------------------------
// Connections

/// A smooth connection stored by Christoffel data on coordinate fields:
/// gamma[i][a] = nabla_{d_i} e_a.
struct Connection {
    FreeDgModule module;
    std::vector<std::vector<ModElt>> gamma;

    static Connection flat(const FreeDgModule& N) {
        Connection c{N, {}};
        c.gamma.assign(N.chart()->size(), std::vector<ModElt>(N.rank(), N.zero_elt()));
        return c;
    }
};

/// nabla_X xi by the two defining rules: tensorial in X, Leibniz over the
/// coefficients of xi.
inline ModElt nabla(const Connection& conn, const VectorField& X, const ModElt& xi) {
    const FreeDgModule& N = conn.module;
    const ChartPtr& chart = N.chart();
    ModElt out = N.zero_elt();
    for (std::size_t a = 0; a < N.rank(); ++a) {
        const Poly& f = xi.c[a];
        if (f.is_zero()) continue;
        out.c[a] += X.apply(f);
        // (-1)^{~f ~X} f X^i gamma[i][a], over homogeneous parts of f and X.
        for (std::size_t i = 0; i < chart->size(); ++i) {
            if (conn.gamma[i][a].is_zero()) continue;
            for (const auto& [m, coef] : X.component(i).terms()) {
                long long xdeg = m.degree(*chart) - chart->degree(i);  // field degree
                Poly part = Poly::monomial(chart, m, coef);
                for (const auto& [df, fp] : f.homogeneous_parts()) {
                    Rat s = sign_pow(static_cast<long long>(df) * xdeg);
                    ModElt g = N.times(poly_mul(fp, part), conn.gamma[i][a]);
                    out = N.add(std::move(out), N.scale(s, std::move(g)));
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Hom cochains

/// A C-infinity-multilinear map between free modules, recorded on basis
/// tuples.  Coefficients cross the map and earlier inputs with the Koszul
/// sign of the map's degree and the basis degrees.
class HomCochain {
public:
    HomCochain(std::vector<FreeDgModule> inputs, FreeDgModule output, Degree degree)
        : inputs_(std::move(inputs)), output_(std::move(output)), degree_(degree) {
        std::size_t total = 1;
        for (const auto& m : inputs_) total *= m.rank();
        components_.assign(total, output_.zero_elt());
    }

    const std::vector<FreeDgModule>& inputs() const { return inputs_; }
    const FreeDgModule& output() const { return output_; }
    Degree degree() const { return degree_; }

    std::size_t flat_index(const std::vector<std::size_t>& idx) const {
        std::size_t f = 0;
        for (std::size_t j = 0; j < inputs_.size(); ++j) f = f * inputs_[j].rank() + idx[j];
        return f;
    }

    ModElt& component(const std::vector<std::size_t>& idx) { return components_[flat_index(idx)]; }
    const ModElt& component(const std::vector<std::size_t>& idx) const {
        return components_[flat_index(idx)];
    }

    bool is_zero() const {
        for (const auto& e : components_)
            if (!e.is_zero()) return false;
        return true;
    }

    friend bool operator==(const HomCochain& a, const HomCochain& b) {
        return a.degree_ == b.degree_ && a.components_ == b.components_;
    }

private:
    std::vector<FreeDgModule> inputs_;
    FreeDgModule output_;
    Degree degree_;
    std::vector<ModElt> components_;
};

/// Multilinear evaluation: each input coefficient is pulled out to the left
/// across the map and the earlier basis slots.
inline ModElt eval(const HomCochain& phi, const std::vector<ModElt>& args) {
    const FreeDgModule& out_mod = phi.output();
    if (args.size() != phi.inputs().size())
        throw std::invalid_argument("cochain arity mismatch");
    ModElt out = out_mod.zero_elt();
    std::vector<std::size_t> idx(args.size(), 0);
    // Recursive descent over basis tuples, accumulating the coefficient
    // product and the crossing sign.
    std::function<void(std::size_t, Poly, long long)> go = [&](std::size_t j, Poly coeff,
                                                               long long crossed) {
        if (j == args.size()) {
            out = out_mod.add(std::move(out), out_mod.times(coeff, phi.component(idx)));
            return;
        }
        const FreeDgModule& mod = phi.inputs()[j];
        for (std::size_t a = 0; a < mod.rank(); ++a) {
            const Poly& f = args[j].c[a];
            if (f.is_zero()) continue;
            idx[j] = a;
            for (const auto& [df, fp] : f.homogeneous_parts()) {
                Rat s = sign_pow(static_cast<long long>(df) * ((phi.degree() + crossed) % 2));
                go(j + 1, poly_mul(coeff, fp) * s, crossed + mod.degree(a));
            }
        }
    };
    go(0, Poly::constant(out_mod.chart(), 1), 0);
    return out;
}

/// The Hom-complex differential
///   L_Q(phi)(x_1,..,x_k) = L_Q(phi(x..))
///     - (-1)^{deg phi} sum_j (-1)^{|x_1|+..+|x_{j-1}|} phi(.., L_Q x_j, ..).
inline HomCochain hom_differential(const HomCochain& phi, const HomologicalField& Q) {
    HomCochain out(phi.inputs(), phi.output(), phi.degree() + 1);
    std::vector<std::size_t> idx(phi.inputs().size(), 0);
    std::function<void(std::size_t)> go = [&](std::size_t j) {
        if (j == idx.size()) {
            ModElt acc = phi.output().lq(Q, phi.component(idx));
            long long before = 0;
            for (std::size_t slot = 0; slot < idx.size(); ++slot) {
                std::vector<ModElt> args;
                for (std::size_t l = 0; l < idx.size(); ++l)
                    args.push_back(l == slot
                                       ? phi.inputs()[l].lq(Q, phi.inputs()[l].basis_elt(idx[l]))
                                       : phi.inputs()[l].basis_elt(idx[l]));
                Rat s = -sign_pow(phi.degree() + before);
                acc = phi.output().add(std::move(acc),
                                       phi.output().scale(s, eval(phi, args)));
                before += phi.inputs()[slot].degree(idx[slot]);
            }
            out.component(idx) = std::move(acc);
            return;
        }
        for (std::size_t a = 0; a < phi.inputs()[j].rank(); ++a) {
            idx[j] = a;
            go(j + 1);
        }
    };
    go(0);
    return out;
}

/// The connection as a degree -1 cochain on the shifted tangent module:
/// psi(X-bar, xi) = (-1)^{~X} nabla_X xi.  Its Hom differential is the
/// Atiyah cocycle.
inline HomCochain connection_cochain(const Connection& conn, const HomologicalField& Q) {
    const ChartPtr& chart = conn.module.chart();
    HomCochain psi({tangent_module(chart, Q), conn.module}, conn.module, -1);
    for (std::size_t i = 0; i < chart->size(); ++i)
        for (std::size_t a = 0; a < conn.module.rank(); ++a)
            psi.component({i, a}) =
                conn.module.scale(sign_pow(chart->degree(i)), conn.gamma[i][a]);
    return psi;
}

/// The Atiyah cocycle by the explicit shifted-domain formula
///   alpha(X-bar, xi)
///     = (-1)^{~X} (L_Q(nabla_X xi) - nabla_{[Q,X]} xi
///                  - (-1)^{~X} nabla_X L_Q(xi)).
inline HomCochain atiyah_cocycle(const Connection& conn, const FreeDgModule& N,
                                 const HomologicalField& Q) {
    const ChartPtr& chart = N.chart();
    HomCochain alpha({tangent_module(chart, Q), N}, N, 0);
    for (std::size_t i = 0; i < chart->size(); ++i) {
        VectorField coord(chart);
        coord.set_component(i, Poly::constant(chart, 1));
        VectorField qx = lie_bracket(Q.field(), coord);
        long long xdeg = -chart->degree(i);
        for (std::size_t a = 0; a < N.rank(); ++a) {
            ModElt t1 = N.lq(Q, conn.gamma[i][a]);
            ModElt t2 = nabla(conn, qx, N.basis_elt(a));
            ModElt t3 = nabla(conn, coord, N.lq(Q, N.basis_elt(a)));
            ModElt acc = N.scale(sign_pow(xdeg), N.add(t1, N.scale(Rat(-1), t2)));
            alpha.component({i, a}) = N.add(std::move(acc), N.scale(Rat(-1), std::move(t3)));
        }
    }
    return alpha;
}

// ---------------------------------------------------------------------------
// The jet sequence

/// The three free modules of the first-jet sequence of N together with the
/// inclusion i and projection j, stored as 1-input cochains.  The middle
/// module (order <= 1 operators tensor N) lists the X-block basis first and
/// the N-block last.
struct JetExtension {
    FreeDgModule n;
    FreeDgModule middle;
    FreeDgModule x_tensor_n;
    HomCochain incl;  // n -> middle
    HomCochain proj;  // middle -> x_tensor_n
};

inline JetExtension jet_extension(const FreeDgModule& N, const HomologicalField& Q) {
    const ChartPtr& chart = N.chart();
    FreeDgModule T = tangent_module(chart, Q);
    std::size_t nc = chart->size(), nr = N.rank();

    std::vector<std::pair<std::string, Degree>> xb, mb;
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t a = 0; a < nr; ++a) {
            // Unshifted tangent degrees: deg(d_i (x) e_a) = -deg(x_i) + deg(e_a).
            Degree d = -chart->degree(i) + N.degree(a);
            xb.emplace_back(T.name(i) + "(x)" + N.name(a), d);
        }
    FreeDgModule XN(chart, xb);
    mb = xb;
    for (std::size_t a = 0; a < nr; ++a) mb.emplace_back(N.name(a), N.degree(a));
    FreeDgModule Mid(chart, mb);

    // Differentials: on the X-block, L_Q(D (x) xi) = [Q,D] (x) xi
    // + (-1)^{~D} D (x) L_Q(xi); on the N-block the differential of N.
    auto xidx = [&](std::size_t i, std::size_t a) { return i * nr + a; };
    for (std::size_t i = 0; i < nc; ++i) {
        VectorField coord(chart);
        coord.set_component(i, Poly::constant(chart, 1));
        VectorField qd = lie_bracket(Q.field(), coord);
        for (std::size_t a = 0; a < nr; ++a) {
            for (std::size_t k = 0; k < nc; ++k) {
                // [Q, d_i] = sum_k g^k d_k: the coefficient g^k crosses
                // nothing (it is already leftmost).
                XN.set_differential(xidx(k, a), xidx(i, a), qd.component(k));
                Mid.set_differential(xidx(k, a), xidx(i, a), qd.component(k));
            }
            long long ddeg = -chart->degree(i);
            for (std::size_t b = 0; b < nr; ++b) {
                // (-1)^{~D} d_i (x) L_Q(e_a): the coefficient of L_Q(e_a)
                // crosses d_i.
                Poly term(chart);
                for (const auto& [dg, p] : N.differential(b, a).homogeneous_parts())
                    term += sign_pow(ddeg + static_cast<long long>(dg) * ddeg) * p;
                XN.set_differential(xidx(i, b), xidx(i, a), term);
                Mid.set_differential(xidx(i, b), xidx(i, a), term);
            }
        }
    }
    for (std::size_t a = 0; a < nr; ++a)
        for (std::size_t b = 0; b < nr; ++b)
            Mid.set_differential(nc * nr + b, nc * nr + a, N.differential(b, a));

    HomCochain incl({N}, Mid, 0), proj({Mid}, XN, 0);
    for (std::size_t a = 0; a < nr; ++a) incl.component({a}) = Mid.basis_elt(nc * nr + a);
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t a = 0; a < nr; ++a)
            proj.component({xidx(i, a)}) = XN.basis_elt(xidx(i, a));
    return JetExtension{N, std::move(Mid), std::move(XN), std::move(incl), std::move(proj)};
}

/// The splitting s(X (x) xi) = X (x) xi - nabla_X xi of the jet sequence.
inline HomCochain splitting_from_connection(const Connection& conn, const JetExtension& jet) {
    const ChartPtr& chart = conn.module.chart();
    std::size_t nc = chart->size(), nr = conn.module.rank();
    HomCochain s({jet.x_tensor_n}, jet.middle, 0);
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t a = 0; a < nr; ++a) {
            ModElt e = jet.middle.basis_elt(i * nr + a);
            const ModElt& g = conn.gamma[i][a];
            for (std::size_t b = 0; b < nr; ++b) e.c[nc * nr + b] -= g.c[b];
            s.component({i * nr + a}) = std::move(e);
        }
    return s;
}

/// Recovers the Christoffel data from a splitting.
inline Connection connection_from_splitting(const HomCochain& s, const FreeDgModule& N) {
    const ChartPtr& chart = N.chart();
    std::size_t nc = chart->size(), nr = N.rank();
    Connection conn = Connection::flat(N);
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t a = 0; a < nr; ++a) {
            const ModElt& v = s.component({i * nr + a});
            for (std::size_t b = 0; b < nr; ++b) conn.gamma[i][a].c[b] = -v.c[nc * nr + b];
        }
    return conn;
}

// ---------------------------------------------------------------------------
// Tensor products of modules and connections

inline FreeDgModule tensor_module(const FreeDgModule& N1, const FreeDgModule& N2) {
    const ChartPtr& chart = N1.chart();
    std::vector<std::pair<std::string, Degree>> basis;
    for (std::size_t a = 0; a < N1.rank(); ++a)
        for (std::size_t b = 0; b < N2.rank(); ++b)
            basis.emplace_back(N1.name(a) + "(x)" + N2.name(b), N1.degree(a) + N2.degree(b));
    FreeDgModule T(chart, std::move(basis));
    auto idx = [&](std::size_t a, std::size_t b) { return a * N2.rank() + b; };
    for (std::size_t a = 0; a < N1.rank(); ++a)
        for (std::size_t b = 0; b < N2.rank(); ++b) {
            for (std::size_t c = 0; c < N1.rank(); ++c)
                T.set_differential(idx(c, b), idx(a, b), N1.differential(c, a));
            for (std::size_t d = 0; d < N2.rank(); ++d) {
                Poly term(chart);
                for (const auto& [dg, p] : N2.differential(d, b).homogeneous_parts())
                    term += sign_pow(N1.degree(a) * (1 + static_cast<long long>(dg))) * p;
                T.set_differential(idx(a, d), idx(a, b),
                                   T.differential(idx(a, d), idx(a, b)) + term);
            }
        }
    return T;
}

/// (f e_a) (x) (g f_b) = (-1)^{~g ~e_a} f g (e_a (x) f_b).
inline ModElt tensor_elt(const FreeDgModule& N1, const FreeDgModule& N2, const FreeDgModule& T,
                         const ModElt& x1, const ModElt& x2) {
    ModElt out = T.zero_elt();
    for (std::size_t a = 0; a < N1.rank(); ++a) {
        if (x1.c[a].is_zero()) continue;
        for (std::size_t b = 0; b < N2.rank(); ++b) {
            if (x2.c[b].is_zero()) continue;
            for (const auto& [dg, g] : x2.c[b].homogeneous_parts())
                out.c[a * N2.rank() + b] +=
                    sign_pow(static_cast<long long>(dg) * N1.degree(a)) *
                    poly_mul(x1.c[a], g);
        }
    }
    return out;
}

/// The Leibniz connection on a tensor product of modules.
inline Connection tensor_connection(const Connection& c1, const Connection& c2,
                                    const FreeDgModule& T) {
    const FreeDgModule& N1 = c1.module;
    const FreeDgModule& N2 = c2.module;
    const ChartPtr& chart = N1.chart();
    Connection conn{T, {}};
    conn.gamma.assign(chart->size(), std::vector<ModElt>(T.rank(), T.zero_elt()));
    for (std::size_t i = 0; i < chart->size(); ++i) {
        long long xdeg = -chart->degree(i);
        for (std::size_t a = 0; a < N1.rank(); ++a)
            for (std::size_t b = 0; b < N2.rank(); ++b) {
                ModElt t = tensor_elt(N1, N2, T, c1.gamma[i][a], N2.basis_elt(b));
                ModElt u = tensor_elt(N1, N2, T, N1.basis_elt(a), c2.gamma[i][b]);
                u = T.scale(sign_pow(xdeg * N1.degree(a)), std::move(u));
                conn.gamma[i][a * N2.rank() + b] = T.add(std::move(t), std::move(u));
            }
    }
    return conn;
}

/// The Atiyah cocycle of the Leibniz connection on N1 (x) N2.
inline HomCochain tensor_cocycle(const Connection& c1, const FreeDgModule& N1,
                                 const Connection& c2, const FreeDgModule& N2,
                                 const HomologicalField& Q) {
    FreeDgModule T = tensor_module(N1, N2);
    Connection conn = tensor_connection(c1, c2, T);
    return atiyah_cocycle(conn, T, Q);
}

// ---------------------------------------------------------------------------
// Functoriality

/// For a dg-module morphism phi : N1 -> N2, returns the two sides of the
/// homotopy identity
///   phi o alpha_1 - alpha_2 o (id (x) phi)
///     = L_Q(phi o nabla_1 - nabla_2 o (id (x) phi)).
inline std::pair<HomCochain, HomCochain> functoriality_homotopy(const HomCochain& phi,
                                                                const Connection& c1,
                                                                const Connection& c2,
                                                                const HomologicalField& Q) {
    const FreeDgModule& N1 = c1.module;
    const FreeDgModule& N2 = c2.module;
    for (std::size_t a = 0; a < N1.rank(); ++a)
        if (!(N2.lq(Q, phi.component({a})) == eval(phi, {N1.lq(Q, N1.basis_elt(a))})))
            throw std::invalid_argument("morphism does not commute with the differentials");

    HomCochain a1 = atiyah_cocycle(c1, N1, Q);
    HomCochain a2 = atiyah_cocycle(c2, N2, Q);
    HomCochain p1 = connection_cochain(c1, Q);
    HomCochain p2 = connection_cochain(c2, Q);
    const ChartPtr& chart = N1.chart();
    FreeDgModule T = tangent_module(chart, Q);

    HomCochain lhs({T, N1}, N2, 0), mid({T, N1}, N2, -1);
    for (std::size_t i = 0; i < chart->size(); ++i)
        for (std::size_t a = 0; a < N1.rank(); ++a) {
            ModElt la = eval(phi, {a1.component({i, a})});
            ModElt lb = eval(a2, {T.basis_elt(i), phi.component({a})});
            lhs.component({i, a}) = N2.add(std::move(la), N2.scale(Rat(-1), std::move(lb)));
            ModElt ma = eval(phi, {p1.component({i, a})});
            ModElt mb = eval(p2, {T.basis_elt(i), phi.component({a})});
            mid.component({i, a}) = N2.add(std::move(ma), N2.scale(Rat(-1), std::move(mb)));
        }
    return {std::move(lhs), hom_differential(mid, Q)};
}

// ---------------------------------------------------------------------------
// The canonical connection on tensor words of operators

/// nabla^can_X on a word: insert the insertion product X o D_i into each
/// factor with the sign (-1)^{~X sum_{j<i} |D_j|}, extended by the Leibniz
/// rule over left coefficients.
inline PolyDiffOp canonical_connection(const VectorField& X, const PolyDiffOp& D) {
    const ChartPtr& chart = D.chart();
    DiffOp Xop = X.to_diffop();
    PolyDiffOp out(chart);
    for (const auto& [xd, Xpart] : Xop.homogeneous_parts()) {
        PolyDiffOp Xp = PolyDiffOp::from_diffop(Xpart);
        for (const auto& [tup, c] : D.terms()) {
            // Coefficient term: X(c) times the pure word.
            PolyDiffOp word(chart);
            word.add(tup, Poly::constant(chart, 1));
            out += cup(PolyDiffOp::from_function(apply(Xpart, c)), word);
            // Slot terms with the word-prefix sign and the coefficient
            // crossing sign.
            for (const auto& [dc, cp] : c.homogeneous_parts()) {
                long long prefix = 0;
                for (std::size_t i = 0; i < tup.size(); ++i) {
                    DiffOp slot(chart);
                    slot.add_term(Monomial{std::vector<int>(chart->size(), 0)}, tup[i], Rat(1));
                    PolyDiffOp inserted =
                        gerstenhaber_product(Xp, PolyDiffOp::from_diffop(slot));
                    PolyDiffOp w(chart);
                    DerTuple pre(tup.begin(), tup.begin() + static_cast<std::ptrdiff_t>(i));
                    DerTuple post(tup.begin() + static_cast<std::ptrdiff_t>(i) + 1, tup.end());
                    PolyDiffOp left(chart), right(chart);
                    left.add(pre, Poly::constant(chart, 1));
                    right.add(post, Poly::constant(chart, 1));
                    Rat s = sign_pow(static_cast<long long>(xd) *
                                     (static_cast<long long>(dc) + prefix));
                    out += s * cup(cup(cup(PolyDiffOp::from_function(cp), left), inserted),
                                   right);
                    prefix += 1 + tup[i].degree(*chart);
                }
            }
        }
    }
    return out;
}

/// The canonical-connection Atiyah cocycle on the total complex of tensor
/// words: the vertical part from the bracket with Q plus the horizontal part
/// from the Hochschild differential, with the shifted-domain prefactor.
inline PolyDiffOp canonical_atiyah(const VectorField& X, const PolyDiffOp& P,
                                   const HomologicalField& Q) {
    auto xdeg_opt = X.degree();
    if (!xdeg_opt) throw std::invalid_argument("vector field must be homogeneous");
    long long xd = *xdeg_opt;
    VectorField qx = lie_bracket(Q.field(), X);
    PolyDiffOp vert = lie_q(Q, canonical_connection(X, P)) -
                      sign_pow(xd) * canonical_connection(X, lie_q(Q, P)) -
                      canonical_connection(qx, P);
    PolyDiffOp horiz = hochschild_d(canonical_connection(X, P)) -
                       sign_pow(xd) * canonical_connection(X, hochschild_d(P));
    return sign_pow(xd) * (vert + horiz);
}

/// Verifies, for the cup word of the given arity-1 operators, that the
/// canonical-connection Atiyah cocycle on the total complex equals the
/// canonical bracket with X, and (for words of length >= 2) the cup
/// derivation property of the cocycle.
inline bool check_prop_bracket(const VectorField& X, const std::vector<DiffOp>& Ds,
                               const HomologicalField& Q) {
    if (Ds.empty()) throw std::invalid_argument("need at least one operator");
    const ChartPtr& chart = X.chart();
    auto xdeg_opt = X.degree();
    if (!xdeg_opt) throw std::invalid_argument("vector field must be homogeneous");
    long long xd = *xdeg_opt;
    auto alpha = [&](const PolyDiffOp& P) { return canonical_atiyah(X, P, Q); };

    PolyDiffOp P = PolyDiffOp::from_diffop(Ds[0]);
    for (std::size_t k = 1; k < Ds.size(); ++k) P = cup(P, PolyDiffOp::from_diffop(Ds[k]));
    PolyDiffOp Xp = PolyDiffOp::from_diffop(X.to_diffop());
    if (!(alpha(P) == canonical_bracket(Xp, P))) return false;

    if (Ds.size() >= 2) {
        PolyDiffOp P1 = PolyDiffOp::from_diffop(Ds[0]);
        PolyDiffOp P2 = PolyDiffOp::from_diffop(Ds[1]);
        for (std::size_t k = 2; k < Ds.size(); ++k) P2 = cup(P2, PolyDiffOp::from_diffop(Ds[k]));
        PolyDiffOp lhs = alpha(cup(P1, P2));
        PolyDiffOp rhs(chart);
        for (const auto& [kb, part] : P1.bihomogeneous_parts()) {
            long long p1deg = kb.first + kb.second;
            rhs += cup(alpha(part), P2) +
                   sign_pow((xd + 1) * p1deg) * cup(part, alpha(P2));
        }
        if (!(lhs == rhs)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// The lowering map twisted by an Atiyah cocycle

struct OmegaTildeTerm {
    std::vector<VectorField> word;
    VectorField value;
    Rat coeff;
};

/// omega~((X1-bar sym ... sym Xn-bar) (x) X-bar)
///   = sum_i (-1)^{diamond_i} (.. X^_i ..) (x) alpha(Xi-bar, X-bar),
/// diamond_i = (~X_{i+1}+..+~X_n + n-i)(~X_i + 1), with the cocycle standing
/// in for the class representative.
inline std::vector<OmegaTildeTerm> omega_tilde(const std::vector<VectorField>& word,
                                               const VectorField& x, const HomCochain& alpha,
                                               const FreeDgModule& T) {
    std::vector<long long> degs;
    for (const auto& Xi : word) {
        auto d = Xi.degree();
        if (!d) throw std::invalid_argument("word factors must be homogeneous");
        degs.push_back(*d);
    }
    std::vector<OmegaTildeTerm> out;
    const ChartPtr& chart = T.chart();
    for (std::size_t i = 0; i < word.size(); ++i) {
        long long tail = 0;
        for (std::size_t j = i + 1; j < word.size(); ++j) tail += degs[j];
        long long diamond =
            (tail + static_cast<long long>(word.size() - 1 - i)) * (degs[i] + 1);
        std::vector<VectorField> rest;
        for (std::size_t j = 0; j < word.size(); ++j)
            if (j != i) rest.push_back(word[j]);
        ModElt val = eval(alpha, {field_to_elt(T, word[i]), field_to_elt(T, x)});
        out.push_back(OmegaTildeTerm{std::move(rest), elt_to_field(val, chart),
                                     sign_pow(diamond)});
    }
    return out;
}

}  // namespace dgatlas
