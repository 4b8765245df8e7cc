// Free dg modules, connections, the jet sequence, Atiyah cocycles, and the
// canonical connection on tensor words of operators.

#include <catch2/catch_amalgamated.hpp>

#include "dgatlas/atiyah.hpp"
#include "dgatlas/random_gen.hpp"
#include "test_helpers.hpp"

using namespace dgatlas;
using dgatlas::testing::g1_chart;
using dgatlas::testing::g1_q;
using dgatlas::testing::mixed_chart;

namespace {

/// xi d_x on the mixed chart: odd, squares to zero, so homological.
HomologicalField mixed_q() {
    VectorField Q(mixed_chart());
    Q.set_component(0, Poly::coordinate(mixed_chart(), 1));
    return HomologicalField(Q);
}

/// The trivial homological field on a chart.
HomologicalField zero_q(const ChartPtr& chart) { return HomologicalField(VectorField(chart)); }

/// A rank-2 dg module {u: degree 0, v: degree 1} over the mixed chart with
/// L_Q(u) = v, L_Q(v) = 0.
FreeDgModule uv_module() {
    FreeDgModule N(mixed_chart(), {{"u", 0}, {"v", 1}});
    N.set_differential(1, 0, Poly::constant(mixed_chart(), 1));
    return N;
}

Poly random_poly_of_degree(Lcg& rng, const ChartPtr& chart, Degree want) {
    Poly p(chart);
    for (int tries = 0; tries < 10; ++tries) {
        Monomial m = random_monomial(rng, *chart, 3);
        if (m.degree(*chart) == want) p.add_term(m, random_rat(rng));
    }
    return p;
}

/// A random degree-0 connection: every Christoffel entry homogeneous of the
/// degree forced by the coordinate and the two basis elements.
Connection random_connection(Lcg& rng, const FreeDgModule& N) {
    const ChartPtr& chart = N.chart();
    Connection conn = Connection::flat(N);
    for (std::size_t i = 0; i < chart->size(); ++i)
        for (std::size_t a = 0; a < N.rank(); ++a)
            for (std::size_t b = 0; b < N.rank(); ++b)
                conn.gamma[i][a].c[b] = random_poly_of_degree(
                    rng, chart, -chart->degree(i) + N.degree(a) - N.degree(b));
    return conn;
}

VectorField scale_field(const Poly& f, const VectorField& X) {
    VectorField out(X.chart());
    for (std::size_t i = 0; i < X.chart()->size(); ++i)
        out.set_component(i, poly_mul(f, X.component(i)));
    return out;
}

ModElt random_elt(Lcg& rng, const FreeDgModule& N) {
    ModElt e = N.zero_elt();
    for (std::size_t b = 0; b < N.rank(); ++b) e.c[b] = random_poly(rng, N.chart(), 3, 2);
    return e;
}

/// Collapses an arity-1 operator back to a single differential operator.
DiffOp collapse1(const PolyDiffOp& P) {
    DiffOp out(P.chart());
    for (const auto& [tup, c] : P.terms()) {
        REQUIRE(tup.size() == 1);
        for (const auto& [m, r] : c.terms()) out.add_term(m, tup[0], r);
    }
    return out;
}

PolyDiffOp theta_op(const VectorField& X) { return PolyDiffOp::from_diffop(X.to_diffop()); }

}  // namespace

TEST_CASE("dg modules and the shifted tangent module", "[atiyah]") {
    auto chart = g1_chart();
    HomologicalField Q = g1_q();
    FreeDgModule T = tangent_module(chart, Q);

    SECTION("tangent basis degrees are shifted by one") {
        CHECK(T.rank() == 2);
        CHECK(T.degree(0) == 0);
        CHECK(T.degree(1) == 0);
    }

    SECTION("tangent differential is the bracket with Q") {
        // [Q, d_1] = -xi2 d_2 and [Q, d_2] = xi1 d_2 by direct expansion of
        // the graded commutator with Q = -xi1 xi2 d_2.
        CHECK(T.differential(0, 0).is_zero());
        CHECK(render(T.differential(1, 0)) == "-xi2");
        CHECK(T.differential(0, 1).is_zero());
        CHECK(render(T.differential(1, 1)) == "xi1");
        CHECK(check_dg_module(T, Q));
    }

    SECTION("module differential obeys the coefficient Leibniz rule") {
        Lcg rng(101);
        FreeDgModule Tm = tangent_module(mixed_chart(), mixed_q());
        for (int s = 0; s < 30; ++s) {
            ModElt e = random_elt(rng, Tm);
            Poly f = random_poly(rng, mixed_chart(), 3, 2);
            // L_Q(f e) = Q(f) e + (-1)^{~f} f L_Q(e), summed over the
            // homogeneous parts of f.
            ModElt lhs = Tm.lq(mixed_q(), Tm.times(f, e));
            ModElt rhs = Tm.times(mixed_q().apply(f), e);
            for (const auto& [df, fp] : f.homogeneous_parts())
                rhs = Tm.add(std::move(rhs),
                             Tm.scale(sign_pow(df), Tm.times(fp, Tm.lq(mixed_q(), e))));
            CHECK(lhs == rhs);
        }
        CHECK(check_dg_module(Tm, mixed_q()));
        CHECK(check_dg_module(uv_module(), mixed_q()));
    }
}

TEST_CASE("connection axioms", "[atiyah]") {
    auto chart = mixed_chart();
    HomologicalField Q = mixed_q();
    FreeDgModule T = tangent_module(chart, Q);
    Lcg rng(202);
    Connection conn = random_connection(rng, T);

    for (int s = 0; s < 40; ++s) {
        Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
        VectorField X = random_homogeneous_field(rng, chart, xdeg, 3);
        ModElt xi = random_elt(rng, T);
        Poly f = random_poly(rng, chart, 3, 2);

        // nabla_{fX} xi = f nabla_X xi.
        CHECK(nabla(conn, scale_field(f, X), xi) == T.times(f, nabla(conn, X, xi)));

        // nabla_X(f xi) = X(f) xi + (-1)^{~f ~X} f nabla_X xi.
        ModElt rhs = T.times(X.apply(f), xi);
        for (const auto& [df, fp] : f.homogeneous_parts())
            rhs = T.add(std::move(rhs), T.scale(sign_pow(static_cast<long long>(df) * xdeg),
                                                T.times(fp, nabla(conn, X, xi))));
        CHECK(nabla(conn, X, T.times(f, xi)) == rhs);
    }
}

TEST_CASE("jet sequence, splittings, and connections", "[atiyah]") {
    auto chart = mixed_chart();
    HomologicalField Q = mixed_q();
    FreeDgModule N = uv_module();
    JetExtension jet = jet_extension(N, Q);
    std::size_t nc = chart->size(), nr = N.rank();

    SECTION("the three modules are dg and the maps are dg morphisms") {
        CHECK(check_dg_module(jet.middle, Q));
        CHECK(check_dg_module(jet.x_tensor_n, Q));
        for (std::size_t a = 0; a < nr; ++a)
            CHECK(jet.middle.lq(Q, jet.incl.component({a})) ==
                  eval(jet.incl, {N.lq(Q, N.basis_elt(a))}));
        for (std::size_t m = 0; m < jet.middle.rank(); ++m)
            CHECK(jet.x_tensor_n.lq(Q, jet.proj.component({m})) ==
                  eval(jet.proj, {jet.middle.lq(Q, jet.middle.basis_elt(m))}));
    }

    SECTION("inclusion then projection is zero; ends are injective/surjective") {
        for (std::size_t a = 0; a < nr; ++a)
            CHECK(eval(jet.proj, {jet.incl.component({a})}).is_zero());
        // i sends distinct basis elements to distinct basis elements of the
        // trailing block.
        for (std::size_t a = 0; a < nr; ++a)
            CHECK(jet.incl.component({a}) == jet.middle.basis_elt(nc * nr + a));
        // j hits every basis element of the quotient.
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t a = 0; a < nr; ++a)
                CHECK(eval(jet.proj, {jet.middle.basis_elt(i * nr + a)}) ==
                      jet.x_tensor_n.basis_elt(i * nr + a));
    }

    SECTION("the flat connection splits by the identity on the leading block") {
        HomCochain s = splitting_from_connection(Connection::flat(N), jet);
        for (std::size_t m = 0; m < jet.x_tensor_n.rank(); ++m)
            CHECK(s.component({m}) == jet.middle.basis_elt(m));
    }

    SECTION("splittings and connections are inverse to each other") {
        Lcg rng(303);
        Connection conn = random_connection(rng, N);
        HomCochain s = splitting_from_connection(conn, jet);
        // j o s = id.
        for (std::size_t m = 0; m < jet.x_tensor_n.rank(); ++m)
            CHECK(eval(jet.proj, {s.component({m})}) == jet.x_tensor_n.basis_elt(m));
        Connection back = connection_from_splitting(s, N);
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t a = 0; a < nr; ++a) CHECK(back.gamma[i][a] == conn.gamma[i][a]);
    }
}

TEST_CASE("Atiyah cocycle: examples and closure", "[atiyah]") {
    SECTION("a trivial homological field gives the zero cocycle") {
        // The module differential must also vanish: every term of the
        // cocycle then carries Q or the module differential.
        auto chart = mixed_chart();
        HomologicalField Q0 = zero_q(chart);
        FreeDgModule N(chart, {{"u", 0}, {"v", 1}});
        Lcg rng(404);
        CHECK(atiyah_cocycle(random_connection(rng, N), N, Q0).is_zero());
    }

    SECTION("two-dimensional nonabelian example reads off structure constants") {
        // Flat coordinate connection on the shifted tangent module.  With
        // L_Q d_1 = -xi2 d_2 and L_Q d_2 = xi1 d_2, only the third term of
        // the cocycle survives and alpha(d_i, d_j) = -d_i(g_j) where
        // L_Q d_j = g_j d_2:
        //   alpha(d_1, d_2) = -d_2,  alpha(d_2, d_1) = +d_2,  diagonal 0,
        // i.e. minus the structure constants of [e_1, e_2] = e_2.
        auto chart = g1_chart();
        HomologicalField Q = g1_q();
        FreeDgModule T = tangent_module(chart, Q);
        HomCochain alpha = atiyah_cocycle(Connection::flat(T), T, Q);
        CHECK(alpha.component({0, 0}).is_zero());
        CHECK(alpha.component({0, 1}) == T.scale(Rat(-1), T.basis_elt(1)));
        CHECK(alpha.component({1, 0}) == T.basis_elt(1));
        CHECK(alpha.component({1, 1}).is_zero());
    }

    SECTION("explicit formula agrees with the Hom differential of the connection") {
        auto chart = mixed_chart();
        HomologicalField Q = mixed_q();
        Lcg rng(505);
        for (const FreeDgModule& N : {tangent_module(chart, Q), uv_module()}) {
            Connection conn = random_connection(rng, N);
            HomCochain alpha = atiyah_cocycle(conn, N, Q);
            CHECK(alpha == hom_differential(connection_cochain(conn, Q), Q));
            // Closure: the cocycle is killed by the Hom differential.
            CHECK(hom_differential(alpha, Q).is_zero());
        }
    }

    SECTION("smooth bilinearity: the formula at general arguments matches the table") {
        auto chart = mixed_chart();
        HomologicalField Q = mixed_q();
        FreeDgModule T = tangent_module(chart, Q);
        Lcg rng(606);
        Connection conn = random_connection(rng, T);
        HomCochain alpha = atiyah_cocycle(conn, T, Q);
        for (int s = 0; s < 30; ++s) {
            Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
            VectorField X = random_homogeneous_field(rng, chart, xdeg, 3);
            ModElt xi = random_elt(rng, T);
            VectorField qx = lie_bracket(Q.field(), X);
            ModElt direct = T.add(
                T.scale(sign_pow(xdeg),
                        T.add(T.lq(Q, nabla(conn, X, xi)),
                              T.scale(Rat(-1), nabla(conn, qx, xi)))),
                T.scale(Rat(-1), nabla(conn, X, T.lq(Q, xi))));
            CHECK(direct == eval(alpha, {field_to_elt(T, X), xi}));
        }
    }

    SECTION("difference of cocycles is the Hom differential of the difference") {
        auto chart = mixed_chart();
        HomologicalField Q = mixed_q();
        FreeDgModule N = uv_module();
        Lcg rng(707);
        Connection c1 = random_connection(rng, N);
        Connection c2 = random_connection(rng, N);
        HomCochain a1 = atiyah_cocycle(c1, N, Q);
        HomCochain a2 = atiyah_cocycle(c2, N, Q);
        HomCochain p1 = connection_cochain(c1, Q);
        HomCochain p2 = connection_cochain(c2, Q);
        HomCochain diff({tangent_module(chart, Q), N}, N, -1);
        HomCochain adiff({tangent_module(chart, Q), N}, N, 0);
        for (std::size_t i = 0; i < chart->size(); ++i)
            for (std::size_t a = 0; a < N.rank(); ++a) {
                diff.component({i, a}) =
                    N.add(p1.component({i, a}), N.scale(Rat(-1), p2.component({i, a})));
                adiff.component({i, a}) =
                    N.add(a1.component({i, a}), N.scale(Rat(-1), a2.component({i, a})));
            }
        CHECK(adiff == hom_differential(diff, Q));
    }

    SECTION("the Hom differential squares to zero") {
        auto chart = mixed_chart();
        HomologicalField Q = mixed_q();
        FreeDgModule T = tangent_module(chart, Q);
        FreeDgModule N = uv_module();
        Lcg rng(808);
        for (Degree d : {-1, 0, 1}) {
            HomCochain phi({T, N}, N, d);
            for (std::size_t i = 0; i < chart->size(); ++i)
                for (std::size_t a = 0; a < N.rank(); ++a)
                    phi.component({i, a}) = random_elt(rng, N);
            CHECK(hom_differential(hom_differential(phi, Q), Q).is_zero());
        }
    }
}

TEST_CASE("tensor product of connections", "[atiyah]") {
    auto chart = mixed_chart();
    HomologicalField Q = mixed_q();
    FreeDgModule N1 = uv_module();
    FreeDgModule N2 = tangent_module(chart, Q);
    FreeDgModule T12 = tensor_module(N1, N2);
    Lcg rng(909);
    Connection c1 = random_connection(rng, N1);
    Connection c2 = random_connection(rng, N2);

    SECTION("the tensor module is dg") { CHECK(check_dg_module(T12, Q)); }

    SECTION("cocycle of the Leibniz connection splits by the Leibniz rule") {
        HomCochain a12 = tensor_cocycle(c1, N1, c2, N2, Q);
        HomCochain a1 = atiyah_cocycle(c1, N1, Q);
        HomCochain a2 = atiyah_cocycle(c2, N2, Q);
        for (std::size_t i = 0; i < chart->size(); ++i) {
            long long shifted = 1 - chart->degree(i);  // degree of the shifted slot
            for (std::size_t a = 0; a < N1.rank(); ++a)
                for (std::size_t b = 0; b < N2.rank(); ++b) {
                    // alpha(X, xi1 (x) xi2) = alpha1(X, xi1) (x) xi2
                    //   + (-1)^{(~X + 1) ~xi1} xi1 (x) alpha2(X, xi2).
                    ModElt lhs = a12.component({i, a * N2.rank() + b});
                    ModElt rhs = tensor_elt(N1, N2, T12, a1.component({i, a}),
                                            N2.basis_elt(b));
                    ModElt second = tensor_elt(N1, N2, T12, N1.basis_elt(a),
                                               a2.component({i, b}));
                    rhs = T12.add(std::move(rhs),
                                  T12.scale(sign_pow(shifted * N1.degree(a)),
                                            std::move(second)));
                    CHECK(lhs == rhs);
                }
        }
    }
}

TEST_CASE("functoriality homotopy", "[atiyah]") {
    auto chart = mixed_chart();
    HomologicalField Q = mixed_q();
    FreeDgModule N = uv_module();
    Lcg rng(1010);
    Connection c1 = random_connection(rng, N);
    Connection c2 = random_connection(rng, N);

    SECTION("scalar morphisms satisfy the homotopy identity exactly") {
        for (Rat lambda : {Rat(1), Rat(3), Rat(-2, 5)}) {
            HomCochain phi({N}, N, 0);
            for (std::size_t a = 0; a < N.rank(); ++a)
                phi.component({a}) = N.scale(lambda, N.basis_elt(a));
            auto [lhs, rhs] = functoriality_homotopy(phi, c1, c2, Q);
            CHECK(lhs == rhs);
        }
    }

    SECTION("identity morphism between equal connections gives zero on both sides") {
        HomCochain id({N}, N, 0);
        for (std::size_t a = 0; a < N.rank(); ++a) id.component({a}) = N.basis_elt(a);
        auto [lhs, rhs] = functoriality_homotopy(id, c1, c1, Q);
        CHECK(lhs.is_zero());
        CHECK(rhs.is_zero());
    }

    SECTION("a map that does not commute with the differentials is rejected") {
        // u |-> u, v |-> 0 fails because L_Q(u) = v.
        HomCochain phi({N}, N, 0);
        phi.component({0}) = N.basis_elt(0);
        CHECK_THROWS_AS(functoriality_homotopy(phi, c1, c2, Q), std::invalid_argument);
    }
}

TEST_CASE("canonical connection on tensor words", "[atiyah]") {
    auto chart = mixed_chart();
    HomologicalField Q = mixed_q();
    Lcg rng(1111);

    SECTION("the identity word flows to the field itself") {
        for (int s = 0; s < 10; ++s) {
            Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
            VectorField X = random_homogeneous_field(rng, chart, xdeg, 3);
            CHECK(canonical_connection(X, PolyDiffOp::identity_op(chart)) == theta_op(X));
        }
    }

    SECTION("hand-expanded two-slot word") {
        // X = x d_x (even), D = d_xi (x) d_x.  Both slot insertions are
        // plain compositions with x d_x (the slots have constant
        // coefficients), the even field contributes no signs, and the
        // second slot's coefficient x migrates left across the even slot
        // d_xi without a sign:
        //   nabla_X D = x (d_x d_xi (x) d_x) + x (d_xi (x) d_x d_x).
        VectorField X(chart);
        X.set_component(0, parse_poly("x", chart));
        DerMonomial dxi = DerMonomial::empty(*chart);
        ++dxi.exponents[1];
        DerMonomial dx = DerMonomial::empty(*chart);
        ++dx.exponents[0];
        PolyDiffOp D(chart);
        D.add(DerTuple{dxi, dx}, Poly::constant(chart, 1));

        PolyDiffOp expect(chart);
        DerMonomial dxdxi = dxi;
        ++dxdxi.exponents[0];
        DerMonomial dxdx = dx;
        ++dxdx.exponents[0];
        expect.add(DerTuple{dxdxi, dx}, parse_poly("x", chart));
        expect.add(DerTuple{dxi, dxdx}, parse_poly("x", chart));
        CHECK(canonical_connection(X, D) == expect);
    }

    SECTION("cup derivation property") {
        for (int s = 0; s < 40; ++s) {
            Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
            VectorField X = random_homogeneous_field(rng, chart, xdeg, 3);
            PolyDiffOp P1 = random_bihomog_polydiffop(rng, chart, 1, 2, 2, 3);
            PolyDiffOp P2 = random_polydiffop(rng, chart, 2, 2, 3);
            auto p1tot = P1.total_degree();
            if (!p1tot) continue;
            long long p1deg = *p1tot;
            PolyDiffOp lhs = canonical_connection(X, cup(P1, P2));
            PolyDiffOp rhs = cup(canonical_connection(X, P1), P2) +
                             sign_pow(xdeg * p1deg) * cup(P1, canonical_connection(X, P2));
            CHECK(lhs == rhs);
        }
    }

    SECTION("commutes with the two-slot coproduct") {
        for (int s = 0; s < 40; ++s) {
            Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
            VectorField X = random_homogeneous_field(rng, chart, xdeg, 3);
            DiffOp D = random_diffop(rng, chart, 2, 3);
            PolyDiffOp flowed = canonical_connection(X, PolyDiffOp::from_diffop(D));
            CHECK(canonical_connection(X, coproduct_delta(D)) ==
                  coproduct_delta(collapse1(flowed)));
        }
    }

    SECTION("preserves the free Lie subspace") {
        DiffOp ddx = DiffOp::partial_op(chart, 0);
        DerMonomial dx = DerMonomial::empty(*chart);
        ++dx.exponents[0];
        DiffOp xddx(chart);
        xddx.add_term(Monomial{{1, 0, 0}}, dx, Rat(1));
        FreeLieElt g1 = FreeLieElt::generator(ddx);
        FreeLieElt g2 = FreeLieElt::generator(xddx);
        PolyDiffOp word = lie_bracket_free(g1, g2).value();
        for (int s = 0; s < 8; ++s) {
            Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
            VectorField X = random_homogeneous_field(rng, chart, xdeg, 2);
            if (!X.degree()) continue;
            CHECK(is_in_free_lie(canonical_connection(X, word), 3));
        }
    }
}

TEST_CASE("canonical cocycle is the bracket on words", "[atiyah]") {
    Lcg rng(1212);

    SECTION("single operators under the trivial field") {
        auto chart = mixed_chart();
        HomologicalField Q0 = zero_q(chart);
        for (int s = 0; s < 15; ++s) {
            Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
            VectorField X = random_homogeneous_field(rng, chart, xdeg, 3);
            if (!X.degree()) continue;
            DiffOp D = random_diffop(rng, chart, 2, 3);
            CHECK(check_prop_bracket(X, {D}, Q0));
        }
    }

    SECTION("single operators on the two-dimensional nonabelian example") {
        auto chart = g1_chart();
        HomologicalField Q = g1_q();
        for (int s = 0; s < 15; ++s) {
            Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
            VectorField X = random_homogeneous_field(rng, chart, xdeg, 2);
            if (!X.degree()) continue;
            DiffOp D = random_diffop(rng, chart, 2, 2);
            CHECK(check_prop_bracket(X, {D}, Q));
        }
    }

    SECTION("words of length two and three") {
        auto chart = mixed_chart();
        HomologicalField Q = mixed_q();
        for (int s = 0; s < 10; ++s) {
            Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
            VectorField X = random_homogeneous_field(rng, chart, xdeg, 2);
            if (!X.degree()) continue;
            DiffOp D1 = random_diffop(rng, chart, 1, 2, 2);
            DiffOp D2 = random_diffop(rng, chart, 1, 2, 2);
            CHECK(check_prop_bracket(X, {D1, D2}, Q));
            if (s < 4) {
                DiffOp D3 = random_diffop(rng, chart, 1, 1, 2);
                CHECK(check_prop_bracket(X, {D1, D2, D3}, Q));
            }
        }
    }

    SECTION("nested bracket words") {
        auto chart = mixed_chart();
        HomologicalField Q = mixed_q();
        for (int s = 0; s < 10; ++s) {
            Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
            VectorField X = random_homogeneous_field(rng, chart, xdeg, 2);
            if (!X.degree()) continue;
            PolyDiffOp P = canonical_bracket(
                PolyDiffOp::from_diffop(random_diffop(rng, chart, 1, 2, 2)),
                PolyDiffOp::from_diffop(random_diffop(rng, chart, 1, 2, 2)));
            CHECK(canonical_atiyah(X, P, Q) == canonical_bracket(theta_op(X), P));
        }
    }
}

TEST_CASE("inclusion homotopy between the two cocycles", "[atiyah]") {
    // theta of the tangent cocycle differs from the canonical bracket by the
    // total differential of the homotopy h(X, Y) built from the difference
    // of the two connections along theta.
    for (int which = 0; which < 2; ++which) {
        auto chart = which == 0 ? g1_chart() : mixed_chart();
        HomologicalField Q = which == 0 ? g1_q() : mixed_q();
        FreeDgModule T = tangent_module(chart, Q);
        Connection flat = Connection::flat(T);
        HomCochain alpha = atiyah_cocycle(flat, T, Q);

        auto h = [&](const VectorField& A, const VectorField& B) {
            auto ad = A.degree();
            if (!ad) return PolyDiffOp::zero(chart);
            PolyDiffOp nb = theta_op(
                elt_to_field(nabla(flat, A, field_to_elt(T, B)), chart));
            return sign_pow(*ad) * (nb - canonical_connection(A, theta_op(B)));
        };

        Lcg rng(1313 + which);
        for (int s = 0; s < 12; ++s) {
            Degree xdeg = static_cast<Degree>(rng.next_range(-1, 2));
            Degree ydeg = static_cast<Degree>(rng.next_range(-1, 2));
            VectorField X = random_homogeneous_field(rng, chart, xdeg, 2);
            VectorField Y = random_homogeneous_field(rng, chart, ydeg, 2);
            if (!X.degree() || !Y.degree()) continue;

            PolyDiffOp lhs =
                theta_op(elt_to_field(
                    eval(alpha, {field_to_elt(T, X), field_to_elt(T, Y)}), chart)) -
                canonical_bracket(theta_op(X), theta_op(Y));
            PolyDiffOp hxy = h(X, Y);
            PolyDiffOp rhs = lie_q(Q, hxy) + hochschild_d(hxy) +
                             h(lie_bracket(Q.field(), X), Y) +
                             sign_pow(xdeg + 1) * h(X, lie_bracket(Q.field(), Y));
            CHECK(lhs == rhs);
        }
    }
}

TEST_CASE("lowering map twisted by the cocycle", "[atiyah]") {
    auto chart = g1_chart();
    HomologicalField Q = g1_q();
    FreeDgModule T = tangent_module(chart, Q);
    HomCochain alpha = atiyah_cocycle(Connection::flat(T), T, Q);
    VectorField d1(chart), d2(chart);
    d1.set_component(0, Poly::constant(chart, 1));
    d2.set_component(1, Poly::constant(chart, 1));

    SECTION("single factor contracts to the cocycle value") {
        auto terms = omega_tilde({d1}, d2, alpha, T);
        REQUIRE(terms.size() == 1);
        CHECK(terms[0].word.empty());
        CHECK(terms[0].coeff == Rat(1));
        // alpha(d_1, d_2) = -d_2 from the structure-constant table.
        CHECK(terms[0].value.component(1) == Poly::constant(chart, -1));
        CHECK(terms[0].value.component(0).is_zero());
    }

    SECTION("a trivial homological field annihilates everything") {
        HomologicalField Q0 = zero_q(chart);
        FreeDgModule T0 = tangent_module(chart, Q0);
        HomCochain a0 = atiyah_cocycle(Connection::flat(T0), T0, Q0);
        for (const auto& t : omega_tilde({d1, d2}, d1, a0, T0)) {
            CHECK(t.value.component(0).is_zero());
            CHECK(t.value.component(1).is_zero());
        }
    }

    SECTION("length-two word contracts slotwise with unit signs") {
        // Both coordinate fields have degree -1, so every exponent
        // (tail + n - i)(deg + 1) vanishes and all coefficients are +1.
        auto terms = omega_tilde({d1, d2}, d1, alpha, T);
        REQUIRE(terms.size() == 2);
        CHECK(terms[0].coeff == Rat(1));
        REQUIRE(terms[0].word.size() == 1);
        // First slot removed: remaining word (d_2), value alpha(d_1, d_1) = 0.
        CHECK(terms[0].word[0].component(1) == Poly::constant(chart, 1));
        CHECK(terms[0].value.component(1).is_zero());
        // Second slot removed: remaining word (d_1), value alpha(d_2, d_1) = d_2.
        CHECK(terms[1].coeff == Rat(1));
        CHECK(terms[1].word[0].component(0) == Poly::constant(chart, 1));
        CHECK(terms[1].value.component(1) == Poly::constant(chart, 1));
    }
}
