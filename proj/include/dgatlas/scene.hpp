#pragma once

// Scene files: a JSON description of a chart, an odd vector field, optional
// Christoffel tables, and an optional Lie pair, together with the list of
// checks to run.  Loading validates everything eagerly and reports positions
// for expression errors.

#include "dgatlas/atiyah.hpp"
#include "dgatlas/diffop.hpp"
#include "dgatlas/lie_pair.hpp"
#include "dgatlas/parse.hpp"
#include "dgatlas/random_gen.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace dgatlas {

struct SceneError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Scene {
    ChartPtr chart;
    VectorField q;  // possibly zero; degree +1 enforced when nonzero
    std::map<std::string, Connection> connections;
    std::optional<LiePairPtr> lie_pair;
    std::vector<std::string> checks;  // empty means: run the full registry
    std::uint64_t seed = 1;
    Bounds bounds;
};

namespace detail {

inline Rat rat_from_json(const nlohmann::json& j, const std::string& where) {
    if (j.is_number_integer()) return Rat(j.get<long long>());
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        std::size_t slash = s.find('/');
        try {
            if (slash == std::string::npos) return Rat(std::stoll(s));
            return Rat(std::stoll(s.substr(0, slash)), std::stoll(s.substr(slash + 1)));
        } catch (const std::exception&) {
            throw SceneError(where + ": cannot parse rational '" + s + "'");
        }
    }
    throw SceneError(where + ": expected an integer or a 'p/q' string");
}

inline Poly poly_from_json(const nlohmann::json& j, const ChartPtr& chart,
                           const std::string& where) {
    if (!j.is_string()) throw SceneError(where + ": expected an expression string");
    const std::string src = j.get<std::string>();
    try {
        return parse_poly(src, chart);
    } catch (const ParseError& e) {
        throw SceneError(where + ": " + e.what() + " in '" + src + "'");
    }
}

}  // namespace detail

inline Scene scene_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw SceneError("scene: top level must be an object");
    Scene s;

    // Chart.
    if (!j.contains("chart") || !j.at("chart").is_array() || j.at("chart").empty())
        throw SceneError("scene.chart: expected a non-empty array of [name, degree] pairs");
    std::vector<Coordinate> coords;
    for (const auto& entry : j.at("chart")) {
        if (!entry.is_array() || entry.size() != 2 || !entry.at(0).is_string() ||
            !entry.at(1).is_number_integer())
            throw SceneError("scene.chart: each entry must be [name, degree]");
        coords.push_back({entry.at(0).get<std::string>(), entry.at(1).get<Degree>()});
    }
    try {
        s.chart = make_chart(std::move(coords));
    } catch (const std::invalid_argument& e) {
        throw SceneError(std::string("scene.chart: ") + e.what());
    }

    // Q.
    s.q = VectorField(s.chart);
    if (j.contains("Q")) {
        if (!j.at("Q").is_object()) throw SceneError("scene.Q: expected coordinate -> expression");
        for (const auto& [coord, expr] : j.at("Q").items()) {
            std::size_t i = s.chart->find(coord);
            if (i == Chart::npos) throw SceneError("scene.Q: unknown coordinate '" + coord + "'");
            s.q.set_component(i, detail::poly_from_json(expr, s.chart, "scene.Q." + coord));
        }
        if (!s.q.is_homogeneous(1))
            throw SceneError("scene.Q: the field must be homogeneous of degree +1");
    }

    // Connections (Christoffel tables gamma[i][a][b] on the shifted tangent
    // module; entries are expression strings).
    if (j.contains("connections")) {
        if (!j.at("connections").is_object())
            throw SceneError("scene.connections: expected name -> table");
        // The tangent module needs a homological field; defer the [Q,Q]
        // check to the homological check itself and use the raw field here.
        for (const auto& [name, table] : j.at("connections").items()) {
            const std::size_t n = s.chart->size();
            if (!table.is_array() || table.size() != n)
                throw SceneError("scene.connections." + name + ": expected a " +
                                 std::to_string(n) + "^3 table of expressions");
            std::vector<std::vector<std::vector<Poly>>> gamma;
            for (std::size_t i = 0; i < n; ++i) {
                if (!table.at(i).is_array() || table.at(i).size() != n)
                    throw SceneError("scene.connections." + name + ": bad row " +
                                     std::to_string(i));
                std::vector<std::vector<Poly>> row;
                for (std::size_t a = 0; a < n; ++a) {
                    if (!table.at(i).at(a).is_array() || table.at(i).at(a).size() != n)
                        throw SceneError("scene.connections." + name + ": bad entry [" +
                                         std::to_string(i) + "][" + std::to_string(a) + "]");
                    std::vector<Poly> ent;
                    for (std::size_t b = 0; b < n; ++b)
                        ent.push_back(detail::poly_from_json(
                            table.at(i).at(a).at(b), s.chart,
                            "scene.connections." + name + "[" + std::to_string(i) + "][" +
                                std::to_string(a) + "][" + std::to_string(b) + "]"));
                    row.push_back(std::move(ent));
                }
                gamma.push_back(std::move(row));
            }
            // Store against the tangent module of the raw field; rebuilt by
            // the checks once the field is known to be homological.
            if (check_homological(s.q)) {
                HomologicalField Q(s.q);
                FreeDgModule T = tangent_module(s.chart, Q);
                Connection conn = Connection::flat(T);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t a = 0; a < n; ++a)
                        for (std::size_t b = 0; b < n; ++b)
                            conn.gamma[i][a].c[b] = gamma[i][a][b];
                s.connections.emplace(name, std::move(conn));
            }
        }
    }

    // Lie pair: structure constants over the full basis, the subalgebra as
    // an index subset (reordered first internally), the complement as the
    // rest (or an explicit subset).
    if (j.contains("lie_pair")) {
        const auto& lp = j.at("lie_pair");
        if (!lp.is_object() || !lp.contains("structure_constants") || !lp.contains("subalgebra"))
            throw SceneError("scene.lie_pair: need structure_constants and subalgebra");
        const auto& cj = lp.at("structure_constants");
        std::size_t n = cj.size();
        if (n == 0) throw SceneError("scene.lie_pair.structure_constants: empty tensor");
        std::vector<std::vector<std::vector<Rat>>> c(
            n, std::vector<std::vector<Rat>>(n, std::vector<Rat>(n, Rat(0))));
        for (std::size_t i = 0; i < n; ++i) {
            if (!cj.at(i).is_array() || cj.at(i).size() != n)
                throw SceneError("scene.lie_pair.structure_constants: ragged tensor");
            for (std::size_t k = 0; k < n; ++k) {
                if (!cj.at(i).at(k).is_array() || cj.at(i).at(k).size() != n)
                    throw SceneError("scene.lie_pair.structure_constants: ragged tensor");
                for (std::size_t l = 0; l < n; ++l)
                    c[i][k][l] = detail::rat_from_json(cj.at(i).at(k).at(l),
                                                       "scene.lie_pair.structure_constants");
            }
        }
        std::vector<std::size_t> h_idx;
        for (const auto& v : lp.at("subalgebra")) {
            std::size_t i = v.get<std::size_t>();
            if (i >= n) throw SceneError("scene.lie_pair.subalgebra: index out of range");
            h_idx.push_back(i);
        }
        std::vector<std::size_t> perm = h_idx;
        if (lp.contains("complement")) {
            for (const auto& v : lp.at("complement")) perm.push_back(v.get<std::size_t>());
        } else {
            for (std::size_t i = 0; i < n; ++i)
                if (std::find(h_idx.begin(), h_idx.end(), i) == h_idx.end()) perm.push_back(i);
        }
        if (perm.size() != n)
            throw SceneError("scene.lie_pair: subalgebra + complement must partition the basis");
        std::vector<std::vector<std::vector<Rat>>> cp(
            n, std::vector<std::vector<Rat>>(n, std::vector<Rat>(n, Rat(0))));
        // cp is indexed with the subalgebra first; invert the permutation on
        // the output leg.
        std::vector<std::size_t> inv(n);
        for (std::size_t i = 0; i < n; ++i) inv[perm[i]] = i;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t l = 0; l < n; ++l) cp[i][k][inv[l]] = c[perm[i]][perm[k]][l];
        try {
            s.lie_pair = make_lie_pair(n, h_idx.size(), std::move(cp));
        } catch (const std::invalid_argument& e) {
            throw SceneError(std::string("scene.lie_pair: ") + e.what());
        }
    }

    if (j.contains("checks")) {
        if (!j.at("checks").is_array()) throw SceneError("scene.checks: expected an array");
        for (const auto& v : j.at("checks")) s.checks.push_back(v.get<std::string>());
    }
    if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("bounds")) {
        const auto& b = j.at("bounds");
        if (b.contains("max_arity")) s.bounds.max_arity = b.at("max_arity").get<int>();
        if (b.contains("max_order")) s.bounds.max_order = b.at("max_order").get<int>();
        if (b.contains("max_poly_degree"))
            s.bounds.max_poly_degree = b.at("max_poly_degree").get<int>();
        if (b.contains("samples")) s.bounds.samples = b.at("samples").get<int>();
    }
    return s;
}

inline Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SceneError("cannot open scene file: " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        // nlohmann reports line/column positions in the message.
        throw SceneError(std::string("scene JSON: ") + e.what());
    }
    return scene_from_json(j);
}

// ---------------------------------------------------------------------------
// Reports

struct CheckResult {
    std::string name;
    std::string status;  // "pass", "fail", or "skipped"
    nlohmann::json counterexample;  // null unless status == "fail"
    double millis = 0.0;
};

inline nlohmann::json report_to_json(const std::vector<CheckResult>& results,
                                     std::uint64_t seed) {
    nlohmann::json out;
    out["seed"] = seed;
    out["results"] = nlohmann::json::array();
    std::vector<CheckResult> sorted = results;
    std::sort(sorted.begin(), sorted.end(),
              [](const CheckResult& a, const CheckResult& b) { return a.name < b.name; });
    bool all_pass = true;
    for (const auto& r : sorted) {
        nlohmann::json item;
        item["name"] = r.name;
        item["status"] = r.status;
        item["counterexample"] = r.counterexample;
        item["millis"] = r.millis;
        out["results"].push_back(std::move(item));
        if (r.status == "fail") all_pass = false;
    }
    out["all_pass"] = all_pass;
    return out;
}

}  // namespace dgatlas
