#include "kis/corpus.hpp"
#include "kis/duality.hpp"
#include "kis/toric.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <numeric>

using namespace kis;
using namespace kis::toric;

namespace {

using Poly = std::vector<long long>;  // coefficients of t^0, t^1, ...

Poly padd(Poly a, const Poly& b) {
    if (a.size() < b.size()) a.resize(b.size(), 0);
    for (std::size_t i = 0; i < b.size(); ++i) a[i] += b[i];
    return a;
}

Poly pmul(const Poly& a, const Poly& b) {
    Poly out(a.size() + b.size() - 1, 0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

Poly ppow(const Poly& a, int n) {
    Poly out = {1};
    for (int i = 0; i < n; ++i) out = pmul(out, a);
    return out;
}

// Dimension of a cone from its rays, by dense elimination.
int cone_dim(const Fan& f, int c) {
    oracle::Dense m;
    for (int r : f.cones[static_cast<std::size_t>(c)]) {
        std::vector<mpq_class> row;
        for (auto x : f.rays[static_cast<std::size_t>(r)]) row.emplace_back(static_cast<long>(x));
        m.push_back(row);
    }
    return static_cast<int>(oracle::dense_rank(m));
}

bool face_of(const Fan& f, int a, int b) {
    const auto &x = f.cones[static_cast<std::size_t>(a)], &y = f.cones[static_cast<std::size_t>(b)];
    return std::includes(y.begin(), y.end(), x.begin(), x.end());
}

// Stanley's toric g-polynomial of every cone, computed from the face poset:
// g({0}) = 1, and for a k-cone the truncation to degree <= (k-1)/2 of
// (1 - t) * sum over proper faces tau of g(tau) (t - 1)^(k - 1 - dim tau).
std::vector<Poly> toric_g(const Fan& f) {
    const int n = static_cast<int>(f.cones.size());
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::vector<int> dim(static_cast<std::size_t>(n));
    for (int c = 0; c < n; ++c) dim[static_cast<std::size_t>(c)] = cone_dim(f, c);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return dim[a] < dim[b]; });
    std::vector<Poly> g(static_cast<std::size_t>(n));
    for (int c : order) {
        const int k = dim[static_cast<std::size_t>(c)];
        if (k == 0) {
            g[static_cast<std::size_t>(c)] = {1};
            continue;
        }
        Poly h = {0};
        for (int t = 0; t < n; ++t)
            if (t != c && face_of(f, t, c)) h = padd(h, pmul(g[static_cast<std::size_t>(t)], ppow({-1, 1}, k - 1 - dim[t])));
        Poly q = pmul({1, -1}, h);
        q.resize(static_cast<std::size_t>((k - 1) / 2 + 1), 0);
        g[static_cast<std::size_t>(c)] = q;
    }
    return g;
}

// h-polynomial of a complete fan: sum over cones of g(sigma) (t - 1)^(d - dim sigma).
Poly toric_h(const Fan& f) {
    auto g = toric_g(f);
    Poly h = {0};
    for (int c = 0; c < static_cast<int>(f.cones.size()); ++c)
        h = padd(h, pmul(g[static_cast<std::size_t>(c)], ppow({-1, 1}, f.rank - cone_dim(f, c))));
    return h;
}

GradedDims even(const Poly& p) {
    GradedDims g;
    for (std::size_t i = 0; i < p.size(); ++i) {
        REQUIRE(p[i] >= 0);
        g.set(2 * static_cast<int>(i), static_cast<std::size_t>(p[i]));
    }
    return g;
}

GradedDims dims(std::vector<std::size_t> v) { return GradedDims::from_vector(0, v); }

Fan simplicial(int rank, std::vector<IVec> rays, const std::vector<std::vector<int>>& top) {
    std::set<std::vector<int>> all;
    for (auto c : top) {
        std::sort(c.begin(), c.end());
        for (unsigned mask = 0; mask < (1u << c.size()); ++mask) {
            std::vector<int> s;
            for (std::size_t i = 0; i < c.size(); ++i)
                if (mask & (1u << i)) s.push_back(c[i]);
            all.insert(s);
        }
    }
    return Fan{rank, std::move(rays), {all.begin(), all.end()}};
}

Fan p3() {
    return simplicial(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, -1, -1}}, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
}
Fan f2() { return simplicial(2, {{1, 0}, {0, 1}, {-1, 2}, {0, -1}}, {{0, 1}, {1, 2}, {2, 3}, {0, 3}}); }
Fan p123() { return simplicial(2, {{-2, -3}, {1, 0}, {0, 1}}, {{0, 1}, {1, 2}, {0, 2}}); }
Fan p1113() {
    return simplicial(3, {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}, {-1, -1, -3}}, {{0, 1, 2}, {0, 1, 3}, {0, 2, 3}, {1, 2, 3}});
}

// Face fan of the cube [-1,1]^3: eight rays, six square cones.
Fan cube() {
    Fan f;
    f.rank = 3;
    for (long long a : {1, -1})
        for (long long b : {1, -1})
            for (long long c : {1, -1}) f.rays.push_back({a, b, c});
    f.cones.push_back({});
    for (int i = 0; i < 8; ++i) f.cones.push_back({i});
    for (int i = 0; i < 8; ++i)
        for (int j = i + 1; j < 8; ++j) {
            int diff = 0;
            for (int k = 0; k < 3; ++k) diff += f.rays[i][k] != f.rays[j][k];
            if (diff == 1) f.cones.push_back({i, j});
        }
    for (int ax = 0; ax < 3; ++ax)
        for (long long s : {1, -1}) {
            std::vector<int> c;
            for (int i = 0; i < 8; ++i)
                if (f.rays[i][ax] == s) c.push_back(i);
            f.cones.push_back(c);
        }
    return f;
}

// The cone over a lattice polygon at height one, with all its faces.
Fan polygon_cone(const std::vector<std::pair<long long, long long>>& verts) {
    Fan f;
    f.rank = 3;
    const int n = static_cast<int>(verts.size());
    for (auto [x, y] : verts) f.rays.push_back({x, y, 1});
    f.cones.push_back({});
    for (int i = 0; i < n; ++i) f.cones.push_back({i});
    for (int i = 0; i < n; ++i) {
        std::vector<int> e = {i, (i + 1) % n};
        std::sort(e.begin(), e.end());
        f.cones.push_back(e);
    }
    std::vector<int> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);
    f.cones.push_back(all);
    return f;
}

struct Named {
    std::string name;
    Fan fan;
};

std::vector<Named> complete_fans() {
    return {{"p1", p1()},   {"p2", p2()},     {"p112", p112()},   {"p1xp1", p1xp1()}, {"p3", p3()},
            {"f2", f2()},   {"p123", p123()}, {"p1113", p1113()}, {"cube", cube()}};
}

std::vector<Perversity> perversities(const Fan& f) {
    if (2 * f.rank < 2) return {Perversity{}};
    return gm_perversities(2 * f.rank);
}

GradedDims exterior_dims(int n) {
    GradedDims g;
    std::size_t b = 1;
    for (int j = 0; j <= n; ++j) {
        g.set(j, b);
        b = b * static_cast<std::size_t>(n - j) / static_cast<std::size_t>(j + 1);
    }
    return g;
}

GradedDims tensor_dims(const GradedDims& a, const GradedDims& b) {
    GradedDims out;
    for (auto& [i, x] : a.entries())
        for (auto& [j, y] : b.entries()) out.add(i + j, x * y);
    return out;
}

GradedDims mirror(const GradedDims& g, int d) {
    GradedDims out;
    for (auto& [k, n] : g.entries()) out.set(d - k, n);
    return out;
}

}  // namespace

TEST_CASE("every test fan is valid", "[toric][validate]") {
    for (auto& [name, f] : complete_fans()) {
        INFO(name);
        Fan g = f;
        auto r = validate_fan(g);
        CHECK(r.valid());
        CHECK(r.violations.empty());
        CHECK(is_complete(g));
    }
    Fan c = conifold();
    CHECK(validate_fan(c).valid());
    CHECK_FALSE(is_complete(c));
    Fan pent = polygon_cone({{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {0, -1}});
    CHECK(validate_fan(pent).valid());
}

TEST_CASE("invalid fans are rejected with a reason", "[toric][validate]") {
    auto has = [](const FanReport& r, const std::string& s) {
        for (const auto& v : r.violations)
            if (v.find(s) != std::string::npos) return true;
        return false;
    };
    Fan overlap = simplicial(2, {{1, 0}, {0, 1}, {1, 1}}, {{0, 1}, {1, 2}});
    auto r1 = validate_fan(overlap);
    CHECK_FALSE(r1.valid());
    CHECK(has(r1, "do not meet in a common face"));

    Fan line = simplicial(2, {{1, 0}, {-1, 0}}, {{0, 1}});
    CHECK(has(validate_fan(line), "not strongly convex"));

    Fan missing{2, {{1, 0}, {0, 1}}, {{}, {0, 1}, {0}}};
    CHECK(has(validate_fan(missing), "face {1} of cone {0,1} is missing"));

    Fan zero{2, {{0, 0}}, {{}, {0}}};
    CHECK(has(validate_fan(zero), "is zero"));

    Fan dup{2, {{1, 0}, {2, 0}}, {{}, {0}, {1}}};
    auto r5 = validate_fan(dup);
    CHECK(has(r5, "coincide"));
    REQUIRE_FALSE(r5.notes.empty());
    CHECK(dup.rays[1] == IVec{1, 0});

    Fan inner = simplicial(2, {{1, 0}, {0, 1}, {1, 1}}, {{0, 1, 2}});
    CHECK(has(validate_fan(inner), "not extremal"));
}

TEST_CASE("multiplicities and slice fans", "[toric]") {
    Fan f = p112();
    CHECK(multiplicity(f, f.find({0, 2})).value == 2);
    CHECK(multiplicity(f, f.find({0, 1})).smooth());
    CHECK(multiplicity(f, f.find({1})).smooth());
    Fan g = p1113();
    CHECK(multiplicity(g, g.find({0, 1, 3})).value == 3);
    CHECK(multiplicity(g, g.find({0, 1, 2})).value == 1);
    Fan c = cube();
    CHECK(multiplicity(c, c.find({0, 1})).value == 2);
    auto sq = multiplicity(c, c.find({0, 1, 2, 3}));
    CHECK_FALSE(sq.simplicial);
    CHECK(sq.str() == "non-simplicial");
    CHECK_FALSE(multiplicity(conifold(), conifold().find({0, 1, 2, 3})).simplicial);

    auto s = slice_fan(f, f.find({0, 2}));
    CHECK(s.fan.rank == 2);
    CHECK(multiplicity(s.fan, s.fan.find({0, 1})).value == 2);
    CHECK(s.fan.cones.size() == 4);
    auto r = slice_fan(p2(), p2().find({1}));
    CHECK(r.fan.rank == 1);
    CHECK(r.fan.cones.size() == 2);
    // a 2-dim face of a rank 3 fan: its lattice span is a saturated plane
    auto e = slice_fan(c, c.find({0, 1}));
    CHECK(e.fan.rank == 2);
    CHECK(multiplicity(e.fan, static_cast<int>(e.fan.cones.size()) - 1).value == 2);
}

TEST_CASE("orbit stratifications", "[toric]") {
    auto s = orbit_stratification(p112(), Mode::singular_orbits);
    REQUIRE(s.strata.size() == 1);
    CHECK(p112().cone_name(s.strata[0]) == "{0,2}");
    CHECK(s.codim[0] == 4);
    CHECK(s.mult[s.strata[0]].value == 2);
    CHECK(orbit_stratification(p112(), Mode::all_orbits).strata.size() == 6);
    CHECK(orbit_stratification(p2(), Mode::singular_orbits).strata.empty());
    auto c = orbit_stratification(cube(), Mode::singular_orbits);
    CHECK(c.strata.size() == 18);
    CHECK(parse_mode("all") == Mode::all_orbits);
    CHECK(parse_mode("singularOrbits") == Mode::singular_orbits);
    CHECK(mode_name(Mode::all_orbits) == "allOrbits");
    CHECK_THROWS_AS(parse_mode("some"), StructuralError);
}

TEST_CASE("IC of complete fans is the toric h-polynomial", "[toric][oracle]") {
    for (auto& [name, f] : complete_fans()) {
        auto h = even(toric_h(f));
        auto g = toric_g(f);
        for (Mode mode : {Mode::singular_orbits, Mode::all_orbits})
            for (const auto& p : perversities(f)) {
                INFO(name << " IC_" << p.name << " " << mode_name(mode));
                auto s = orbit_stratification(f, mode);
                // the h-polynomial is the answer for the middle perversities
                // and, on rationally smooth fans, for all of them
                bool simp = true;
                for (int c = 0; c < static_cast<int>(f.cones.size()); ++c) simp &= multiplicity(f, c).simplicial;
                auto b = fan_global_betti(f, s, p, Theory::IC);
                if (p.name == "m" || p.name == "n" || simp) CHECK(b.dims == h);
                CHECK(b.euler_rule());
                auto t = fan_local_tables(f, s, p, Theory::IC);
                if (p.name == "m" || p.name == "n" || simp)
                    for (int c = 0; c < static_cast<int>(f.cones.size()); ++c) CHECK(t.stalk[c] == even(g[c]));
            }
    }
    CHECK(even(toric_h(cube())) == dims({1, 0, 5, 0, 5, 0, 1}));
}

TEST_CASE("cones over polygons", "[toric][oracle]") {
    // The link of the apex is a simply connected 5-manifold with b2 = n - 3.
    for (auto verts : std::vector<std::vector<std::pair<long long, long long>>>{
             {{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {0, -1}}}) {
        Fan f = polygon_cone(verts);
        const std::size_t b2 = verts.size() - 3;
        auto s = orbit_stratification(f, Mode::singular_orbits);
        int top = static_cast<int>(f.cones.size()) - 1;
        for (const auto& p : gm_perversities(6)) {
            auto ic = fan_local_tables(f, s, p, Theory::IC);
            REQUIRE(ic.punctured[top].has_value());
            CHECK(*ic.punctured[top] == dims({1, 0, b2, b2, 0, 1}));
            auto is = fan_local_tables(f, s, complement(p), Theory::IS);
            CHECK(is.stalk[top] + ic.stalk[top] == *ic.punctured[top]);
        }
        auto is_m = fan_local_tables(f, s, gm_perversity('m', 6), Theory::IS);
        CHECK(is_m.stalk[top] == dims({0, 0, 0, b2, 0, 1}));
    }
}

TEST_CASE("punctured slices of simplicial strata are rational spheres", "[toric][oracle]") {
    for (auto& [name, f] : complete_fans()) {
        auto s = orbit_stratification(f, Mode::singular_orbits);
        auto m = fan_model(f, s, perversities(f).front(), Theory::IC);
        for (int c : s.strata) {
            bool isolated = true;
            for (int t : s.strata) isolated &= t == c || !face_of(f, t, c);
            if (!isolated || !multiplicity(f, c).simplicial) continue;
            INFO(name << " " << f.cone_name(c));
            GradedDims sphere;
            sphere.set(0, 1);
            sphere.set(2 * cone_dim(f, c) - 1, 1);
            REQUIRE(m.faces[c].punctured.has_value());
            CHECK(*m.faces[c].punctured == sphere);
        }
    }
}

TEST_CASE("IS_p and IC_q partition the punctured slice at minimal strata", "[toric]") {
    auto fans = complete_fans();
    fans.push_back({"conifold", conifold()});
    for (auto& [name, f] : fans)
        for (Mode mode : {Mode::singular_orbits, Mode::all_orbits}) {
            auto s = orbit_stratification(f, mode);
            for (const auto& p : perversities(f)) {
                auto is = fan_local_tables(f, s, p, Theory::IS);
                auto ic = fan_local_tables(f, s, complement(p), Theory::IC);
                for (int c : s.strata) {
                    bool minimal = true;
                    for (int t : s.strata) minimal &= t == c || !face_of(f, t, c);
                    if (!minimal) continue;
                    INFO(name << " " << mode_name(mode) << " " << p.name << " " << f.cone_name(c));
                    REQUIRE(is.punctured[c].has_value());
                    CHECK(is.punctured[c] == ic.punctured[c]);
                    CHECK(is.stalk[c] + ic.stalk[c] == *is.punctured[c]);
                    for (auto& [k, n] : is.stalk[c].entries()) CHECK(ic.stalk[c].at(k) == 0);
                }
            }
        }
}

TEST_CASE("sections over a star split as torus times slice", "[toric][property]") {
    auto fans = complete_fans();
    fans.push_back({"conifold", conifold()});
    for (auto& [name, f] : fans)
        for (Theory th : {Theory::IS, Theory::IC}) {
            auto s = orbit_stratification(f, Mode::singular_orbits);
            auto p = perversities(f).front();
            auto m = fan_model(f, s, p, th);
            for (int c = 0; c < static_cast<int>(f.cones.size()); ++c) {
                INFO(name << " " << theory_name(th) << " " << f.cone_name(c));
                auto h = cohomology_dims(fan_sections(f, m, c));
                CHECK(h == tensor_dims(exterior_dims(f.rank - cone_dim(f, c)), m.faces[c].stalk));
            }
        }
}

TEST_CASE("complete fans satisfy duality and the Euler rule", "[toric][duality]") {
    for (auto& [name, f] : complete_fans())
        for (Mode mode : {Mode::singular_orbits, Mode::all_orbits}) {
            auto s = orbit_stratification(f, mode);
            for (const auto& p : perversities(f))
                for (Theory th : {Theory::IS, Theory::IC}) {
                    INFO(name << " " << mode_name(mode) << " " << theory_name(th) << "_" << p.name);
                    auto a = fan_global_betti(f, s, p, th);
                    auto b = fan_global_betti(f, s, complement(p), th);
                    CHECK(a.euler_rule());
                    CHECK(mirror(a.dims, 2 * f.rank) == b.dims);
                }
        }
}

TEST_CASE("reference tables", "[toric]") {
    auto sing = [](const Fan& f) { return orbit_stratification(f, Mode::singular_orbits); };
    auto m4 = gm_perversity('m', 4);
    CHECK(fan_global_betti(p1(), sing(p1()), Perversity{}, Theory::IC).dims == dims({1, 0, 1}));
    CHECK(fan_global_betti(p2(), sing(p2()), m4, Theory::IC).dims == dims({1, 0, 1, 0, 1}));
    CHECK(fan_global_betti(p112(), sing(p112()), m4, Theory::IC).dims == dims({1, 0, 1, 0, 1}));
    CHECK(fan_global_betti(p112(), sing(p112()), m4, Theory::IS).dims == dims({0, 0, 1}));
    int c = p112().find({0, 2});
    CHECK(fan_local_tables(p112(), sing(p112()), m4, Theory::IC).stalk[c] == dims({1}));
    CHECK(fan_local_tables(p112(), sing(p112()), m4, Theory::IS).stalk[c] == dims({0, 0, 0, 1}));
    Fan k = conifold();
    auto t = fan_local_tables(k, sing(k), gm_perversity('m', 6), Theory::IS);
    CHECK(t.stalk[k.find({0, 1, 2, 3})] == dims({0, 0, 0, 1, 0, 1}));
    CHECK_THROWS_AS(fan_global_betti(k, sing(k), gm_perversity('m', 6), Theory::IS), StructuralError);
}

TEST_CASE("toric Witt verdicts", "[toric][witt]") {
    auto fans = complete_fans();
    fans.push_back({"conifold", conifold()});
    for (auto& [name, f] : fans)
        for (Mode mode : {Mode::singular_orbits, Mode::all_orbits}) {
            auto s = orbit_stratification(f, mode);
            auto v = toric_witt(f, s);
            CHECK(v.witt);
            CHECK(v.witnesses.size() == s.strata.size());
        }
    auto v = toric_witt(p112(), orbit_stratification(p112(), Mode::singular_orbits));
    CHECK(v.witnesses.front() == "stratum {0,2}: codim 4, link dim 3 odd");
}

TEST_CASE("P^1 fan agrees with the CW suspension of the circle", "[toric][cw]") {
    auto sp = corpus::s2_poles();
    Fan f = p1();
    auto s = orbit_stratification(f, Mode::all_orbits);
    for (Theory th : {Theory::IS, Theory::IC}) {
        INFO(theory_name(th));
        auto b = build_complex(sp, th, Perversity{{"m"}, {{2, 0}}, true});
        auto fan = fan_global_betti(f, s, Perversity{{"m"}, {{2, 0}}, true}, th);
        CHECK(fan.dims == cohomology_dims(b.complex.total()));
        auto loc = fan_local_tables(f, s, Perversity{{"m"}, {{2, 0}}, true}, th);
        for (const auto& st : sp->strata)
            for_each_cell(st.cells, [&](int cell) {
                CHECK(cohomology_dims(b.complex.stalk(cell)) == loc.stalk[f.find({0})]);
                CHECK(cohomology_dims(b.complex.stalk(cell)) == loc.stalk[f.find({1})]);
            });
    }
}

TEST_CASE("named fans", "[toric]") {
    for (const auto& n : fan_names()) {
        Fan f = by_name(n);
        CHECK(validate_fan(f).valid());
    }
    CHECK_THROWS_AS(by_name("p4"), StructuralError);
}

TEST_CASE("stalks are truncations of their own punctured slices", "[toric]") {
    auto fans = complete_fans();
    fans.push_back({"conifold", conifold()});
    fans.push_back({"pentagon", polygon_cone({{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {0, -1}})});
    for (auto& [name, f] : fans)
        for (Mode mode : {Mode::singular_orbits, Mode::all_orbits}) {
            auto s = orbit_stratification(f, mode);
            for (const auto& p : perversities(f)) {
                auto is = fan_local_tables(f, s, p, Theory::IS);
                auto ic = fan_local_tables(f, s, p, Theory::IC);
                for (int c = 0; c < static_cast<int>(f.cones.size()); ++c) {
                    INFO(name << " " << mode_name(mode) << " " << p.name << " " << f.cone_name(c));
                    if (!s.is_stratum[c]) {
                        CHECK(is.stalk[c] == dims({1}));
                        CHECK(ic.stalk[c] == dims({1}));
                        CHECK_FALSE(is.punctured[c].has_value());
                        continue;
                    }
                    const int k = 2 * cone_dim(f, c);
                    const int pc = p.at(k), qc = k - 2 - pc;
                    REQUIRE(is.punctured[c].has_value());
                    REQUIRE(ic.punctured[c].has_value());
                    GradedDims up, low;
                    for (auto& [d, n] : is.punctured[c]->entries())
                        if (d > qc) up.set(d, n);
                    for (auto& [d, n] : ic.punctured[c]->entries())
                        if (d <= pc) low.set(d, n);
                    CHECK(is.stalk[c] == up);
                    CHECK(ic.stalk[c] == low);
                }
            }
        }
}
