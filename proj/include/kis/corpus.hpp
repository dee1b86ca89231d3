#pragma once

#include "kis/simplicial.hpp"
#include "kis/strata.hpp"

#include <array>
#include <functional>

namespace kis::corpus {

inline CWPtr s1_cw() { return simplicial_cw({{0, 1}, {1, 2}, {0, 2}}); }

inline CWPtr s2_cw() { return simplicial_cw({{1, 2, 3}, {0, 2, 3}, {0, 1, 3}, {0, 1, 2}}); }

// Moebius' 7-vertex torus.
inline CWPtr t2_cw() {
    std::vector<std::vector<int>> f;
    for (int i = 0; i < 7; ++i) {
        f.push_back({i, (i + 1) % 7, (i + 3) % 7});
        f.push_back({i, (i + 2) % 7, (i + 3) % 7});
    }
    return simplicial_cw(f);
}

// Boundary of the 4-cube modulo the antipodal map: 8 vertices, 16 edges,
// 12 squares, 4 cubes. No closed facet contains an antipodal pair, so the
// quotient is regular.
inline CWPtr rp3_cw() {
    using Face = std::array<int, 4>;  // -1, +1 fixed coordinate, 0 free
    auto free_count = [](const Face& f) { return static_cast<int>(std::count(f.begin(), f.end(), 0)); };
    auto negate = [](Face f) {
        for (int& v : f) v = -v;
        return f;
    };
    // representative: first fixed coordinate is +1
    auto is_rep = [](const Face& f) {
        for (int v : f)
            if (v != 0) return v > 0;
        return true;
    };
    std::vector<Face> reps;
    std::map<Face, int> idx;
    for (int k = 0; k <= 3; ++k) {
        std::vector<Face> layer;
        std::function<void(Face, int)> gen = [&](Face f, int i) {
            if (i == 4) {
                if (free_count(f) == k && is_rep(f)) layer.push_back(f);
                return;
            }
            for (int v : {-1, 0, 1}) {
                f[static_cast<std::size_t>(i)] = v;
                gen(f, i + 1);
            }
        };
        gen(Face{}, 0);
        std::sort(layer.begin(), layer.end());
        for (const auto& f : layer) {
            idx[f] = static_cast<int>(reps.size());
            reps.push_back(f);
        }
    }
    std::vector<std::string> names;
    std::vector<int> dims;
    for (const auto& f : reps) {
        std::string nm = "[";
        for (int v : f) nm += v < 0 ? '-' : v > 0 ? '+' : '0';
        names.push_back(nm + "]");
        dims.push_back(free_count(f));
    }
    std::vector<Cover> covers;
    for (const auto& g : reps) {
        int j = 0;
        for (std::size_t i = 0; i < 4; ++i) {
            if (g[i] != 0) continue;
            ++j;
            for (int e : {1, -1}) {
                Face f = g;
                f[i] = e;
                int sign = (j % 2 == 1 ? 1 : -1) * e;
                if (!is_rep(f)) {
                    f = negate(f);
                    if (free_count(f) % 2 == 1) sign = -sign;
                }
                covers.push_back({idx.at(f), idx.at(g), sign});
            }
        }
    }
    return std::make_shared<const CWPoset>(std::move(names), std::move(dims), std::move(covers));
}

inline CWPtr s1xs2_cw() { return cw_product(*s1_cw(), *s2_cw()); }

inline SpacePtr named(SpacePtr s, std::string name) {
    auto c = std::make_shared<StratifiedSpace>(*s);
    c->name = std::move(name);
    return c;
}

inline SpacePtr s1() { return smooth_space("s1", s1_cw()); }
inline SpacePtr s2() { return smooth_space("s2", s2_cw()); }
inline SpacePtr t2() { return smooth_space("t2", t2_cw()); }
inline SpacePtr rp3() { return smooth_space("rp3", rp3_cw()); }
inline SpacePtr s1xs2() { return smooth_space("s1xs2", s1xs2_cw()); }
// S^2 as the suspension of S^1, the poles kept as codimension-2 strata.
inline SpacePtr s2_poles() { return named(suspension(s1()), "s2_poles"); }
inline SpacePtr sigma_t2() { return named(suspension(t2()), "sigma_t2"); }
inline SpacePtr sigma_s1xs2() { return named(suspension(s1xs2()), "sigma_s1xs2"); }
inline SpacePtr sigma_sigma_t2() { return named(suspension(sigma_t2()), "sigma_sigma_t2"); }
inline SpacePtr sigma_t2_x_s1() { return named(product(sigma_t2(), s1_cw(), "s1"), "sigma_t2_x_s1"); }
inline SpacePtr sigma_rp3() { return named(suspension(rp3()), "sigma_rp3"); }

struct Entry {
    std::string name;
    std::string description;
    std::function<SpacePtr()> make;
    bool recipe;
};

inline const std::vector<Entry>& entries() {
    static const std::vector<Entry> e = {
        {"s1", "circle, 3 vertices", s1, false},
        {"s2", "2-sphere, boundary of the tetrahedron", s2, false},
        {"t2", "torus, 7 vertices", t2, false},
        {"rp3", "real projective 3-space, antipodal quotient of the 4-cube boundary", rp3, false},
        {"s1xs2", "S^1 x S^2", s1xs2, false},
        {"s2_poles", "S^2 with the two poles as point strata", s2_poles, false},
        {"sigma_t2", "suspension of T^2", sigma_t2, true},
        {"sigma_s1xs2", "suspension of S^1 x S^2", sigma_s1xs2, true},
        {"sigma_sigma_t2", "double suspension of T^2", sigma_sigma_t2, true},
        {"sigma_t2_x_s1", "suspension of T^2 times S^1", sigma_t2_x_s1, true},
        {"sigma_rp3", "suspension of RP^3", sigma_rp3, true},
    };
    return e;
}

inline SpacePtr by_name(const std::string& n) {
    for (const auto& e : entries())
        if (e.name == n) return e.make();
    throw StructuralError("unknown corpus entry '" + n + "'");
}

}  // namespace kis::corpus
