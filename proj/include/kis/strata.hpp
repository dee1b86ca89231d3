#pragma once

#include "kis/cw.hpp"

#include <deque>
#include <map>
#include <optional>
#include <memory>
#include <unordered_map>

namespace kis {

// ---------------------------------------------------------------- perversities

struct Perversity {
    std::string name;
    std::map<int, int> values;  // codimension -> value
    bool gm = false;

    int at(int c) const {
        auto it = values.find(c);
        if (it == values.end())
            throw StructuralError("perversity '" + name + "' is not defined in codimension " + std::to_string(c));
        return it->second;
    }
    bool defined_at(int c) const { return values.count(c) != 0; }

    // Goresky-MacPherson growth conditions on the codimensions present.
    bool satisfies_gm() const {
        if (values.count(2) && values.at(2) != 0) return false;
        for (auto it = values.begin(); it != values.end(); ++it) {
            auto nx = std::next(it);
            if (nx == values.end() || nx->first != it->first + 1) continue;
            if (nx->second < it->second || nx->second > it->second + 1) return false;
        }
        return true;
    }
    friend bool operator==(const Perversity& a, const Perversity& b) { return a.values == b.values; }
};

inline int floor_div(int a, int b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

inline Perversity gm_perversity(char which, int d) {
    if (d < 2) throw StructuralError("GM perversities need dimension at least 2");
    Perversity p;
    p.gm = true;
    switch (which) {
        case 'm': p.name = "m"; break;
        case 'n': p.name = "n"; break;
        case '0': p.name = "0"; break;
        case 't': p.name = "t"; break;
        default: throw StructuralError(std::string("unknown perversity '") + which + "'");
    }
    for (int c = 2; c <= d; ++c) {
        int v = 0;
        if (which == 'm') v = floor_div(c - 2, 2);
        if (which == 'n') v = -floor_div(-(c - 2), 2);
        if (which == 't') v = c - 2;
        p.values[c] = v;
    }
    return p;
}

inline std::vector<Perversity> gm_perversities(int d) {
    return {gm_perversity('0', d), gm_perversity('m', d), gm_perversity('n', d), gm_perversity('t', d)};
}

inline std::string complement_name(const std::string& n) {
    if (n == "m") return "n";
    if (n == "n") return "m";
    if (n == "0") return "t";
    if (n == "t") return "0";
    return "D" + n;
}

// q(c) = c - 2 - p(c)
inline Perversity complement(const Perversity& p) {
    Perversity q;
    q.name = complement_name(p.name);
    q.gm = p.gm;
    for (auto& [c, v] : p.values) q.values[c] = c - 2 - v;
    return q;
}

// ---------------------------------------------------------------- CW products

// Cells a|b with [a'|b : a|b] = [a':a] and [a|b' : a|b] = (-1)^{dim a}[b':b].
inline CWPtr cw_product(const CWPoset& a, const CWPoset& b) {
    const int nb = b.size();
    std::vector<std::string> names;
    std::vector<int> dims;
    for (int i = 0; i < a.size(); ++i)
        for (int j = 0; j < nb; ++j) {
            names.push_back(a.name(i) + "|" + b.name(j));
            dims.push_back(a.dim(i) + b.dim(j));
        }
    std::vector<Cover> covers;
    for (const auto& c : a.covers())
        for (int j = 0; j < nb; ++j) covers.push_back({c.face * nb + j, c.coface * nb + j, c.sign});
    for (int i = 0; i < a.size(); ++i)
        for (const auto& c : b.covers())
            covers.push_back({i * nb + c.face, i * nb + c.coface, (a.dim(i) % 2 == 0 ? 1 : -1) * c.sign});
    return std::make_shared<const CWPoset>(std::move(names), std::move(dims), std::move(covers));
}

// ---------------------------------------------------------------- stratified spaces

struct StratifiedSpace;
using SpacePtr = std::shared_ptr<const StratifiedSpace>;
SpacePtr cone(const SpacePtr& s);

// One connected stratum. The tube is the open star of the stratum; each tube
// cell is labelled by (stratum cell, cell of the open cone on the link), the
// open cone sitting inside cone(link) as the star of its apex.
struct Stratum {
    int codim = 0;
    CellSet cells;
    CellSet tube;
    std::unordered_map<int, std::pair<int, int>> labels;
    SpacePtr link;

    SpacePtr slice() const {
        if (!slice_cache_) slice_cache_ = cone(link);
        return slice_cache_;
    }

private:
    mutable SpacePtr slice_cache_;
};

struct StratifiedSpace {
    std::string name;
    CWPtr x;
    int dim = 0;
    std::vector<Stratum> strata;  // increasing codimension

    // X_{d-c}: cells of strata of codimension >= c.
    CellSet skeleton(int c) const {
        CellSet s = x->empty_set();
        for (const auto& st : strata)
            if (st.codim >= c) s |= st.cells;
        return s;
    }
    CellSet singular() const {
        CellSet s = x->empty_set();
        for (const auto& st : strata) s |= st.cells;
        return s;
    }
    CellSet regular() const { return ~singular() & x->full_set(); }
    std::vector<int> codims() const {
        std::vector<int> c;
        for (const auto& st : strata)
            if (c.empty() || c.back() != st.codim) c.push_back(st.codim);
        return c;
    }
    int depth() const { return static_cast<int>(codims().size()); }
    // index of the stratum containing a cell, -1 for regular cells
    int stratum_of(int cell) const {
        for (std::size_t i = 0; i < strata.size(); ++i)
            if (strata[i].cells.test(static_cast<std::size_t>(cell))) return static_cast<int>(i);
        return -1;
    }
    // index of the apex of the open cone, for spaces produced by cone()
    int apex = -1;
    // cells the sheaf engine works on: the open cone for cones, else everything
    CellSet ambient() const { return apex >= 0 ? x->above(apex) : x->full_set(); }
};

inline SpacePtr smooth_space(std::string name, CWPtr x) {
    auto s = std::make_shared<StratifiedSpace>();
    s->name = std::move(name);
    s->dim = x->dim();
    s->x = std::move(x);
    return s;
}

namespace detail {

inline std::string fresh_name(const CWPoset& x, std::string base) {
    while (x.find(base)) base += "'";
    return base;
}

// prefix p such that no p(x) is already a cell name
inline std::string fresh_prefix(const CWPoset& x, std::string base) {
    for (;;) {
        bool clash = false;
        for (int i = 0; i < x.size() && !clash; ++i) clash = x.find(base + "(" + x.name(i) + ")").has_value();
        if (!clash) return base;
        base += "'";
    }
}

inline bool is_compact(const CWPoset& x) {
    auto r = validate_cw(x);
    return r.valid() && r.closed_pseudomanifold;
}

inline void sort_strata(std::vector<Stratum>& v) {
    std::stable_sort(v.begin(), v.end(), [](const Stratum& a, const Stratum& b) { return a.codim < b.codim; });
}

}  // namespace detail

// Cone on a compact space: cells x, c(x) and an apex. [x:c(x)] = 1,
// [c(t'):c(t)] = -[t':t], [apex:c(v)] = -1. Old strata become T u c(T);
// the apex is a new stratum of codimension d+1 with link S.
inline SpacePtr cone(const SpacePtr& s) {
    const CWPoset& x = *s->x;
    if (!detail::is_compact(x)) throw StructuralError("cone needs a compact input (" + s->name + ")");
    const int n = x.size();
    std::vector<std::string> names = x.names();
    std::vector<int> dims;
    for (int i = 0; i < n; ++i) dims.push_back(x.dim(i));
    const std::string cp = detail::fresh_prefix(x, "c");
    for (int i = 0; i < n; ++i) {
        names.push_back(cp + "(" + x.name(i) + ")");
        dims.push_back(x.dim(i) + 1);
    }
    names.push_back(detail::fresh_name(x, "*"));
    dims.push_back(0);
    const int apex = 2 * n;
    std::vector<Cover> covers = x.covers();
    for (int i = 0; i < n; ++i) covers.push_back({i, n + i, 1});
    for (const auto& c : x.covers()) covers.push_back({n + c.face, n + c.coface, -c.sign});
    for (int v : x.cells_of_dim(0)) covers.push_back({apex, n + v, -1});
    auto out = std::make_shared<StratifiedSpace>();
    out->name = "c(" + s->name + ")";
    out->x = std::make_shared<const CWPoset>(std::move(names), std::move(dims), std::move(covers));
    out->dim = s->dim + 1;
    out->apex = apex;
    const CWPoset& y = *out->x;
    for (const auto& t : s->strata) {
        Stratum st;
        st.codim = t.codim;
        st.link = t.link;
        st.cells = y.empty_set();
        st.tube = y.empty_set();
        for_each_cell(t.cells, [&](int c) {
            st.cells.set(static_cast<std::size_t>(c));
            st.cells.set(static_cast<std::size_t>(n + c));
        });
        for_each_cell(t.tube, [&](int c) {
            st.tube.set(static_cast<std::size_t>(c));
            st.tube.set(static_cast<std::size_t>(n + c));
            auto [a, z] = t.labels.at(c);
            st.labels[c] = {a, z};
            st.labels[n + c] = {n + a, z};
        });
        out->strata.push_back(std::move(st));
    }
    Stratum top;
    top.codim = s->dim + 1;
    top.link = s;
    top.cells = y.empty_set();
    top.cells.set(static_cast<std::size_t>(apex));
    top.tube = y.above(apex);
    for_each_cell(top.tube, [&](int c) { top.labels[c] = {apex, c}; });
    out->strata.push_back(std::move(top));
    detail::sort_strata(out->strata);
    return out;
}

// Two cones glued along S. Cells x, n(x), s(x) and poles N, S with the cone
// sign rule on both halves.
inline SpacePtr suspension(const SpacePtr& s) {
    const CWPoset& x = *s->x;
    if (!detail::is_compact(x)) throw StructuralError("suspension needs a compact input (" + s->name + ")");
    const int n = x.size();
    std::vector<std::string> names = x.names();
    std::vector<int> dims;
    for (int i = 0; i < n; ++i) dims.push_back(x.dim(i));
    for (const std::string& p : {detail::fresh_prefix(x, "n"), detail::fresh_prefix(x, "s")})
        for (int i = 0; i < n; ++i) {
            names.push_back(p + "(" + x.name(i) + ")");
            dims.push_back(x.dim(i) + 1);
        }
    std::string north = detail::fresh_name(x, "N");
    std::string south = detail::fresh_name(x, "S");
    names.push_back(north);
    names.push_back(south);
    dims.push_back(0);
    dims.push_back(0);
    const int pole[2] = {3 * n, 3 * n + 1};
    std::vector<Cover> covers = x.covers();
    for (int h = 0; h < 2; ++h) {
        const int off = (h + 1) * n;
        for (int i = 0; i < n; ++i) covers.push_back({i, off + i, 1});
        for (const auto& c : x.covers()) covers.push_back({off + c.face, off + c.coface, -c.sign});
        for (int v : x.cells_of_dim(0)) covers.push_back({pole[h], off + v, -1});
    }
    auto out = std::make_shared<StratifiedSpace>();
    out->name = "S(" + s->name + ")";
    out->x = std::make_shared<const CWPoset>(std::move(names), std::move(dims), std::move(covers));
    out->dim = s->dim + 1;
    const CWPoset& y = *out->x;
    for (const auto& t : s->strata) {
        Stratum st;
        st.codim = t.codim;
        st.link = t.link;
        st.cells = y.empty_set();
        st.tube = y.empty_set();
        for (int h = 0; h < 3; ++h) {
            const int off = h * n;
            for_each_cell(t.cells, [&](int c) { st.cells.set(static_cast<std::size_t>(off + c)); });
            for_each_cell(t.tube, [&](int c) {
                st.tube.set(static_cast<std::size_t>(off + c));
                auto [a, z] = t.labels.at(c);
                st.labels[off + c] = {off + a, z};
            });
        }
        out->strata.push_back(std::move(st));
    }
    // the open cone inside cone(S) uses apex 2n and c(x) = n + x
    for (int h = 0; h < 2; ++h) {
        Stratum st;
        st.codim = s->dim + 1;
        st.link = s;
        st.cells = y.empty_set();
        st.cells.set(static_cast<std::size_t>(pole[h]));
        st.tube = y.above(pole[h]);
        const int off = (h + 1) * n;
        st.labels[pole[h]] = {pole[h], 2 * n};
        for (int i = 0; i < n; ++i) st.labels[off + i] = {pole[h], n + i};
        out->strata.push_back(std::move(st));
    }
    detail::sort_strata(out->strata);
    return out;
}

// S x M for a closed manifold model M. Strata T x M (split into components),
// labels (s|m, z), links unchanged.
inline SpacePtr product(const SpacePtr& s, const CWPtr& m, const std::string& m_name = "M") {
    auto rm = validate_cw(*m);
    if (!rm.manifold_like()) throw StructuralError("product needs a closed manifold model as second factor");
    const CWPoset& x = *s->x;
    const int nm = m->size();
    auto out = std::make_shared<StratifiedSpace>();
    out->name = s->name + "x" + m_name;
    out->x = cw_product(x, *m);
    out->dim = s->dim + m->dim();
    const CWPoset& y = *out->x;
    auto comps = components(*m, m->full_set());
    for (const auto& t : s->strata) {
        for (const auto& comp : comps) {
            Stratum st;
            st.codim = t.codim;
            st.link = t.link;
            st.cells = y.empty_set();
            st.tube = y.empty_set();
            CellSet mc = m->empty_set();
            for (int j : comp) mc.set(static_cast<std::size_t>(j));
            for_each_cell(t.cells, [&](int c) {
                for (int j : comp) st.cells.set(static_cast<std::size_t>(c * nm + j));
            });
            for_each_cell(t.tube, [&](int c) {
                auto [a, z] = t.labels.at(c);
                for (int j : comp) {
                    st.tube.set(static_cast<std::size_t>(c * nm + j));
                    st.labels[c * nm + j] = {a * nm + j, z};
                }
            });
            out->strata.push_back(std::move(st));
        }
    }
    detail::sort_strata(out->strata);
    return out;
}

// ---------------------------------------------------------------- validation

struct StratificationReport {
    std::vector<std::string> violations;
    std::vector<std::string> notes;
    std::vector<int> codims;
    int depth = 0;
    CWReport cw;
    bool valid() const { return violations.empty(); }
};

// Signs eta on tube cells with eta(a) eta(b) [a:b] equal to the product rule
// [s':s] resp. (-1)^{dim s}[z':z] on every cover inside the tube. Returns
// nothing when the labels are not a product or no such signs exist.
inline std::optional<std::unordered_map<int, int>> product_twist(const StratifiedSpace& sp, const Stratum& st,
                                                                 std::string* why = nullptr) {
    const CWPoset& x = *sp.x;
    SpacePtr sl = st.slice();
    const CWPoset& z = *sl->x;
    const int apex = sl->apex;
    auto fail = [&](std::string m) -> std::optional<std::unordered_map<int, int>> {
        if (why) *why = std::move(m);
        return std::nullopt;
    };
    // bijection onto stratum cells x open-cone cells, dimensions additive
    std::map<std::pair<int, int>, int> inv;
    for_each_cell(st.tube, [&](int c) {
        auto it = st.labels.find(c);
        if (it == st.labels.end()) return;
        inv[it->second] = c;
    });
    if (st.labels.size() != st.tube.count() || inv.size() != st.labels.size())
        return fail("labels are not a bijection on the tube");
    std::size_t expect = st.cells.count() * z.above(apex).count();
    if (inv.size() != expect) return fail("labels do not cover stratum cells x open cone");
    for (auto& [c, lab] : st.labels) {
        auto [a, w] = lab;
        if (!st.cells.test(static_cast<std::size_t>(a))) return fail("label of " + x.name(c) + " leaves the stratum");
        if (w < 0 || w >= z.size() || !z.leq(apex, w)) return fail("label of " + x.name(c) + " leaves the open cone");
        if (x.dim(c) != x.dim(a) + z.dim(w)) return fail("label of " + x.name(c) + " is not dimension additive");
        if (w == apex && a != c) return fail("stratum cell " + x.name(c) + " is not labelled by itself");
    }
    // covers inside the tube must be exactly the product covers
    std::unordered_map<int, std::vector<std::pair<int, int>>> adj;
    std::size_t inside = 0;
    for (const auto& cv : x.covers()) {
        if (!st.tube.test(static_cast<std::size_t>(cv.face)) || !st.tube.test(static_cast<std::size_t>(cv.coface)))
            continue;
        ++inside;
        auto [a1, w1] = st.labels.at(cv.face);
        auto [a2, w2] = st.labels.at(cv.coface);
        int expected = 0;
        if (w1 == w2) {
            expected = x.incidence(a1, a2);
        } else if (a1 == a2) {
            int zi = z.incidence(w1, w2);
            expected = zi == 0 ? 0 : (x.dim(a1) % 2 == 0 ? zi : -zi);
        }
        if (expected == 0)
            return fail("cover " + x.name(cv.face) + " < " + x.name(cv.coface) + " is not a product cover");
        int rel = expected * cv.sign;  // eta(face) * eta(coface)
        adj[cv.face].emplace_back(cv.coface, rel);
        adj[cv.coface].emplace_back(cv.face, rel);
    }
    std::size_t product_covers = 0;
    for_each_cell(st.cells, [&](int a) {
        for (int k : x.up_covers(a))
            if (st.cells.test(static_cast<std::size_t>(x.cover(k).coface))) product_covers += z.above(apex).count();
    });
    for_each_cell(z.above(apex), [&](int w) {
        for (int k : z.up_covers(w)) (void)k, product_covers += st.cells.count();
    });
    if (inside != product_covers) return fail("tube has " + std::to_string(inside) + " covers, product has " +
                                              std::to_string(product_covers));
    std::unordered_map<int, int> eta;
    bool ok = true;
    for_each_cell(st.tube, [&](int c0) {
        if (eta.count(c0) || !ok) return;
        eta[c0] = 1;
        std::deque<int> q{c0};
        while (!q.empty() && ok) {
            int a = q.front();
            q.pop_front();
            for (auto [b, rel] : adj[a]) {
                int want = rel * eta[a];
                auto it = eta.find(b);
                if (it == eta.end()) {
                    eta[b] = want;
                    q.push_back(b);
                } else if (it->second != want) {
                    ok = false;
                }
            }
        }
    });
    if (!ok) return fail("incidence signs are not a twisted product (Koszul rule)");
    return eta;
}

inline StratificationReport validate_stratification(const StratifiedSpace& sp) {
    StratificationReport r;
    const CWPoset& x = *sp.x;
    r.cw = validate_cw(x);
    for (auto& v : r.cw.violations) r.violations.push_back("cw: " + v);
    if (!r.cw.valid()) return r;
    if (!r.cw.pure) r.violations.push_back("pseudomanifold: top dimension is not pure");
    if (!r.cw.closed_pseudomanifold) r.violations.push_back("pseudomanifold: some (d-1)-cell is not in two d-cells");
    if (x.dim() != sp.dim) r.violations.push_back("declared dimension differs from the cell dimension");
    r.codims = sp.codims();
    r.depth = sp.depth();
    CellSet seen = x.empty_set();
    int prev = 0;
    for (std::size_t i = 0; i < sp.strata.size(); ++i) {
        const auto& st = sp.strata[i];
        std::string tag = "stratum " + std::to_string(i) + " (codim " + std::to_string(st.codim) + ")";
        if (st.codim < 2) r.violations.push_back(tag + ": codimension below 2");
        if (st.codim < prev) r.violations.push_back(tag + ": strata not sorted by codimension");
        prev = st.codim;
        if ((seen & st.cells).any()) r.violations.push_back(tag + ": overlaps an earlier stratum");
        seen |= st.cells;
        if (st.cells.none()) {
            r.violations.push_back(tag + ": empty");
            continue;
        }
        if (components(x, st.cells).size() != 1) r.violations.push_back(tag + ": not connected");
        int top = 0;
        for_each_cell(st.cells, [&](int c) { top = std::max(top, x.dim(c)); });
        if (top != sp.dim - st.codim) r.violations.push_back(tag + ": cell dimension does not match codimension");
        if (!(up_closure(x, st.cells) == st.tube)) r.violations.push_back(tag + ": tube is not the open star");
        if (!st.link) {
            r.violations.push_back(tag + ": missing link");
            continue;
        }
        if (st.link->dim != st.codim - 1) r.violations.push_back(tag + ": link has the wrong dimension");
        auto lr = validate_stratification(*st.link);
        for (auto& v : lr.violations) r.violations.push_back(tag + " link: " + v);
        std::string why;
        if (!product_twist(sp, st, &why)) r.violations.push_back(tag + ": product labels: " + why);
    }
    // each filtration step must be closed
    for (int c : r.codims) {
        CellSet sk = sp.skeleton(c);
        if (!is_downward_closed(x, sk))
            r.violations.push_back("filtration step X_{d-" + std::to_string(c) + "} is not closed");
    }
    // regular part dense: every singular cell is a face of a regular top cell
    CellSet reg = sp.regular();
    for_each_cell(sp.singular(), [&](int c) {
        bool ok = false;
        for_each_cell(x.above(c) & reg, [&](int t) { ok |= x.dim(t) == sp.dim; });
        if (!ok) r.violations.push_back("singular cell " + x.name(c) + " is not in the closure of the regular part");
    });
    return r;
}

// Strata as the connected components of each difference X_{d-c} \ X_{d-c'}
// of a filtration given by closed sets. Links and labels are not derived.
inline std::vector<CellSet> filtration_components(const CWPoset& x, const std::vector<std::pair<int, CellSet>>& filt,
                                                  std::vector<int>* codims) {
    std::vector<CellSet> out;
    for (std::size_t i = 0; i < filt.size(); ++i) {
        CellSet diff = filt[i].second;
        if (i + 1 < filt.size()) diff &= ~filt[i + 1].second;
        for (const auto& comp : components(x, diff)) {
            CellSet s = x.empty_set();
            for (int c : comp) s.set(static_cast<std::size_t>(c));
            out.push_back(s);
            if (codims) codims->push_back(filt[i].first);
        }
    }
    return out;
}

}  // namespace kis
