#pragma once

#include "kis/sparse_matrix.hpp"

#include <boost/dynamic_bitset.hpp>

#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

namespace kis {

using CellSet = boost::dynamic_bitset<std::uint64_t>;

template <class Fn>
void for_each_cell(const CellSet& s, Fn&& fn) {
    for (auto i = s.find_first(); i != CellSet::npos; i = s.find_next(i)) fn(static_cast<int>(i));
}

inline std::vector<int> cells_of(const CellSet& s) {
    std::vector<int> v;
    for_each_cell(s, [&](int c) { v.push_back(c); });
    return v;
}

struct Cover {
    int face;
    int coface;
    int sign;
};

// Finite face poset of a regular CW complex with signed incidences.
// Construction only rejects unknown or duplicate ids; every other defect is
// reported by validate_cw.
class CWPoset {
public:
    CWPoset() = default;

    CWPoset(std::vector<std::string> names, std::vector<int> dims, std::vector<Cover> covers)
        : names_(std::move(names)), dims_(std::move(dims)), covers_(std::move(covers)) {
        if (names_.size() != dims_.size()) throw StructuralError("cell names and dimensions differ in length");
        for (std::size_t i = 0; i < names_.size(); ++i) {
            if (!index_.emplace(names_[i], static_cast<int>(i)).second)
                throw StructuralError("duplicate cell id '" + names_[i] + "'");
            if (dims_[i] < 0) throw StructuralError("negative dimension for cell '" + names_[i] + "'");
            dim_ = std::max(dim_, dims_[i]);
        }
        up_.resize(names_.size());
        down_.resize(names_.size());
        for (std::size_t k = 0; k < covers_.size(); ++k) {
            const auto& c = covers_[k];
            if (c.face < 0 || c.coface < 0 || c.face >= size() || c.coface >= size())
                throw StructuralError("cover refers to an unknown cell");
            up_[c.face].push_back(static_cast<int>(k));
            down_[c.coface].push_back(static_cast<int>(k));
        }
        build_order();
    }

    int size() const { return static_cast<int>(names_.size()); }
    int dim() const { return dim_; }
    int dim(int c) const { return dims_[c]; }
    const std::string& name(int c) const { return names_[c]; }
    const std::vector<std::string>& names() const { return names_; }
    const std::vector<Cover>& covers() const { return covers_; }
    const Cover& cover(int k) const { return covers_[k]; }
    const std::vector<int>& up_covers(int c) const { return up_[c]; }      // indices into covers()
    const std::vector<int>& down_covers(int c) const { return down_[c]; }  // indices into covers()
    bool acyclic() const { return acyclic_; }

    int index(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) throw StructuralError("unknown cell id '" + name + "'");
        return it->second;
    }
    std::optional<int> find(const std::string& name) const {
        auto it = index_.find(name);
        if (it == index_.end()) return std::nullopt;
        return it->second;
    }

    bool leq(int a, int b) const { return above_[a].test(static_cast<std::size_t>(b)); }
    const CellSet& above(int c) const { return above_[c]; }  // {t : t >= c}
    const CellSet& below(int c) const { return below_[c]; }  // {t : t <= c}
    CellSet empty_set() const { return CellSet(static_cast<std::size_t>(size())); }
    CellSet full_set() const {
        CellSet s(static_cast<std::size_t>(size()));
        s.set();
        return s;
    }

    // Signed incidence of a covering pair, 0 if not a cover.
    int incidence(int face, int coface) const {
        for (int k : up_[face])
            if (covers_[k].coface == coface) return covers_[k].sign;
        return 0;
    }

    std::vector<int> cells_of_dim(int k) const {
        std::vector<int> v;
        for (int c = 0; c < size(); ++c)
            if (dims_[c] == k) v.push_back(c);
        return v;
    }

    long long euler() const {
        long long e = 0;
        for (int c = 0; c < size(); ++c) e += dims_[c] % 2 == 0 ? 1 : -1;
        return e;
    }

private:
    void build_order() {
        const auto n = static_cast<std::size_t>(size());
        above_.assign(n, CellSet(n));
        below_.assign(n, CellSet(n));
        // Kahn order on the cover graph; a leftover cell means a cycle.
        std::vector<int> indeg(n, 0);
        for (const auto& c : covers_) ++indeg[c.coface];
        std::deque<int> queue;
        for (std::size_t i = 0; i < n; ++i)
            if (indeg[i] == 0) queue.push_back(static_cast<int>(i));
        std::vector<int> topo;
        while (!queue.empty()) {
            int c = queue.front();
            queue.pop_front();
            topo.push_back(c);
            for (int k : up_[c])
                if (--indeg[covers_[k].coface] == 0) queue.push_back(covers_[k].coface);
        }
        acyclic_ = topo.size() == n;
        if (!acyclic_) return;
        for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
            int c = *it;
            above_[c].set(static_cast<std::size_t>(c));
            for (int k : up_[c]) above_[c] |= above_[covers_[k].coface];
        }
        for (int c : topo) {
            below_[c].set(static_cast<std::size_t>(c));
            for (int k : down_[c]) below_[c] |= below_[covers_[k].face];
        }
    }

    std::vector<std::string> names_;
    std::vector<int> dims_;
    std::vector<Cover> covers_;
    std::vector<std::vector<int>> up_, down_;
    std::unordered_map<std::string, int> index_;
    std::vector<CellSet> above_, below_;
    int dim_ = -1;
    bool acyclic_ = true;
};

using CWPtr = std::shared_ptr<const CWPoset>;

// ---------------------------------------------------------------- diagnostics

struct CWReport {
    std::vector<std::string> violations;  // CWPoset invariants
    std::vector<std::string> notes;       // pseudomanifold diagnostics
    bool pure = true;
    bool closed_pseudomanifold = true;    // every (d-1)-cell in exactly two d-cells
    bool has_boundary = false;            // some (d-1)-cell in exactly one d-cell
    bool orientable = false;
    std::vector<int> orientation;         // +-1 per cell of top dimension (0 elsewhere)
    long long euler = 0;

    bool valid() const { return violations.empty(); }
    bool manifold_like() const { return valid() && pure && closed_pseudomanifold; }
};

inline CWReport validate_cw(const CWPoset& x) {
    CWReport r;
    r.euler = x.euler();
    if (!x.acyclic()) r.violations.push_back("face relation has a cycle");

    std::map<std::pair<int, int>, std::set<int>> signs;
    for (const auto& c : x.covers()) {
        if (x.dim(c.coface) != x.dim(c.face) + 1)
            r.violations.push_back("cover " + x.name(c.face) + " < " + x.name(c.coface) + " does not raise dimension by one");
        if (c.sign != 1 && c.sign != -1)
            r.violations.push_back("cover " + x.name(c.face) + " < " + x.name(c.coface) + " has sign " +
                                   std::to_string(c.sign));
        signs[{c.face, c.coface}].insert(c.sign);
    }
    for (auto& [pr, s] : signs) {
        if (s.size() > 1)
            r.violations.push_back("regularity: pair " + x.name(pr.first) + " < " + x.name(pr.second) +
                                   " carries several incidences");
    }
    for (int c = 0; c < x.size(); ++c) {
        if (x.dim(c) == 1 && x.down_covers(c).size() != 2)
            r.violations.push_back("regularity: 1-cell " + x.name(c) + " does not have two distinct vertices");
    }
    if (!r.violations.empty()) return r;

    // signed diamond: for sigma < rho two levels apart, sum over middles vanishes
    for (int s = 0; s < x.size(); ++s) {
        std::map<int, long long> sum;
        std::map<int, int> count;
        for (int k1 : x.up_covers(s)) {
            const auto& c1 = x.cover(k1);
            for (int k2 : x.up_covers(c1.coface)) {
                const auto& c2 = x.cover(k2);
                sum[c2.coface] += static_cast<long long>(c1.sign) * c2.sign;
                ++count[c2.coface];
            }
        }
        for (auto& [rho, v] : sum) {
            if (v != 0)
                r.violations.push_back("signed diamond fails for " + x.name(s) + " < " + x.name(rho));
            else if (count[rho] != 2)
                r.notes.push_back("interval " + x.name(s) + " < " + x.name(rho) + " has " + std::to_string(count[rho]) +
                                  " middle cells");
        }
    }

    const int d = x.dim();
    for (int c = 0; c < x.size(); ++c) {
        if (x.dim(c) < d && x.up_covers(c).empty()) {
            r.pure = false;
            r.notes.push_back("purity: cell " + x.name(c) + " is not a face of a top cell");
        }
    }
    r.orientation.assign(static_cast<std::size_t>(x.size()), 0);
    if (d < 1) {
        r.orientable = true;
        for (int c : x.cells_of_dim(0)) r.orientation[c] = 1;
        return r;
    }
    // Coherent orientation: eps(t1)[f:t1] + eps(t2)[f:t2] = 0 across every (d-1)-cell f.
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(x.size()));
    for (int f : x.cells_of_dim(d - 1)) {
        const auto& ups = x.up_covers(f);
        if (ups.size() != 2) {
            r.closed_pseudomanifold = false;
            if (ups.size() == 1) r.has_boundary = true;
            r.notes.push_back("(d-1)-cell " + x.name(f) + " lies in " + std::to_string(ups.size()) + " top cells");
            continue;
        }
        const auto& a = x.cover(ups[0]);
        const auto& b = x.cover(ups[1]);
        int rel = -a.sign * b.sign;  // eps(b) = rel * eps(a)
        adj[a.coface].emplace_back(b.coface, rel);
        adj[b.coface].emplace_back(a.coface, rel);
    }
    bool ok = true;
    for (int t : x.cells_of_dim(d)) {
        if (r.orientation[t] != 0) continue;
        r.orientation[t] = 1;
        std::deque<int> q{t};
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            for (auto [v, rel] : adj[u]) {
                int want = rel * r.orientation[u];
                if (r.orientation[v] == 0) {
                    r.orientation[v] = want;
                    q.push_back(v);
                } else if (r.orientation[v] != want) {
                    ok = false;
                }
            }
        }
    }
    r.orientable = ok;
    if (!ok) r.notes.push_back("no coherent orientation of top cells");
    return r;
}

// ---------------------------------------------------------------- regions

enum class RegionKind { open, closed, locally_closed };

struct Region {
    RegionKind kind = RegionKind::open;
    CellSet cells;
    CellSet open_part;    // locally closed: cells = open_part & closed_part
    CellSet closed_part;

    bool contains(int c) const { return cells.test(static_cast<std::size_t>(c)); }
    std::size_t size() const { return cells.count(); }
};

inline bool is_upward_closed(const CWPoset& x, const CellSet& s) {
    bool ok = true;
    for_each_cell(s, [&](int c) {
        if (!x.above(c).is_subset_of(s)) ok = false;
    });
    return ok;
}

inline bool is_downward_closed(const CWPoset& x, const CellSet& s) {
    bool ok = true;
    for_each_cell(s, [&](int c) {
        if (!x.below(c).is_subset_of(s)) ok = false;
    });
    return ok;
}

// Upward closure is open; downward closure is closed.
inline CellSet up_closure(const CWPoset& x, const CellSet& s) {
    CellSet out = x.empty_set();
    for_each_cell(s, [&](int c) { out |= x.above(c); });
    return out;
}
inline CellSet down_closure(const CWPoset& x, const CellSet& s) {
    CellSet out = x.empty_set();
    for_each_cell(s, [&](int c) { out |= x.below(c); });
    return out;
}

inline Region open_region(const CWPoset& x, CellSet s) {
    if (!is_upward_closed(x, s)) throw StructuralError("region is not open (not upward-closed)");
    Region r;
    r.kind = RegionKind::open;
    r.cells = std::move(s);
    return r;
}

inline Region closed_region(const CWPoset& x, CellSet s) {
    if (!is_downward_closed(x, s)) throw StructuralError("region is not closed (not downward-closed)");
    Region r;
    r.kind = RegionKind::closed;
    r.cells = std::move(s);
    return r;
}

inline Region locally_closed_region(const CWPoset& x, CellSet open, CellSet closed) {
    if (!is_upward_closed(x, open)) throw StructuralError("open part of a locally closed region is not open");
    if (!is_downward_closed(x, closed)) throw StructuralError("closed part of a locally closed region is not closed");
    Region r;
    r.kind = RegionKind::locally_closed;
    r.cells = open & closed;
    r.open_part = std::move(open);
    r.closed_part = std::move(closed);
    return r;
}

inline Region whole(const CWPoset& x) { return open_region(x, x.full_set()); }

inline Region open_star(const CWPoset& x, int c) {
    if (c < 0 || c >= x.size()) throw StructuralError("open_star of an unknown cell");
    return open_region(x, x.above(c));
}

// Connected components of a cell set under the cover relation restricted to it.
inline std::vector<std::vector<int>> components(const CWPoset& x, const CellSet& s) {
    std::vector<std::vector<int>> out;
    CellSet seen = x.empty_set();
    for_each_cell(s, [&](int c0) {
        if (seen.test(static_cast<std::size_t>(c0))) return;
        std::vector<int> comp;
        std::deque<int> q{c0};
        seen.set(static_cast<std::size_t>(c0));
        while (!q.empty()) {
            int u = q.front();
            q.pop_front();
            comp.push_back(u);
            auto visit = [&](int v) {
                if (s.test(static_cast<std::size_t>(v)) && !seen.test(static_cast<std::size_t>(v))) {
                    seen.set(static_cast<std::size_t>(v));
                    q.push_back(v);
                }
            };
            for (int k : x.up_covers(u)) visit(x.cover(k).coface);
            for (int k : x.down_covers(u)) visit(x.cover(k).face);
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    });
    return out;
}

// Strictly increasing chains of the poset inside `s`, grouped by first cell.
// Each chain is stored as its list of cells.
inline std::vector<std::vector<int>> chains_in(const CWPoset& x, const CellSet& s) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur;
    // cofaces inside s, sorted, for each cell of s
    std::function<void(int)> extend = [&](int last) {
        out.push_back(cur);
        CellSet nxt = x.above(last) & s;
        nxt.reset(static_cast<std::size_t>(last));
        for_each_cell(nxt, [&](int t) {
            cur.push_back(t);
            extend(t);
            cur.pop_back();
        });
    };
    for_each_cell(s, [&](int c) {
        cur.assign(1, c);
        extend(c);
    });
    return out;
}

}  // namespace kis
