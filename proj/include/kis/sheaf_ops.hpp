#pragma once

#include "kis/sheaf.hpp"

#include <functional>

namespace kis {

// ---------------------------------------------------------------- constructors

inline SheafComplex constant_sheaf(CWPtr x, const GradedComplex& v, std::optional<CellSet> domain = std::nullopt) {
    CellSet dom = domain ? *domain : x->full_set();
    std::vector<GradedComplex> st(static_cast<std::size_t>(x->size()));
    std::vector<ChainMap> mp(x->covers().size());
    for (int c = 0; c < x->size(); ++c)
        if (dom.test(static_cast<std::size_t>(c))) st[c] = v;
    for (std::size_t k = 0; k < mp.size(); ++k) {
        const auto& cv = x->cover(static_cast<int>(k));
        mp[k] = dom.test(static_cast<std::size_t>(cv.face)) && dom.test(static_cast<std::size_t>(cv.coface))
                    ? ChainMap::identity(v)
                    : ChainMap::zero(st[cv.face], st[cv.coface]);
    }
    return SheafComplex::from_stalks(std::move(x), std::move(dom), std::move(st), std::move(mp), Check::no);
}

inline SheafComplex constant_sheaf(CWPtr x) { return constant_sheaf(std::move(x), GradedComplex::point()); }

// Q at one cell, extended by zero (a closed point gives j_* Q).
inline SheafComplex skyscraper(CWPtr x, int cell, const GradedComplex& v = GradedComplex::point()) {
    CellSet only = x->empty_set();
    only.set(static_cast<std::size_t>(cell));
    std::vector<GradedComplex> st(static_cast<std::size_t>(x->size()));
    st[cell] = v;
    std::vector<ChainMap> mp(x->covers().size());
    for (std::size_t k = 0; k < mp.size(); ++k) {
        const auto& cv = x->cover(static_cast<int>(k));
        mp[k] = ChainMap::zero(st[cv.face], st[cv.coface]);
    }
    return SheafComplex::from_stalks(x, x->full_set(), std::move(st), std::move(mp), Check::no);
}

// Supported sheaf from generators listed per degree; a convenience for
// assembling models cell by cell.
struct SupportedBuilder {
    CWPtr base;
    std::map<int, std::vector<Gen>> gens;
    std::map<int, std::vector<std::tuple<std::size_t, std::size_t, Rational>>> entries;  // degree of source

    std::size_t add(int degree, Gen g) {
        auto& v = gens[degree];
        v.push_back(g);
        return v.size() - 1;
    }
    void entry(int src_degree, std::size_t row, std::size_t col, Rational v) {
        entries[src_degree].emplace_back(row, col, std::move(v));
    }
    SheafComplex build(CellSet domain, Check check = Check::yes) {
        if (gens.empty()) return SheafComplex::from_supported(base, std::move(domain), GradedComplex(), {}, check);
        int lo = gens.begin()->first, hi = gens.rbegin()->first;
        std::vector<std::size_t> dims;
        std::vector<RatMatrix> d;
        for (int k = lo; k <= hi; ++k) {
            auto it = gens.find(k);
            std::size_t n = it == gens.end() ? 0 : it->second.size();
            auto it1 = gens.find(k + 1);
            std::size_t n1 = it1 == gens.end() ? 0 : it1->second.size();
            dims.push_back(n);
            auto e = entries.find(k);
            d.push_back(e == entries.end() ? RatMatrix(n1, n) : RatMatrix::from_triplets(n1, n, std::move(e->second)));
        }
        GenList g;
        for (auto& [k, v] : gens)
            if (!v.empty()) g.emplace(k, std::move(v));
        GradedComplex total(lo, std::move(dims), std::move(d), check);
        return SheafComplex::from_supported(base, std::move(domain), std::move(total), std::move(g), check);
    }
};

// Re-lists generators after a selection; `keep` is a sub-quotient selection.
inline GenList select_gens(const GenList& g, const Selection& keep) {
    GenList out;
    for (auto& [k, idx] : keep) {
        if (idx.empty()) continue;
        auto& v = out[k];
        for (auto i : idx) v.push_back(g.at(k)[i]);
    }
    return out;
}

// ---------------------------------------------------------------- restriction

// F restricted to R (intersected with F's domain). Open subsets of a
// supported sheaf stay supported; everything else is written out as stalks.
inline SheafComplex restrict(const SheafComplex& f, const CellSet& r) {
    CellSet dom = f.domain() & r;
    const CWPoset& x = f.base();
    if (f.form() == SheafComplex::Form::supported && is_upward_closed(x, dom)) {
        Selection keep = f.selection_of(dom);
        return SheafComplex::from_supported(f.base_ptr(), dom, select_quotient(f.total(), keep),
                                            select_gens(f.gens(), keep), Check::no);
    }
    std::vector<GradedComplex> st(static_cast<std::size_t>(x.size()));
    std::vector<ChainMap> mp(x.covers().size());
    for (int c = 0; c < x.size(); ++c)
        if (dom.test(static_cast<std::size_t>(c))) st[c] = f.stalk(c);
    for (int k = 0; k < static_cast<int>(mp.size()); ++k) {
        const auto& cv = x.cover(k);
        bool in = dom.test(static_cast<std::size_t>(cv.face)) && dom.test(static_cast<std::size_t>(cv.coface));
        mp[k] = in ? f.cover_map(k) : ChainMap::zero(st[cv.face], st[cv.coface]);
    }
    return SheafComplex::from_stalks(f.base_ptr(), dom, std::move(st), std::move(mp), Check::no);
}

inline SheafComplex restrict(const SheafComplex& f, const Region& r) { return restrict(f, r.cells); }

// ---------------------------------------------------------------- bar model

struct ChainHash {
    std::size_t operator()(const std::vector<int>& v) const {
        std::size_t h = 1469598103934665603ULL;
        for (int c : v) h = (h ^ static_cast<std::size_t>(c)) * 1099511628211ULL;
        return h;
    }
};

// Poset bar construction of F over the open set U: generators are
// (chain s_0 < ... < s_p in U, basis vector of F(s_p)) in degree p + q,
// supported at s_0. Its global complex is RGamma(U, F) and, viewed as a
// supported sheaf on the whole base, it is the derived pushforward of F|U.
struct BarModel {
    GradedComplex total;
    GenList gens;
    std::vector<std::vector<int>> chains;
    std::unordered_map<std::vector<int>, int, ChainHash> chain_id;
    std::vector<std::map<int, std::size_t>> offset;  // chain -> (stalk degree -> first index)
};

inline BarModel bar_model(const SheafComplex& f, const CellSet& u) {
    const CWPoset& x = f.base();
    BarModel b;
    b.chains = chains_in(x, u);
    for (std::size_t i = 0; i < b.chains.size(); ++i) b.chain_id.emplace(b.chains[i], static_cast<int>(i));
    b.offset.resize(b.chains.size());
    std::map<int, std::size_t> count;
    std::vector<GradedComplex> stalk(static_cast<std::size_t>(x.size()));
    for_each_cell(u, [&](int c) { stalk[c] = f.stalk(c); });
    for (std::size_t i = 0; i < b.chains.size(); ++i) {
        const auto& ch = b.chains[i];
        int p = static_cast<int>(ch.size()) - 1;
        const auto& s = stalk[ch.back()];
        for (int q = s.lo(); q <= s.hi(); ++q) {
            if (s.dim(q) == 0) continue;
            auto& v = b.gens[p + q];
            b.offset[i][q] = v.size();
            for (std::size_t w = 0; w < s.dim(q); ++w)
                v.push_back(Gen{ch.front(), 0, static_cast<int>(i)});
        }
    }
    std::map<int, std::vector<std::tuple<std::size_t, std::size_t, Rational>>> trip;
    for (std::size_t i = 0; i < b.chains.size(); ++i) {
        const auto& ch = b.chains[i];
        const int p = static_cast<int>(ch.size()) - 1;
        const int last = ch.back();
        const auto& s = stalk[last];
        if (s.is_zero()) continue;
        // insertions that keep the last element, with their sign
        std::vector<std::pair<int, int>> inner;  // (target chain, sign)
        for (int pos = 0; pos <= p; ++pos) {
            CellSet cand = x.below(ch[pos]) & u;
            cand.reset(static_cast<std::size_t>(ch[pos]));
            if (pos > 0) {
                cand &= x.above(ch[pos - 1]);
                cand.reset(static_cast<std::size_t>(ch[pos - 1]));
            }
            for_each_cell(cand, [&](int t) {
                std::vector<int> c2 = ch;
                c2.insert(c2.begin() + pos, t);
                inner.emplace_back(b.chain_id.at(c2), pos % 2 == 0 ? 1 : -1);
            });
        }
        std::vector<std::pair<int, int>> tail;  // (target chain, new last cell)
        CellSet up = x.above(last) & u;
        up.reset(static_cast<std::size_t>(last));
        for_each_cell(up, [&](int t) {
            std::vector<int> c2 = ch;
            c2.push_back(t);
            tail.emplace_back(b.chain_id.at(c2), t);
        });
        const Rational sp(p % 2 == 0 ? 1 : -1);
        const Rational tail_sign(p % 2 == 0 ? -1 : 1);
        for (int q = s.lo(); q <= s.hi(); ++q) {
            std::size_t n = s.dim(q);
            if (n == 0) continue;
            int k = p + q;
            std::size_t col0 = b.offset[i].at(q);
            for (std::size_t w = 0; w < n; ++w)
                for (auto& [w2, v] : s.d(q).col(w)) trip[k].emplace_back(b.offset[i].at(q + 1) + w2, col0 + w, sp * v);
            for (auto [j, sg] : inner)
                for (std::size_t w = 0; w < n; ++w)
                    trip[k].emplace_back(b.offset[j].at(q) + w, col0 + w, Rational(sg));
            for (auto [j, t] : tail) {
                ChainMap r = f.restriction(last, t);
                const RatMatrix* rq = r.find(q);
                if (!rq) continue;
                for (std::size_t w = 0; w < n; ++w)
                    for (auto& [w2, v] : rq->col(w)) trip[k].emplace_back(b.offset[j].at(q) + w2, col0 + w, tail_sign * v);
            }
        }
    }
    if (b.gens.empty()) return b;
    int lo = b.gens.begin()->first, hi = b.gens.rbegin()->first;
    std::vector<std::size_t> dims;
    std::vector<RatMatrix> d;
    for (int k = lo; k <= hi; ++k) {
        std::size_t n = b.gens.count(k) ? b.gens[k].size() : 0;
        std::size_t n1 = b.gens.count(k + 1) ? b.gens[k + 1].size() : 0;
        dims.push_back(n);
        d.push_back(RatMatrix::from_triplets(n1, n, std::move(trip[k])));
    }
    for (auto it = b.gens.begin(); it != b.gens.end();)
        it = it->second.empty() ? b.gens.erase(it) : std::next(it);
    b.total = GradedComplex(lo, std::move(dims), std::move(d), Check::no);
    return b;
}

// ---------------------------------------------------------------- sections

// RGamma(U, F) for U upward-closed inside F's domain.
inline GradedComplex sections(const SheafComplex& f, const CellSet& u) {
    if (!u.is_subset_of(f.domain())) throw StructuralError("sections over cells outside the domain");
    if (f.form() == SheafComplex::Form::supported) {
        if (!is_upward_closed(f.base(), u)) throw StructuralError("sections need an open set");
        return select_quotient(f.total(), f.selection_of(u));
    }
    for_each_cell(u, [&](int c) {
        if (!(f.base().above(c) & f.domain()).is_subset_of(u))
            throw StructuralError("sections need a set open in the domain");
    });
    return bar_model(f, u).total;
}

inline GradedComplex sections(const SheafComplex& f) { return sections(f, f.domain()); }
inline GradedComplex sections(const SheafComplex& f, const Region& u) { return sections(f, u.cells); }

// Cellular compactly supported cochains: F(s) placed in degree q + dim s,
// d = sum over cofaces of [s:t] F(s<t) + (-1)^{dim s} d_F. Generators are
// returned with support s so that the Verdier dual can reuse them.
struct CellularComplex {
    GradedComplex complex;
    GenList gens;
};

inline CellularComplex cellular_sections_c(const SheafComplex& f, const CellSet& u) {
    const CWPoset& x = f.base();
    std::vector<int> cells = cells_of(u & f.domain());
    std::vector<GradedComplex> st(static_cast<std::size_t>(x.size()));
    std::map<int, std::size_t> count;
    std::map<std::pair<int, int>, std::size_t> off;  // (cell, stalk degree) -> first index
    CellularComplex out;
    for (int c : cells) {
        st[c] = f.stalk(c);
        for (int q = st[c].lo(); q <= st[c].hi(); ++q) {
            std::size_t n = st[c].dim(q);
            if (n == 0) continue;
            int k = q + x.dim(c);
            off[{c, q}] = out.gens[k].size();
            for (std::size_t w = 0; w < n; ++w) out.gens[k].push_back(Gen{c, 0, static_cast<int>(w)});
        }
    }
    std::map<int, std::vector<std::tuple<std::size_t, std::size_t, Rational>>> trip;
    for (int c : cells) {
        const auto& s = st[c];
        if (s.is_zero()) continue;
        const Rational sg(x.dim(c) % 2 == 0 ? 1 : -1);
        for (int q = s.lo(); q <= s.hi(); ++q) {
            std::size_t n = s.dim(q);
            if (n == 0) continue;
            int k = q + x.dim(c);
            std::size_t col0 = off.at({c, q});
            if (s.dim(q + 1))
                for (std::size_t w = 0; w < n; ++w)
                    for (auto& [w2, v] : s.d(q).col(w)) trip[k].emplace_back(off.at({c, q + 1}) + w2, col0 + w, sg * v);
        }
        for (int kc : x.up_covers(c)) {
            const auto& cv = x.cover(kc);
            if (!u.test(static_cast<std::size_t>(cv.coface)) || !f.in_domain(cv.coface)) continue;
            ChainMap r = f.cover_map(kc);
            for (auto& [q, m] : r.blocks()) {
                int k = q + x.dim(c);
                std::size_t col0 = off.at({c, q});
                std::size_t row0 = off.at({cv.coface, q});
                for (std::size_t w = 0; w < m.cols(); ++w)
                    for (auto& [w2, v] : m.col(w)) trip[k].emplace_back(row0 + w2, col0 + w, Rational(cv.sign) * v);
            }
        }
    }
    for (auto it = out.gens.begin(); it != out.gens.end();)
        it = it->second.empty() ? out.gens.erase(it) : std::next(it);
    if (out.gens.empty()) return out;
    int lo = out.gens.begin()->first, hi = out.gens.rbegin()->first;
    std::vector<std::size_t> dims;
    std::vector<RatMatrix> d;
    for (int k = lo; k <= hi; ++k) {
        std::size_t n = out.gens.count(k) ? out.gens.at(k).size() : 0;
        std::size_t n1 = out.gens.count(k + 1) ? out.gens.at(k + 1).size() : 0;
        dims.push_back(n);
        d.push_back(RatMatrix::from_triplets(n1, n, std::move(trip[k])));
    }
    out.complex = GradedComplex(lo, std::move(dims), std::move(d), Check::no);
    return out;
}

inline GradedComplex sections_c(const SheafComplex& f, const CellSet& u) {
    for_each_cell(u, [&](int c) {
        if (!(f.base().above(c) & f.domain()).is_subset_of(u))
            throw StructuralError("compactly supported sections need a set open in the domain");
    });
    return cellular_sections_c(f, u).complex;
}
inline GradedComplex sections_c(const SheafComplex& f) { return sections_c(f, f.domain()); }
inline GradedComplex sections_c(const SheafComplex& f, const Region& u) { return sections_c(f, u.cells); }

// ---------------------------------------------------------------- functors

// Derived pushforward of F|U to the whole base.
inline SheafComplex pushforward_open(const SheafComplex& f, const CellSet& u) {
    const CWPoset& x = f.base();
    if (!is_upward_closed(x, u)) throw StructuralError("pushforward needs an open set");
    if (!u.is_subset_of(f.domain())) throw StructuralError("pushforward from cells outside the domain");
    if (f.form() == SheafComplex::Form::supported) {
        // injective generators push forward to themselves
        Selection keep = f.selection_of(u);
        return SheafComplex::from_supported(f.base_ptr(), x.full_set(), select_quotient(f.total(), keep),
                                            select_gens(f.gens(), keep), Check::no);
    }
    BarModel b = bar_model(f, u);
    return SheafComplex::from_supported(f.base_ptr(), x.full_set(), std::move(b.total), std::move(b.gens), Check::no);
}
inline SheafComplex pushforward_open(const SheafComplex& f, const Region& u) { return pushforward_open(f, u.cells); }

// Extension by zero from an open or closed Z (j_* for closed, iota_! for open).
inline SheafComplex extend_zero(const SheafComplex& f, const CellSet& z) {
    const CWPoset& x = f.base();
    if (!is_upward_closed(x, z) && !is_downward_closed(x, z))
        throw StructuralError("extension by zero needs an open or closed set");
    CellSet dom = z & f.domain();
    std::vector<GradedComplex> st(static_cast<std::size_t>(x.size()));
    std::vector<ChainMap> mp(x.covers().size());
    for (int c = 0; c < x.size(); ++c)
        if (dom.test(static_cast<std::size_t>(c))) st[c] = f.stalk(c);
    for (int k = 0; k < static_cast<int>(mp.size()); ++k) {
        const auto& cv = x.cover(k);
        bool in = dom.test(static_cast<std::size_t>(cv.face)) && dom.test(static_cast<std::size_t>(cv.coface));
        mp[k] = in ? f.cover_map(k) : ChainMap::zero(st[cv.face], st[cv.coface]);
    }
    return SheafComplex::from_stalks(f.base_ptr(), x.full_set(), std::move(st), std::move(mp), Check::no);
}
inline SheafComplex extend_zero(const SheafComplex& f, const Region& z) { return extend_zero(f, z.cells); }

// Unit F -> iota_* iota^* F at one cell, with target RGamma(star(c) n U, F).
inline ChainMap unit_at(const SheafComplex& f, const CellSet& u, int c) {
    const CWPoset& x = f.base();
    CellSet nbhd = x.above(c) & u;
    GradedComplex src = f.stalk(c);
    if (f.form() == SheafComplex::Form::supported) {
        Selection to = f.selection_of(nbhd);
        GradedComplex tgt = select_quotient(f.total(), to);
        return selection_map(src, f.selection(c), tgt, to);
    }
    BarModel b = bar_model(f, nbhd);
    std::map<int, std::vector<std::tuple<std::size_t, std::size_t, Rational>>> trip;
    for_each_cell(nbhd, [&](int t) {
        int id = b.chain_id.at({t});
        ChainMap r = f.restriction(c, t);
        for (auto& [q, m] : r.blocks()) {
            std::size_t row0 = b.offset[id].at(q);
            for (std::size_t w = 0; w < m.cols(); ++w)
                for (auto& [w2, v] : m.col(w)) trip[q].emplace_back(row0 + w2, w, v);
        }
    });
    std::map<int, RatMatrix> fm;
    for (auto& [q, t] : trip) fm.emplace(q, RatMatrix::from_triplets(b.total.dim(q), src.dim(q), std::move(t)));
    return ChainMap(src, b.total, std::move(fm), Check::no);
}

// The adjunction morphism F -> iota_* iota^* F.
inline SheafMap adjunction_unit(const SheafComplex& f, const CellSet& u) {
    const CWPoset& x = f.base();
    SheafComplex tgt = pushforward_open(f, u);
    if (f.form() == SheafComplex::Form::supported) {
        Selection all;
        for (auto& [k, v] : f.gens()) {
            auto& a = all[k];
            for (std::size_t i = 0; i < v.size(); ++i) a.push_back(i);
        }
        Selection keep = f.selection_of(u);
        return SheafMap::global(f, tgt, selection_map(f.total(), all, tgt.total(), keep), Check::no);
    }
    // The pushforward's generators are indexed like bar_model(f, u).
    BarModel b = bar_model(f, u);
    std::vector<ChainMap> at(static_cast<std::size_t>(x.size()));
    for (int c = 0; c < x.size(); ++c) {
        GradedComplex src = f.stalk(c);
        GradedComplex dst = tgt.stalk(c);
        const Selection& sel = tgt.selection(c);
        std::map<int, std::vector<std::tuple<std::size_t, std::size_t, Rational>>> trip;
        if (f.in_domain(c)) {
            for_each_cell(x.above(c) & u, [&](int t) {
                int id = b.chain_id.at({t});
                ChainMap r = f.restriction(c, t);
                for (auto& [q, m] : r.blocks()) {
                    const auto& rows = sel.at(q);
                    for (std::size_t w = 0; w < m.cols(); ++w)
                        for (auto& [w2, v] : m.col(w)) {
                            std::size_t global = b.offset[id].at(q) + w2;
                            auto pos = static_cast<std::size_t>(std::lower_bound(rows.begin(), rows.end(), global) -
                                                                rows.begin());
                            trip[q].emplace_back(pos, w, v);
                        }
                }
            });
        }
        std::map<int, RatMatrix> fm;
        for (auto& [q, t] : trip) fm.emplace(q, RatMatrix::from_triplets(dst.dim(q), src.dim(q), std::move(t)));
        at[c] = ChainMap(src, dst, std::move(fm), Check::no);
    }
    return SheafMap::cellwise(f, tgt, std::move(at), Check::no);
}
inline SheafMap adjunction_unit(const SheafComplex& f, const Region& u) { return adjunction_unit(f, u.cells); }

// ---------------------------------------------------------------- cones and shifts

inline SheafComplex shift_sheaf(const SheafComplex& f, int n) {
    if (n == 0) return f;
    if (f.form() == SheafComplex::Form::supported) {
        GenList g;
        for (auto& [k, v] : f.gens()) g.emplace(k - n, v);
        return SheafComplex::from_supported(f.base_ptr(), f.domain(), shift(f.total(), n), std::move(g), Check::no);
    }
    const CWPoset& x = f.base();
    std::vector<GradedComplex> st(static_cast<std::size_t>(x.size()));
    std::vector<ChainMap> mp(x.covers().size());
    for (int c = 0; c < x.size(); ++c) st[c] = shift(f.stalk(c), n);
    for (int k = 0; k < static_cast<int>(mp.size()); ++k) {
        ChainMap m = shift(f.cover_map(k), n);
        mp[k] = ChainMap(st[x.cover(k).face], st[x.cover(k).coface], m.blocks(), Check::no);
    }
    return SheafComplex::from_stalks(f.base_ptr(), f.domain(), std::move(st), std::move(mp), Check::no);
}

// Map between two cones induced by maps on sources and targets.
inline ChainMap cone_map(const GradedComplex& cone_a, const GradedComplex& cone_b, const ChainMap& src_part,
                         const ChainMap& tgt_part) {
    const GradedComplex& s1 = src_part.source();
    const GradedComplex& s2 = src_part.target();
    std::map<int, RatMatrix> f;
    for (int k = std::min(cone_a.lo(), cone_b.lo()); k <= std::max(cone_a.hi(), cone_b.hi()); ++k) {
        if (cone_a.dim(k) == 0 || cone_b.dim(k) == 0) continue;
        RatMatrix m(cone_b.dim(k), cone_a.dim(k));
        if (const RatMatrix* a = src_part.find(k + 1)) m.place(*a, 0, 0);
        if (const RatMatrix* b = tgt_part.find(k)) m.place(*b, s2.dim(k + 1), s1.dim(k + 1));
        f.emplace(k, std::move(m));
    }
    return ChainMap(cone_a, cone_b, std::move(f), Check::no);
}

inline SheafComplex sheaf_cone(const SheafMap& phi) {
    const SheafComplex& a = phi.source();
    const SheafComplex& b = phi.target();
    const CWPoset& x = a.base();
    if (phi.is_global()) {
        GradedComplex total = cone_of(phi.global_map());
        GenList g;
        for (int k = total.lo(); k <= total.hi(); ++k) {
            std::vector<Gen> v;
            if (auto it = a.gens().find(k + 1); it != a.gens().end()) v = it->second;
            if (auto it = b.gens().find(k); it != b.gens().end()) v.insert(v.end(), it->second.begin(), it->second.end());
            if (!v.empty()) g.emplace(k, std::move(v));
        }
        return SheafComplex::from_supported(a.base_ptr(), a.domain() | b.domain(), std::move(total), std::move(g),
                                            Check::no);
    }
    std::vector<GradedComplex> st(static_cast<std::size_t>(x.size()));
    std::vector<ChainMap> mp(x.covers().size());
    for (int c = 0; c < x.size(); ++c) st[c] = cone_of(phi.at(c));
    for (int k = 0; k < static_cast<int>(mp.size()); ++k) {
        const auto& cv = x.cover(k);
        mp[k] = cone_map(st[cv.face], st[cv.coface], a.cover_map(k), b.cover_map(k));
    }
    return SheafComplex::from_stalks(a.base_ptr(), a.domain() | b.domain(), std::move(st), std::move(mp), Check::no);
}

// ---------------------------------------------------------------- truncations

inline SheafComplex tau_le_stalkwise(const SheafComplex& f, int k) {
    const CWPoset& x = f.base();
    std::vector<LowerTruncation> t(static_cast<std::size_t>(x.size()));
    std::vector<GradedComplex> st(static_cast<std::size_t>(x.size()));
    for (int c = 0; c < x.size(); ++c) {
        t[c] = truncate_le(f.stalk(c), k, 0, true);
        st[c] = t[c].complex;
    }
    std::vector<ChainMap> mp(x.covers().size());
    for (int j = 0; j < static_cast<int>(mp.size()); ++j) {
        const auto& cv = x.cover(j);
        ChainMap r = f.cover_map(j);
        std::map<int, RatMatrix> m;
        for (auto& [deg, blk] : r.blocks()) {
            if (deg < k) m.emplace(deg, blk);
            if (deg == k) {
                const auto& a = t[cv.face];
                const auto& b = t[cv.coface];
                m.emplace(deg, (blk * a.inclusion.f(k)).select_rows(b.free_coordinates));
            }
        }
        mp[j] = ChainMap(st[cv.face], st[cv.coface], std::move(m), Check::no);
    }
    return SheafComplex::from_stalks(f.base_ptr(), f.domain(), std::move(st), std::move(mp), Check::no);
}

inline SheafComplex tau_ge_stalkwise(const SheafComplex& f, int k) {
    const CWPoset& x = f.base();
    std::vector<UpperTruncation> t(static_cast<std::size_t>(x.size()));
    std::vector<GradedComplex> st(static_cast<std::size_t>(x.size()));
    for (int c = 0; c < x.size(); ++c) {
        t[c] = truncate_ge(f.stalk(c), k);
        st[c] = t[c].complex;
    }
    std::vector<ChainMap> mp(x.covers().size());
    for (int j = 0; j < static_cast<int>(mp.size()); ++j) {
        const auto& cv = x.cover(j);
        ChainMap r = f.cover_map(j);
        std::map<int, RatMatrix> m;
        for (auto& [deg, blk] : r.blocks()) {
            if (deg > k) m.emplace(deg, blk);
            if (deg == k) {
                const auto& a = t[cv.face];
                const auto& b = t[cv.coface];
                m.emplace(deg, b.projection.f(k) * blk.select_cols(a.kept_rows));
            }
        }
        mp[j] = ChainMap(st[cv.face], st[cv.coface], std::move(m), Check::no);
    }
    return SheafComplex::from_stalks(f.base_ptr(), f.domain(), std::move(st), std::move(mp), Check::no);
}

// ---------------------------------------------------------------- duality

// D(F): stalk at s is the dual of RGamma_c(star s, F). Built as one supported
// complex, the dual of the cellular compactly supported cochains, with each
// generator attached to the cell it came from; structure maps are then the
// duals of the extension-by-zero inclusions.
inline SheafComplex verdier_dual(const SheafComplex& f) {
    const CWPoset& x = f.base();
    if (!is_upward_closed(x, f.domain())) throw StructuralError("Verdier dual needs an open domain");
    CellularComplex cc = cellular_sections_c(f, f.domain());
    GenList g;
    for (auto& [k, v] : cc.gens) g.emplace(-k, v);
    return SheafComplex::from_supported(f.base_ptr(), f.domain(), dual_complex(cc.complex), std::move(g), Check::no);
}

// ---------------------------------------------------------------- constancy

struct ConstancyReport {
    bool constant = true;
    GradedDims dims;
    std::string witness;
};

inline ConstancyReport is_constant_along(const SheafComplex& f, const CellSet& cells) {
    const CWPoset& x = f.base();
    ConstancyReport r;
    std::map<int, GradedDims> h;
    auto dims_at = [&](int c) -> const GradedDims& {
        auto it = h.find(c);
        if (it == h.end()) it = h.emplace(c, cohomology_dims(f.stalk(c))).first;
        return it->second;
    };
    bool first = true;
    for_each_cell(cells, [&](int c) {
        if (first) {
            r.dims = dims_at(c);
            first = false;
        }
    });
    for_each_cell(cells, [&](int c) {
        if (!r.constant) return;
        for (int k : x.up_covers(c)) {
            int t = x.cover(k).coface;
            if (!cells.test(static_cast<std::size_t>(t))) continue;
            const GradedDims& a = dims_at(c);
            const GradedDims& b = dims_at(t);
            if (a != b) {
                r.constant = false;
                r.witness = "stalk cohomology " + a.str() + " at " + x.name(c) + " vs " + b.str() + " at " + x.name(t);
                return;
            }
            ChainMap m = f.cover_map(k);
            for (auto& [deg, n] : a.entries()) {
                if (!induces_iso_in_degree(m, deg, a, b)) {
                    r.constant = false;
                    r.witness = "map " + x.name(c) + " -> " + x.name(t) + " is not an isomorphism on H^" +
                                std::to_string(deg);
                    return;
                }
            }
        }
    });
    if (r.constant) {
        // the set must be connected through covers for a common value to make sense
        if (components(x, cells).size() > 1) {
            GradedDims first_dims = r.dims;
            for_each_cell(cells, [&](int c) {
                if (r.constant && dims_at(c) != first_dims) {
                    r.constant = false;
                    r.witness = "disconnected set with different stalks at " + x.name(c);
                }
            });
        }
    }
    return r;
}

// ---------------------------------------------------------------- Borel-Moore model

// Coherent orientation of the top cells of an open set U (signs +-1), if one
// exists across every (d-1)-cell of U.
inline std::optional<std::vector<int>> orient_open(const CWPoset& x, const CellSet& u, int d) {
    std::vector<int> eps(static_cast<std::size_t>(x.size()), 0);
    std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(x.size()));
    bool ok = true;
    for_each_cell(u, [&](int f) {
        if (x.dim(f) != d - 1) return;
        std::vector<const Cover*> ups;
        for (int k : x.up_covers(f))
            if (u.test(static_cast<std::size_t>(x.cover(k).coface))) ups.push_back(&x.cover(k));
        if (ups.size() == 2) {
            int rel = -ups[0]->sign * ups[1]->sign;
            adj[ups[0]->coface].emplace_back(ups[1]->coface, rel);
            adj[ups[1]->coface].emplace_back(ups[0]->coface, rel);
        } else if (ups.size() != 0) {
            ok = false;
        }
    });
    if (!ok) return std::nullopt;
    for_each_cell(u, [&](int t) {
        if (x.dim(t) != d || eps[t] != 0 || !ok) return;
        eps[t] = 1;
        std::deque<int> q{t};
        while (!q.empty()) {
            int a = q.front();
            q.pop_front();
            for (auto [b, rel] : adj[a]) {
                int want = rel * eps[a];
                if (eps[b] == 0) {
                    eps[b] = want;
                    q.push_back(b);
                } else if (eps[b] != want) {
                    ok = false;
                }
            }
        }
    });
    if (!ok) return std::nullopt;
    return eps;
}

// Cellular Borel-Moore chains of an oriented d-dimensional open set U as a
// supported sheaf: one generator per cell s of U in degree d - dim s,
// d[s] = sum_{t < s, t in U} [t:s] [t]. On an oriented homology manifold
// this resolves the constant sheaf by injectives, so its pushforward to the
// whole base is the derived pushforward of Q_U.
inline SheafComplex borel_moore_model(CWPtr x, const CellSet& u, int d) {
    SupportedBuilder b{x, {}, {}};
    std::vector<std::size_t> pos(static_cast<std::size_t>(x->size()), 0);
    for_each_cell(u, [&](int s) { pos[s] = b.add(d - x->dim(s), Gen{s, 0, 0}); });
    for_each_cell(u, [&](int s) {
        for (int k : x->down_covers(s)) {
            const auto& cv = x->cover(k);
            if (!u.test(static_cast<std::size_t>(cv.face))) continue;
            b.entry(d - x->dim(s), pos[cv.face], pos[s], Rational(cv.sign));
        }
    });
    return b.build(x->full_set(), Check::yes);
}

}  // namespace kis
