#pragma once

#include "kis/cw.hpp"
#include "kis/graded.hpp"

#include <map>
#include <optional>
#include <unordered_map>

namespace kis {

// Degree -> sorted basis indices kept by a sub-quotient.
using Selection = std::map<int, std::vector<std::size_t>>;

// Complex spanned by the kept basis vectors, with the differential read off
// on those coordinates. Callers guarantee that the dropped vectors span a
// subcomplex, which makes the result a quotient complex.
inline GradedComplex select_quotient(const GradedComplex& c, const Selection& keep) {
    if (keep.empty()) return GradedComplex();
    int lo = keep.begin()->first, hi = keep.rbegin()->first;
    std::vector<std::size_t> dims;
    std::vector<RatMatrix> d;
    static const std::vector<std::size_t> none;
    auto get = [&](int k) -> const std::vector<std::size_t>& {
        auto it = keep.find(k);
        return it == keep.end() ? none : it->second;
    };
    for (int k = lo; k <= hi; ++k) {
        const auto& cols = get(k);
        const auto& rows = get(k + 1);
        dims.push_back(cols.size());
        if (cols.empty() || rows.empty()) {
            d.emplace_back(rows.size(), cols.size());
            continue;
        }
        d.push_back(c.d(k).select_cols(cols).select_rows(rows));
    }
    return GradedComplex(lo, std::move(dims), std::move(d), Check::no);
}

// 0/1 matrix sending the coordinates listed in `from` onto those listed in
// `to` (both sorted; entries of `to` missing from `from` give zero rows).
inline RatMatrix coordinate_projection(const std::vector<std::size_t>& from, const std::vector<std::size_t>& to) {
    RatMatrix m(to.size(), from.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < from.size(); ++i) {
        while (j < to.size() && to[j] < from[i]) ++j;
        if (j < to.size() && to[j] == from[i]) m.set_col(i, {{static_cast<std::uint32_t>(j), Rational(1)}});
    }
    return m;
}

inline ChainMap selection_map(const GradedComplex& src, const Selection& from, const GradedComplex& tgt,
                              const Selection& to) {
    std::map<int, RatMatrix> f;
    static const std::vector<std::size_t> none;
    for (auto& [k, v] : from) {
        auto it = to.find(k);
        f.emplace(k, coordinate_projection(v, it == to.end() ? none : it->second));
    }
    return ChainMap(src, tgt, std::move(f), Check::no);
}

// Generator of a supported complex: the cell it is attached to and a tag
// recording where it came from (origin 0 = base model, n = stage n of a build;
// index = basis position inside the fibre it was copied from).
struct Gen {
    int cell = 0;
    int origin = 0;
    int index = 0;
    friend bool operator==(const Gen& a, const Gen& b) {
        return a.cell == b.cell && a.origin == b.origin && a.index == b.index;
    }
};
using GenList = std::map<int, std::vector<Gen>>;

// Sheaf complex on a CW poset, restricted to a domain of cells.
//
// Two presentations share one interface:
//  * stalks: a complex per cell plus a chain map per cover;
//  * supported: one global complex whose generators carry support cells; the
//    differential only moves towards smaller supports, the stalk at s is the
//    quotient onto generators supported in star(s) and every structure map is
//    a coordinate projection. Degreewise these are sums of the injective
//    sheaves [t], so sections over open sets are again quotients.
class SheafComplex {
public:
    enum class Form { stalks, supported };

    SheafComplex() = default;

    static SheafComplex from_stalks(CWPtr x, CellSet domain, std::vector<GradedComplex> stalks,
                                    std::vector<ChainMap> cover_maps, Check check = Check::yes) {
        SheafComplex f;
        f.base_ = std::move(x);
        f.domain_ = std::move(domain);
        f.form_ = Form::stalks;
        const auto n = static_cast<std::size_t>(f.base_->size());
        if (stalks.size() != n) throw StructuralError("one stalk per cell required");
        for (int c = 0; c < f.base_->size(); ++c)
            if (!f.domain_.test(static_cast<std::size_t>(c)) && !stalks[c].is_zero())
                throw StructuralError("nonzero stalk outside the domain at " + f.base_->name(c));
        if (cover_maps.size() != f.base_->covers().size()) throw StructuralError("one map per cover required");
        f.stalks_ = std::move(stalks);
        f.maps_ = std::move(cover_maps);
        f.cache_ = std::make_shared<Cache>();
        if (check == Check::yes) f.verify();
        return f;
    }

    static SheafComplex from_supported(CWPtr x, CellSet domain, GradedComplex total, GenList gens,
                                       Check check = Check::yes) {
        SheafComplex f;
        f.base_ = std::move(x);
        f.domain_ = std::move(domain);
        f.form_ = Form::supported;
        f.total_ = std::move(total);
        f.gens_ = std::move(gens);
        f.cache_ = std::make_shared<Cache>();
        f.index_supports();
        if (check == Check::yes) f.verify();
        return f;
    }

    Form form() const { return form_; }
    const CWPoset& base() const { return *base_; }
    const CWPtr& base_ptr() const { return base_; }
    const CellSet& domain() const { return domain_; }
    bool in_domain(int c) const { return domain_.test(static_cast<std::size_t>(c)); }

    const GradedComplex& total() const {
        require_supported();
        return total_;
    }
    const GenList& gens() const {
        require_supported();
        return gens_;
    }
    const Gen& gen(int degree, std::size_t i) const { return gens_.at(degree)[i]; }

    // Generators supported in star(c) (supported form only).
    const Selection& selection(int c) const {
        require_supported();
        auto& slot = cache_->selection[c];
        if (!slot) {
            Selection s;
            for_each_cell(base_->above(c), [&](int t) {
                for (auto [k, i] : by_cell_[t]) s[k].push_back(i);
            });
            for (auto& [k, v] : s) std::sort(v.begin(), v.end());
            slot = std::move(s);
        }
        return *slot;
    }

    // Generators supported in an arbitrary cell set (supported form only).
    Selection selection_of(const CellSet& cells) const {
        require_supported();
        Selection s;
        for_each_cell(cells, [&](int t) {
            for (auto [k, i] : by_cell_[t]) s[k].push_back(i);
        });
        for (auto& [k, v] : s) std::sort(v.begin(), v.end());
        return s;
    }

    GradedComplex stalk(int c) const {
        if (!in_domain(c)) return GradedComplex();
        if (form_ == Form::stalks) return stalks_[c];
        auto& slot = cache_->stalk[c];
        if (!slot) slot = select_quotient(total_, selection(c));
        return *slot;
    }

    ChainMap cover_map(int k) const {
        const auto& cv = base_->cover(k);
        if (!in_domain(cv.face) || !in_domain(cv.coface)) return ChainMap::zero(stalk(cv.face), stalk(cv.coface));
        if (form_ == Form::stalks) return maps_[k];
        return selection_map(stalk(cv.face), selection(cv.face), stalk(cv.coface), selection(cv.coface));
    }

    // Structure map F(s) -> F(t) for s <= t.
    ChainMap restriction(int s, int t) const {
        if (!base_->leq(s, t)) throw StructuralError("restriction along a non-relation");
        if (s == t) return ChainMap::identity(stalk(s));
        if (!in_domain(s) || !in_domain(t)) return ChainMap::zero(stalk(s), stalk(t));
        if (form_ == Form::supported)
            return selection_map(stalk(s), selection(s), stalk(t), selection(t));
        auto key = std::make_pair(s, t);
        auto it = cache_->composite.find(key);
        if (it != cache_->composite.end()) return it->second;
        ChainMap out;
        for (int k : base_->up_covers(s)) {
            int m = base_->cover(k).coface;
            if (!base_->leq(m, t) || !in_domain(m)) continue;
            out = restriction(m, t).after(maps_[k]);
            break;
        }
        cache_->composite.emplace(key, out);
        return out;
    }

    // Common degree bounds of all stalks.
    std::pair<int, int> degree_range() const {
        if (form_ == Form::supported) return {total_.lo(), total_.hi()};
        int lo = 0, hi = -1;
        bool first = true;
        for (int c = 0; c < base_->size(); ++c) {
            if (stalks_[c].is_zero()) continue;
            lo = first ? stalks_[c].lo() : std::min(lo, stalks_[c].lo());
            hi = first ? stalks_[c].hi() : std::max(hi, stalks_[c].hi());
            first = false;
        }
        return {lo, hi};
    }

    void verify() const {
        if (form_ == Form::supported) {
            if (!is_upward_closed(*base_, domain_)) throw StructuralError("supported sheaf needs an open domain");
            for (auto& [k, v] : gens_) {
                if (v.size() != total_.dim(k)) throw StructuralError("generator list does not match the complex");
                for (const auto& g : v)
                    if (!in_domain(g.cell)) throw StructuralError("generator supported outside the domain");
            }
            for (int k = total_.lo(); k < total_.hi(); ++k) {
                const RatMatrix& d = total_.d(k);
                for (std::size_t j = 0; j < d.cols(); ++j)
                    for (auto& [i, v] : d.col(j))
                        if (!base_->leq(gens_.at(k + 1)[i].cell, gens_.at(k)[j].cell))
                            throw StructuralError("differential increases the support");
            }
            return;
        }
        for (std::size_t k = 0; k < maps_.size(); ++k) {
            const auto& cv = base_->cover(static_cast<int>(k));
            if (!in_domain(cv.face) || !in_domain(cv.coface)) continue;
            const ChainMap& m = maps_[k];
            if (!(m.source() == stalks_[cv.face]) || !(m.target() == stalks_[cv.coface]))
                throw StructuralError("structure map for " + base_->name(cv.face) + " < " + base_->name(cv.coface) +
                                      " has wrong endpoints");
            if (!m.is_chain_map())
                throw StructuralError("structure map for " + base_->name(cv.face) + " < " + base_->name(cv.coface) +
                                      " is not a chain map");
        }
        // strict functoriality on every two-step interval
        for (int s = 0; s < base_->size(); ++s) {
            if (!in_domain(s)) continue;
            std::map<int, ChainMap> seen;
            for (int k1 : base_->up_covers(s)) {
                int m = base_->cover(k1).coface;
                if (!in_domain(m)) continue;
                for (int k2 : base_->up_covers(m)) {
                    int r = base_->cover(k2).coface;
                    if (!in_domain(r)) continue;
                    ChainMap comp = maps_[k2].after(maps_[k1]);
                    auto [it, fresh] = seen.emplace(r, comp);
                    if (!fresh && !(it->second == comp))
                        throw StructuralError("diamond " + base_->name(s) + " < " + base_->name(r) + " does not commute");
                }
            }
        }
    }

    // Stalks and cover maps written out explicitly.
    SheafComplex materialize() const {
        if (form_ == Form::stalks) return *this;
        std::vector<GradedComplex> st(static_cast<std::size_t>(base_->size()));
        std::vector<ChainMap> mp(base_->covers().size());
        for (int c = 0; c < base_->size(); ++c) st[c] = stalk(c);
        for (std::size_t k = 0; k < mp.size(); ++k) mp[k] = cover_map(static_cast<int>(k));
        return from_stalks(base_, domain_, std::move(st), std::move(mp), Check::no);
    }

private:
    void require_supported() const {
        if (form_ != Form::supported) throw StructuralError("operation needs a supported presentation");
    }
    void index_supports() {
        by_cell_.assign(static_cast<std::size_t>(base_->size()), {});
        for (auto& [k, v] : gens_)
            for (std::size_t i = 0; i < v.size(); ++i) {
                if (v[i].cell < 0 || v[i].cell >= base_->size()) throw StructuralError("generator on unknown cell");
                by_cell_[v[i].cell].emplace_back(k, i);
            }
    }

    struct PairHash {
        std::size_t operator()(const std::pair<int, int>& p) const {
            return std::hash<long long>()((static_cast<long long>(p.first) << 32) ^ static_cast<unsigned>(p.second));
        }
    };
    // Memoized derived data; filling it does not change the value.
    struct Cache {
        std::unordered_map<int, std::optional<Selection>> selection;
        std::unordered_map<int, std::optional<GradedComplex>> stalk;
        std::unordered_map<std::pair<int, int>, ChainMap, PairHash> composite;
    };

    CWPtr base_;
    CellSet domain_;
    Form form_ = Form::stalks;
    std::vector<GradedComplex> stalks_;
    std::vector<ChainMap> maps_;
    GradedComplex total_;
    GenList gens_;
    std::vector<std::vector<std::pair<int, std::size_t>>> by_cell_;
    std::shared_ptr<Cache> cache_;
};

// Morphism of sheaf complexes: either one global chain map between supported
// presentations (it must not increase supports), or one chain map per cell.
class SheafMap {
public:
    SheafMap() = default;

    static SheafMap global(SheafComplex src, SheafComplex tgt, ChainMap m, Check check = Check::yes) {
        SheafMap f;
        f.src_ = std::move(src);
        f.tgt_ = std::move(tgt);
        f.global_ = true;
        f.m_ = std::move(m);
        if (check == Check::yes) f.verify();
        return f;
    }

    static SheafMap cellwise(SheafComplex src, SheafComplex tgt, std::vector<ChainMap> at, Check check = Check::yes) {
        SheafMap f;
        f.src_ = std::move(src);
        f.tgt_ = std::move(tgt);
        f.global_ = false;
        f.at_ = std::move(at);
        if (check == Check::yes) f.verify();
        return f;
    }

    const SheafComplex& source() const { return src_; }
    const SheafComplex& target() const { return tgt_; }
    bool is_global() const { return global_; }
    const ChainMap& global_map() const { return m_; }

    ChainMap at(int c) const {
        if (!global_) return at_[c];
        if (!src_.in_domain(c) || !tgt_.in_domain(c)) return ChainMap::zero(src_.stalk(c), tgt_.stalk(c));
        const Selection& a = src_.selection(c);
        const Selection& b = tgt_.selection(c);
        std::map<int, RatMatrix> f;
        static const std::vector<std::size_t> none;
        for (auto& [k, cols] : a) {
            auto it = b.find(k);
            if (it == b.end()) continue;
            const RatMatrix* mk = m_.find(k);
            if (!mk) continue;
            f.emplace(k, mk->select_cols(cols).select_rows(it->second));
        }
        return ChainMap(src_.stalk(c), tgt_.stalk(c), std::move(f), Check::no);
    }

    void verify() const {
        const CWPoset& x = src_.base();
        if (&x != &tgt_.base()) throw StructuralError("sheaf map between different bases");
        if (global_) {
            if (!m_.is_chain_map()) throw StructuralError("global sheaf map is not a chain map");
            for (auto& [k, mk] : m_.blocks()) {
                for (std::size_t j = 0; j < mk.cols(); ++j)
                    for (auto& [i, v] : mk.col(j))
                        if (!x.leq(tgt_.gen(k, i).cell, src_.gen(k, j).cell))
                            throw StructuralError("global sheaf map increases the support");
            }
            return;
        }
        if (at_.size() != static_cast<std::size_t>(x.size())) throw StructuralError("one chain map per cell required");
        for (int c = 0; c < x.size(); ++c)
            if (!at_[c].is_chain_map()) throw StructuralError("sheaf map at " + x.name(c) + " is not a chain map");
        for (int k = 0; k < static_cast<int>(x.covers().size()); ++k) {
            const auto& cv = x.cover(k);
            ChainMap lhs = at_[cv.coface].after(src_.cover_map(k));
            ChainMap rhs = tgt_.cover_map(k).after(at_[cv.face]);
            for (int deg = std::min(lhs.source().lo(), lhs.target().lo());
                 deg <= std::max(lhs.source().hi(), lhs.target().hi()); ++deg)
                if (!(lhs.f(deg) == rhs.f(deg)))
                    throw StructuralError("naturality fails along " + x.name(cv.face) + " < " + x.name(cv.coface));
        }
    }

private:
    SheafComplex src_, tgt_;
    bool global_ = false;
    ChainMap m_;
    std::vector<ChainMap> at_;
};

}  // namespace kis
