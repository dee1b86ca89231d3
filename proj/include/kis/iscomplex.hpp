#pragma once

#include "kis/sheaf_ops.hpp"
#include "kis/strata.hpp"

#include <climits>
#include <tuple>

namespace kis {

enum class Theory { IS, IC };

inline std::string theory_name(Theory t) { return t == Theory::IS ? "IS" : "IC"; }

inline Theory parse_theory(const std::string& s) {
    if (s == "IS") return Theory::IS;
    if (s == "IC") return Theory::IC;
    throw StructuralError("unknown theory '" + s + "' (expected IS or IC)");
}

struct StratumLog {
    int stratum = 0;
    int top_cell = 0;
    GradedDims g;                       // common stalk cohomology along the stratum before the step
    GradedDims expected;                // stalk cohomology required after the step
    std::vector<std::string> failures;  // stalk contract violations
    std::optional<bool> slice_agrees;
    bool ok() const { return failures.empty() && slice_agrees.value_or(true); }
};

struct StageLog {
    int stage = 0;
    int codim = 0;
    int cutoff = 0;
    std::vector<StratumLog> strata;
};

struct BuildOptions {
    std::uint64_t seed = 0;
    bool check_slices = false;
    int stop_before_codim = INT_MAX;  // leave strata of this codimension and deeper untouched
};

struct BuildResult {
    SpacePtr space;
    Theory theory = Theory::IS;
    Perversity perversity;
    std::uint64_t seed = 0;
    SheafComplex complex;
    std::vector<StageLog> log;
    bool contract_ok() const {
        for (const auto& s : log)
            for (const auto& t : s.strata)
                if (!t.ok()) return false;
        return true;
    }
};

// Splitting seed of one stratum, a function of the global seed and the
// codimension only, so a slice build sees the same choice.
inline std::uint64_t stratum_seed(std::uint64_t seed, int codim) {
    if (seed == 0) return 0;
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(codim + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z == 0 ? 1 : z;
}

// Q on the regular part, pushed forward: Borel-Moore chains of the regular
// part as a supported complex over the whole poset.
inline SheafComplex build_K1(const StratifiedSpace& sp) {
    CellSet u = sp.regular() & sp.ambient();
    if (!orient_open(*sp.x, u, sp.dim))
        throw StructuralError("regular part of " + sp.name + " is not orientable; K1 needs an orientation");
    return borel_moore_model(sp.x, u, sp.dim);
}

struct Costalk {
    GradedDims g;
    int top_cell = -1;
    GradedComplex fibre;  // stalk at the top cell
};

// Common stalk cohomology of K along a stratum; the restriction maps inside
// the stratum must be isomorphisms.
inline Costalk stratum_costalk(const SheafComplex& k, const StratifiedSpace& sp, int i) {
    const Stratum& st = sp.strata.at(static_cast<std::size_t>(i));
    CellSet cells = st.cells & sp.ambient();
    auto rep = is_constant_along(k, cells);
    if (!rep.constant)
        throw StructuralError("stratum " + std::to_string(i) + " of " + sp.name + ": stalks not constant (" +
                              rep.witness + ")");
    Costalk c;
    c.g = rep.dims;
    int best = -1;
    for_each_cell(cells, [&](int s) {
        if (best < 0 || sp.x->dim(s) > sp.x->dim(best)) best = s;
    });
    c.top_cell = best;
    c.fibre = k.stalk(best);
    return c;
}

inline std::vector<std::pair<int, std::size_t>> decompose_on_stratum(const SheafComplex& k, const StratifiedSpace& sp,
                                                                     int i) {
    std::vector<std::pair<int, std::size_t>> out;
    for (auto& [r, n] : stratum_costalk(k, sp, i).g.entries()) out.emplace_back(r, n);
    return out;
}

inline ChainMap splitting_lambda(const GradedComplex& g, int cutoff, std::uint64_t seed) {
    return split_onto_tau_le(g, cutoff, seed);
}

namespace detail {

struct GenKey {
    int cell, origin, index, degree;
    friend bool operator<(const GenKey& a, const GenKey& b) {
        return std::tie(a.cell, a.origin, a.index, a.degree) < std::tie(b.cell, b.origin, b.index, b.degree);
    }
};

// cone(phi)[-1] of a global map K -> H between supported complexes, written
// as one supported complex: degree k holds K^k followed by H^{k-1}, with
// differential (x, h) -> (dx, -phi x - dh).
inline SheafComplex supported_fibre(const SheafComplex& k, const SheafComplex& h, const ChainMap& phi) {
    const GradedComplex& tk = k.total();
    const GradedComplex& th = h.total();
    SupportedBuilder b{k.base_ptr(), {}, {}};
    int lo = std::min(tk.is_zero() ? INT_MAX : tk.lo(), th.is_zero() ? INT_MAX : th.lo() + 1);
    int hi = std::max(tk.is_zero() ? INT_MIN : tk.hi(), th.is_zero() ? INT_MIN : th.hi() + 1);
    if (lo > hi) return b.build(k.base().full_set(), Check::no);
    static const std::vector<Gen> none;
    auto gens_of = [&](const SheafComplex& f, int deg) -> const std::vector<Gen>& {
        auto it = f.gens().find(deg);
        return it == f.gens().end() ? none : it->second;
    };
    for (int deg = lo; deg <= hi; ++deg) {
        for (const auto& g : gens_of(k, deg)) b.add(deg, g);
        for (const auto& g : gens_of(h, deg - 1)) b.add(deg, g);
    }
    for (int deg = lo; deg < hi; ++deg) {
        const std::size_t nk = tk.dim(deg), nk1 = tk.dim(deg + 1);
        if (nk && nk1)
            for (std::size_t j = 0; j < nk; ++j)
                for (auto& [i, v] : tk.d(deg).col(j)) b.entry(deg, i, j, v);
        if (nk && th.dim(deg)) {
            if (const RatMatrix* m = phi.find(deg))
                for (std::size_t j = 0; j < nk; ++j)
                    for (auto& [i, v] : m->col(j)) b.entry(deg, nk1 + i, j, -v);
        }
        const std::size_t nh = th.dim(deg - 1);
        if (nh && th.dim(deg))
            for (std::size_t j = 0; j < nh; ++j)
                for (auto& [i, v] : th.d(deg - 1).col(j)) b.entry(deg, nk1 + i, nk + j, -v);
    }
    return b.build(k.base().full_set(), Check::no);
}

}  // namespace detail

// One inductive step on stratum i: phi : K -> (theta)_* W transported along
// the stratum from the top-cell fibre map mu : V -> W, then cone(phi)[-1].
// IS uses a seeded splitting onto tau<=q(c); IC the projection onto
// tau>=p(c)+1.
inline SheafComplex extend_step(const SheafComplex& k, const StratifiedSpace& sp, int i, Theory th,
                                const Perversity& p, std::uint64_t seed, int stage, StratumLog* log = nullptr) {
    const CWPoset& x = *sp.x;
    const Stratum& st = sp.strata.at(static_cast<std::size_t>(i));
    const int c = st.codim;
    const std::string where = sp.name + " stratum " + std::to_string(i);
    Costalk cs = stratum_costalk(k, sp, i);
    const int s0 = cs.top_cell;
    const int ks = x.dim(s0);
    const GradedComplex& v = cs.fibre;
    ChainMap mu;
    if (th == Theory::IS)
        mu = splitting_lambda(v, c - 2 - p.at(c), stratum_seed(seed, c));
    else
        mu = truncate_ge(v, p.at(c) + 1).projection;
    const GradedComplex& w = mu.target();

    std::string why;
    auto eta = product_twist(sp, st, &why);
    if (!eta) throw StructuralError("lambda-transport inconsistency on " + where + ": " + why);
    std::map<std::pair<int, int>, int> cell_of;
    for (auto& [cell, lab] : st.labels) cell_of[lab] = cell;

    // positions of the top-cell fibre generators inside V
    std::map<detail::GenKey, std::size_t> vpos;
    for (auto& [deg, idx] : k.selection(s0))
        for (std::size_t j = 0; j < idx.size(); ++j) {
            const Gen& g = k.gen(deg, idx[j]);
            vpos[{g.cell, g.origin, g.index, deg}] = j;
        }

    // H: Borel-Moore chains of the stratum tensored with W
    SupportedBuilder hb{sp.x, {}, {}};
    std::map<std::tuple<int, int, int>, std::size_t> hpos;  // (cell, fibre degree, w) -> position
    const CellSet in_cells = st.cells & sp.ambient();
    std::vector<int> cells = cells_of(in_cells);
    for (int s : cells)
        for (int j = w.lo(); j <= w.hi(); ++j)
            for (std::size_t a = 0; a < w.dim(j); ++a)
                hpos[{s, j, static_cast<int>(a)}] = hb.add(j + ks - x.dim(s), Gen{s, stage, static_cast<int>(a)});
    for (int s : cells) {
        const int sgn = (x.dim(s) - ks) % 2 == 0 ? 1 : -1;
        for (int j = w.lo(); j <= w.hi(); ++j) {
            const int deg = j + ks - x.dim(s);
            for (std::size_t a = 0; a < w.dim(j); ++a) {
                std::size_t col = hpos.at({s, j, static_cast<int>(a)});
                for (int kc : x.down_covers(s)) {
                    const auto& cv = x.cover(kc);
                    if (!in_cells.test(static_cast<std::size_t>(cv.face))) continue;
                    hb.entry(deg, hpos.at({cv.face, j, static_cast<int>(a)}), col, Rational(cv.sign));
                }
                if (j < w.hi() && w.dim(j + 1))
                    for (auto& [r, val] : w.d(j).col(a))
                        hb.entry(deg, hpos.at({s, j + 1, static_cast<int>(r)}), col, sgn == 1 ? val : -val);
            }
        }
    }
    SheafComplex h = hb.build(x.full_set(), Check::no);

    // phi on generators over the tube
    std::map<int, std::vector<std::tuple<std::size_t, std::size_t, Rational>>> trip;
    for (auto& [deg, gl] : k.gens()) {
        for (std::size_t col = 0; col < gl.size(); ++col) {
            const Gen& g = gl[col];
            auto lab = st.labels.find(g.cell);
            if (lab == st.labels.end()) continue;
            auto [s, z] = lab->second;
            int partner = cell_of.at({s0, z});
            int d0 = deg - ks + x.dim(s);
            auto it = vpos.find({partner, g.origin, g.index, d0});
            if (it == vpos.end())
                throw StructuralError("lambda-transport inconsistency on " + where + ": generator over " +
                                      x.name(g.cell) + " has no partner over " + x.name(partner));
            const RatMatrix* m = mu.find(d0);
            if (!m) continue;
            const int eps = eta->at(g.cell) * eta->at(partner);
            for (auto& [a, val] : m->col(it->second))
                trip[deg].emplace_back(hpos.at({s, d0, static_cast<int>(a)}), col, eps == 1 ? val : -val);
        }
    }
    std::map<int, RatMatrix> pm;
    for (auto& [deg, t] : trip) pm.emplace(deg, RatMatrix::from_triplets(h.total().dim(deg), k.total().dim(deg), std::move(t)));
    ChainMap phi(k.total(), h.total(), std::move(pm), Check::no);
    if (!phi.is_chain_map())
        throw StructuralError("lambda-transport inconsistency on " + where + ": transported map is not a chain map");

    SheafComplex out = detail::supported_fibre(k, h, phi);

    if (log) {
        log->stratum = i;
        log->top_cell = s0;
        log->g = cs.g;
        GradedDims want;
        for (auto& [r, n] : cs.g.entries()) {
            bool keep = th == Theory::IS ? r > c - 2 - p.at(c) : r <= p.at(c);
            if (keep) want.set(r, n);
        }
        log->expected = want;
        for (int s : cells) {
            GradedDims got = cohomology_dims(out.stalk(s));
            if (got != want)
                log->failures.push_back("stalk at " + x.name(s) + " is " + got.str() + ", expected " + want.str());
        }
    }
    return out;
}

inline BuildResult build_complex(const SpacePtr& sp, Theory th, const Perversity& p, const BuildOptions& opt = {});

namespace detail {

// Compares the fibre over a stratum with the apex stalk of the same recipe
// run on the slice up to (not including) the apex stratum.
inline bool slice_agrees(const StratifiedSpace& sp, int i, const SheafComplex& k, Theory th, const Perversity& p,
                         std::uint64_t seed) {
    const Stratum& st = sp.strata.at(static_cast<std::size_t>(i));
    SpacePtr sl = st.slice();
    BuildOptions o;
    o.seed = seed;
    o.stop_before_codim = st.codim;
    BuildResult r = build_complex(sl, th, p, o);
    int s0 = -1;
    for_each_cell(st.cells, [&](int s) {
        if (s0 < 0 || sp.x->dim(s) > sp.x->dim(s0)) s0 = s;
    });
    return cohomology_dims(r.complex.stalk(sl->apex)) == cohomology_dims(k.stalk(s0));
}

}  // namespace detail

inline BuildResult build_complex(const SpacePtr& sp, Theory th, const Perversity& p, const BuildOptions& opt) {
    BuildResult r;
    r.space = sp;
    r.theory = th;
    r.perversity = p;
    r.seed = opt.seed;
    for (int c : sp->codims())
        if (!p.defined_at(c)) throw StructuralError("perversity '" + p.name + "' is not defined in codimension " + std::to_string(c));
    SheafComplex k = build_K1(*sp);
    int stage = 0;
    for (int c : sp->codims()) {
        if (c >= opt.stop_before_codim) break;
        StageLog sl;
        sl.stage = ++stage;
        sl.codim = c;
        sl.cutoff = th == Theory::IS ? c - 2 - p.at(c) : p.at(c);
        for (std::size_t i = 0; i < sp->strata.size(); ++i) {
            if (sp->strata[i].codim != c) continue;
            StratumLog lg;
            if (opt.check_slices) lg.slice_agrees = detail::slice_agrees(*sp, static_cast<int>(i), k, th, p, opt.seed);
            k = extend_step(k, *sp, static_cast<int>(i), th, p, opt.seed, stage, &lg);
            sl.strata.push_back(std::move(lg));
        }
        r.log.push_back(std::move(sl));
    }
    r.complex = std::move(k);
    return r;
}

inline BuildResult build_IS(const SpacePtr& sp, const Perversity& p, const BuildOptions& opt = {}) {
    return build_complex(sp, Theory::IS, p, opt);
}

inline BuildResult build_IC(const SpacePtr& sp, const Perversity& p, const BuildOptions& opt = {}) {
    return build_complex(sp, Theory::IC, p, opt);
}

// ---------------------------------------------------------------- axioms

struct AxiomWitness {
    std::string condition;  // "a", "b", "c", "d"
    int codim = 0;          // for c and d
    int cell = -1;
    std::string cell_name;
    int degree = 0;
    std::size_t stalk_dim = 0;
    std::size_t target_dim = 0;  // d: sections over the deleted star
    std::size_t rank = 0;        // d: rank of the induced map
    std::string detail;
};

struct AxiomReport {
    bool a = true, b = true;
    std::map<int, bool> c, d;  // by codimension
    std::vector<AxiomWitness> witnesses;
    bool passes() const {
        if (!a || !b) return false;
        for (auto& [k, v] : c)
            if (!v) return false;
        for (auto& [k, v] : d)
            if (!v) return false;
        return true;
    }
    bool failed(const std::string& cond) const {
        for (const auto& w : witnesses)
            if (w.condition == cond) return true;
        return false;
    }
};

inline AxiomReport check_AXS1(const SheafComplex& bsh, const StratifiedSpace& sp, const Perversity& p,
                              std::size_t max_witnesses = 64) {
    const CWPoset& x = *sp.x;
    AxiomReport r;
    auto add = [&](AxiomWitness w) {
        if (r.witnesses.size() < max_witnesses) r.witnesses.push_back(std::move(w));
    };
    std::vector<GradedDims> h(static_cast<std::size_t>(x.size()));
    for (int s = 0; s < x.size(); ++s) h[s] = cohomology_dims(bsh.stalk(s));
    // (a)
    GradedDims q;
    q.set(0, 1);
    for_each_cell(sp.regular(), [&](int s) {
        if (h[s] != q) {
            r.a = false;
            add({"a", 0, s, x.name(s), 0, h[s].at(0), 0, 0, "regular stalk " + h[s].str() + " is not Q in degree 0"});
        }
    });
    // (b)
    for (int s = 0; s < x.size(); ++s)
        for (auto& [deg, n] : h[s].entries())
            if (deg < 0 || deg > sp.dim) {
                r.b = false;
                add({"b", 0, s, x.name(s), deg, n, 0, 0, "cohomology outside [0," + std::to_string(sp.dim) + "]"});
            }
    // (c) and (d)
    for (const auto& st : sp.strata) {
        const int c = st.codim;
        const int qc = c - 2 - p.at(c);
        r.c.emplace(c, true);
        r.d.emplace(c, true);
        CellSet ul = ~sp.skeleton(c) & x.full_set();
        for_each_cell(st.cells, [&](int s) {
            for (auto& [deg, n] : h[s].entries())
                if (deg <= qc) {
                    r.c[c] = false;
                    add({"c", c, s, x.name(s), deg, n, 0, 0,
                         "H^" + std::to_string(deg) + " = " + std::to_string(n) + " in degree <= " + std::to_string(qc)});
                }
            ChainMap m = unit_at(bsh, ul, s);
            GradedDims ht = cohomology_dims(m.target());
            int lo = std::min(h[s].lo(), ht.lo()), hi = std::max(h[s].hi(), ht.hi());
            for (int deg = std::max(lo, qc + 1); deg <= hi; ++deg) {
                std::size_t a = h[s].at(deg), t = ht.at(deg);
                if (a == 0 && t == 0) continue;
                std::size_t rk = induced_rank(m, deg);
                if (a != t || rk != a) {
                    r.d[c] = false;
                    add({"d", c, s, x.name(s), deg, a, t, rk,
                         "attaching map in degree " + std::to_string(deg) + " has rank " + std::to_string(rk) + " (" +
                             std::to_string(a) + " -> " + std::to_string(t) + ")"});
                }
            }
        });
    }
    return r;
}

// ---------------------------------------------------------------- Witt condition

struct WittReport {
    bool witt = true;
    std::vector<std::string> failing_links;
    std::vector<std::string> witnesses;
};

// Every even-dimensional link L of dimension 2s has IH^s_m(L) = 0.
inline WittReport witt_check(const StratifiedSpace& sp) {
    WittReport r;
    for (std::size_t i = 0; i < sp.strata.size(); ++i) {
        const auto& st = sp.strata[i];
        const auto& l = st.link;
        if (l->dim % 2 != 0) continue;
        const int s = l->dim / 2;
        GradedDims g;
        if (l->dim == 0) {
            g = GradedDims::from_vector(0, {static_cast<std::size_t>(l->x->size())});
        } else {
            auto ic = build_IC(l, gm_perversity('m', l->dim));
            g = cohomology_dims(ic.complex.total());
        }
        if (g.at(s) != 0) {
            r.witt = false;
            r.failing_links.push_back(l->name);
            r.witnesses.push_back("stratum " + std::to_string(i) + ": link " + l->name + " has IH^" +
                                  std::to_string(s) + " of dimension " + std::to_string(g.at(s)));
        }
    }
    return r;
}

}  // namespace kis
