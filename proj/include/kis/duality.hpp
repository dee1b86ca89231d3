#pragma once

#include "kis/iscomplex.hpp"

namespace kis {

struct BettiTable {
    std::string space;
    std::string complex;
    GradedDims dims;
    long long euler = 0;
    std::optional<bool> compact_agrees;  // sections vs sections_c on compact inputs

    std::string str(int top) const { return dims.str(0, top); }
};

inline BettiTable betti_table(const StratifiedSpace& sp, const SheafComplex& k, std::string id) {
    BettiTable t;
    t.space = sp.name;
    t.complex = std::move(id);
    t.dims = cohomology_dims(sections(k, k.base().full_set() & k.domain()));
    t.euler = t.dims.euler();
    if (detail::is_compact(*sp.x) && k.domain() == k.base().full_set())
        t.compact_agrees = cohomology_dims(sections_c(k)) == t.dims;
    return t;
}

// Stalk cohomology at every cell.
inline std::vector<GradedDims> stalk_table(const SheafComplex& k) {
    std::vector<GradedDims> out;
    for (int c = 0; c < k.base().size(); ++c)
        out.push_back(k.in_domain(c) ? cohomology_dims(k.stalk(c)) : GradedDims());
    return out;
}

struct DualityReport {
    Perversity p, q;
    BettiTable is_p, is_q, dual;
    AxiomReport dual_axioms;
    bool verdict_axioms = false;  // D IS_p [-d] satisfies the axioms for q
    bool verdict_regular = false;  // D IS_p [-d] is Q in degree 0 on the regular part
    std::optional<bool> verdict_global;  // H^k(IS_p) = H^{d-k}(IS_q)
    std::vector<std::string> notes;
    bool passes() const { return verdict_axioms && verdict_regular && verdict_global.value_or(true); }
};

inline bool dims_mirror(const GradedDims& a, const GradedDims& b, int d) {
    for (auto& [k, n] : a.entries())
        if (b.at(d - k) != n) return false;
    for (auto& [k, n] : b.entries())
        if (a.at(d - k) != n) return false;
    return true;
}

inline DualityReport duality_report(const SpacePtr& sp, const Perversity& p, std::uint64_t seed = 0) {
    DualityReport r;
    r.p = p;
    r.q = complement(p);
    BuildOptions o;
    o.seed = seed;
    auto isp = build_IS(sp, r.p, o);
    auto isq = build_IS(sp, r.q, o);
    SheafComplex dual = shift_sheaf(verdier_dual(isp.complex), -sp->dim);
    r.is_p = betti_table(*sp, isp.complex, "IS_" + r.p.name);
    r.is_q = betti_table(*sp, isq.complex, "IS_" + r.q.name);
    r.dual = betti_table(*sp, dual, "D(IS_" + r.p.name + ")[-" + std::to_string(sp->dim) + "]");
    r.dual_axioms = check_AXS1(dual, *sp, r.q);
    r.verdict_axioms = r.dual_axioms.passes();
    r.verdict_regular = true;
    GradedDims q;
    q.set(0, 1);
    for_each_cell(sp->regular(), [&](int c) {
        if (r.verdict_regular && cohomology_dims(dual.stalk(c)) != q) {
            r.verdict_regular = false;
            r.notes.push_back("dual stalk at regular cell " + sp->x->name(c) + " is not Q in degree 0");
        }
    });
    auto cw = validate_cw(*sp->x);
    if (cw.closed_pseudomanifold && cw.orientable) {
        r.verdict_global = dims_mirror(r.is_p.dims, r.is_q.dims, sp->dim);
    } else {
        r.notes.push_back("global duality not asserted: input is not a compact oriented pseudomanifold");
    }
    return r;
}

struct SelfDualityReport {
    bool refused = false;
    std::string refusal;
    WittReport witt;
    std::optional<DualityReport> report;
    bool self_complementary = true;
    bool self_dual = false;  // H^k(IS_m) = H^{d-k}(IS_m)
    std::vector<std::string> notes;
    bool passes() const { return !refused && report && report->passes() && (self_dual || !self_complementary); }
};

inline SelfDualityReport self_duality_check(const SpacePtr& sp, std::uint64_t seed = 0) {
    SelfDualityReport r;
    r.witt = witt_check(*sp);
    if (!r.witt.witt) {
        r.refused = true;
        r.refusal = "not a Witt space: " + r.witt.witnesses.front();
        return r;
    }
    Perversity m = sp->dim >= 2 ? gm_perversity('m', sp->dim) : Perversity{};
    Perversity n = complement(m);
    for (int c : sp->codims())
        if (m.at(c) != n.at(c)) r.self_complementary = false;
    r.report = duality_report(sp, m, seed);
    if (r.self_complementary) {
        r.self_dual = dims_mirror(r.report->is_p.dims, r.report->is_p.dims, sp->dim);
    } else {
        r.notes.push_back("m and n differ on an occurring codimension; checked the (m, n) pair instead");
    }
    return r;
}

struct UniquenessReport {
    std::vector<std::uint64_t> seeds;
    std::vector<GradedDims> global;
    std::vector<std::vector<GradedDims>> stalks;
    bool agree = true;
    std::string difference;
};

inline UniquenessReport uniqueness_probe(const SpacePtr& sp, const Perversity& p, const std::vector<std::uint64_t>& seeds,
                                         Theory th = Theory::IS) {
    if (seeds.size() < 2) throw StructuralError("uniqueness probe needs at least two seeds");
    UniquenessReport r;
    r.seeds = seeds;
    for (auto s : seeds) {
        BuildOptions o;
        o.seed = s;
        auto b = build_complex(sp, th, p, o);
        r.global.push_back(cohomology_dims(b.complex.total()));
        r.stalks.push_back(stalk_table(b.complex));
    }
    for (std::size_t i = 1; i < seeds.size() && r.agree; ++i) {
        if (r.global[i] != r.global[0]) {
            r.agree = false;
            r.difference = "global table differs for seed " + std::to_string(seeds[i]);
        }
        for (std::size_t c = 0; c < r.stalks[0].size() && r.agree; ++c)
            if (r.stalks[i][c] != r.stalks[0][c]) {
                r.agree = false;
                r.difference = "stalk at " + sp->x->name(static_cast<int>(c)) + " differs for seed " + std::to_string(seeds[i]);
            }
    }
    return r;
}

}  // namespace kis
