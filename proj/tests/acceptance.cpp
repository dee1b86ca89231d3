// Acceptance run: one PASS/FAIL line per criterion with its time budget.
// Exit status is the number of failing criteria.

#include "kis/corpus.hpp"
#include "kis/duality.hpp"
#include "kis/toric.hpp"
#include "oracles.hpp"

#include <chrono>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>

using namespace kis;

namespace {

struct Outcome {
    bool ok = true;
    std::vector<std::string> failures;
    std::string summary;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (failures.size() < 8) failures.push_back(what);
        }
    }
};

int failed = 0;

void run(int n, double limit_s, const std::function<void(Outcome&)>& body) {
    Outcome o;
    auto t0 = std::chrono::steady_clock::now();
    try {
        body(o);
    } catch (const std::exception& e) {
        o.ok = false;
        o.failures.push_back(std::string("exception: ") + e.what());
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    bool in_time = s <= limit_s;
    bool pass = o.ok && in_time;
    if (!pass) ++failed;
    std::ostringstream t;
    t << std::fixed << std::setprecision(2) << s << " s / " << limit_s << " s";
    std::cout << "criterion " << n << ": " << (pass ? "PASS" : "FAIL") << "  (" << t.str() << ")  " << o.summary << "\n";
    if (!in_time) std::cout << "    over the time limit\n";
    for (const auto& f : o.failures) std::cout << "    " << f << "\n";
    std::cout.flush();
}

oracle::Dims betti_of(const CWPoset& x) {
    std::vector<int> dims;
    for (int c = 0; c < x.size(); ++c) dims.push_back(x.dim(c));
    std::vector<oracle::Incidence> inc;
    for (const auto& cv : x.covers()) inc.push_back({cv.face, cv.coface, cv.sign});
    return oracle::cellular_betti(dims, inc);
}

GradedDims g(const oracle::Dims& d) { return GradedDims::from_vector(0, d); }

std::vector<Perversity> perversities(const StratifiedSpace& sp) {
    if (sp.dim < 2) return {Perversity{}};
    return gm_perversities(sp.dim);
}

struct Built {
    std::string label;
    SheafComplex k;
};

// Every complex the pipeline builds on a space, plus the constant sheaf.
std::vector<Built> all_complexes(const SpacePtr& sp) {
    std::vector<Built> out;
    out.push_back({"constant", constant_sheaf(sp->x)});
    for (const auto& p : perversities(*sp))
        for (Theory th : {Theory::IS, Theory::IC})
            out.push_back({theory_name(th) + "_" + p.name, build_complex(sp, th, p).complex});
    return out;
}

GradedDims cotruncate(const GradedDims& h, int q) {
    GradedDims out;
    for (auto& [k, n] : h.entries())
        if (k > q) out.set(k, n);
    return out;
}

GradedDims truncate(const GradedDims& h, int q) {
    GradedDims out;
    for (auto& [k, n] : h.entries())
        if (k <= q) out.set(k, n);
    return out;
}

}  // namespace

int main() {
    const auto& corpus_entries = corpus::entries();

    run(1, 30, [&](Outcome& o) {
        std::size_t complexes = 0, cells = 0;
        for (const auto& e : corpus_entries) {
            auto sp = e.make();
            for (const auto& b : all_complexes(sp)) {
                ++complexes;
                auto h = cohomology_dims(sections(b.k, sp->x->full_set()));
                auto hc = cohomology_dims(sections_c(b.k, sp->x->full_set()));
                o.expect(h == hc, e.name + " " + b.label + ": sections " + h.str() + " vs compact " + hc.str());
                for (int c = 0; c < sp->x->size(); ++c) {
                    ++cells;
                    auto star = cohomology_dims(sections(b.k, open_star(*sp->x, c)));
                    auto stalk = cohomology_dims(b.k.stalk(c));
                    o.expect(star == stalk, e.name + " " + b.label + " at " + sp->x->name(c) + ": star " + star.str() +
                                                " vs stalk " + stalk.str());
                }
            }
        }
        o.summary = std::to_string(complexes) + " complexes, " + std::to_string(cells) + " star checks";
    });

    run(2, 5, [&](Outcome& o) {
        struct Row {
            SpacePtr sp;
            oracle::Dims expect;
        };
        for (const Row& r : {Row{corpus::s2(), oracle::simplicial_betti(oracle::boundary_of_simplex(3))},
                             Row{corpus::t2(), oracle::simplicial_betti(oracle::seven_vertex_torus())}}) {
            auto q = constant_sheaf(r.sp->x);
            auto is = build_IS(r.sp, Perversity{}).complex;
            auto ic = build_IC(r.sp, Perversity{}).complex;
            auto hq = cohomology_dims(sections(q));
            o.expect(hq == g(r.expect), r.sp->name + ": constant " + hq.str());
            o.expect(cohomology_dims(is.total()) == hq, r.sp->name + ": IS global differs from constant");
            o.expect(cohomology_dims(ic.total()) == hq, r.sp->name + ": IC global differs from constant");
            for (int c = 0; c < r.sp->x->size(); ++c) {
                auto s = cohomology_dims(q.stalk(c));
                o.expect(cohomology_dims(is.stalk(c)) == s && cohomology_dims(ic.stalk(c)) == s,
                         r.sp->name + ": stalk differs at " + r.sp->x->name(c));
            }
            o.summary += r.sp->name + " " + hq.str() + " ";
        }
    });

    run(3, 120, [&](Outcome& o) {
        for (const char* n : {"sigma_t2", "sigma_t2_x_s1", "sigma_s1xs2", "sigma_sigma_t2"}) {
            auto sp = corpus::by_name(n);
            for (const auto& p : gm_perversities(sp->dim)) {
                auto r = check_AXS1(build_IS(sp, p).complex, *sp, p);
                std::string first = r.witnesses.empty() ? "" : ": " + r.witnesses.front().detail;
                o.expect(r.passes(), std::string(n) + " IS_" + p.name + " fails AXS1" + first);
            }
        }
        auto sp = corpus::sigma_t2();
        auto m = gm_perversity('m', 3);
        auto rc = check_AXS1(constant_sheaf(sp->x), *sp, m);
        auto ri = check_AXS1(build_IC(sp, m).complex, *sp, m);
        o.expect(!rc.passes() && !rc.witnesses.empty(), "constant sheaf passes AXS1 on sigma_t2");
        o.expect(!ri.passes() && !ri.witnesses.empty(), "IC_m passes AXS1 on sigma_t2");
        o.summary = "IS passes on 4 spaces x 4 perversities; constant fails (" + std::to_string(rc.witnesses.size()) +
                    " witnesses, first: (" + rc.witnesses.front().condition + ") " + rc.witnesses.front().detail +
                    "); IC_m fails (" + std::to_string(ri.witnesses.size()) + " witnesses)";
    });

    run(4, 30, [&](Outcome& o) {
        struct Pole {
            const char* space;
            oracle::Dims is_m;
        };
        for (const Pole& r : {Pole{"sigma_t2", {0, 0, 1}}, Pole{"sigma_s1xs2", {0, 0, 1, 1}}}) {
            auto sp = corpus::by_name(r.space);
            auto k = build_IS(sp, gm_perversity('m', sp->dim)).complex;
            for (const auto& st : sp->strata)
                for_each_cell(st.cells, [&](int c) {
                    auto h = cohomology_dims(k.stalk(c));
                    o.expect(h == g(r.is_m), std::string(r.space) + " IS_m pole stalk " + h.str());
                });
        }
        std::size_t checks = 0, literal = 0;
        for (const auto& e : corpus_entries) {
            auto sp = e.make();
            if (sp->strata.empty()) continue;
            for (const auto& p : perversities(*sp)) {
                auto q = complement(p);
                auto is = build_IS(sp, p).complex;
                auto ic = build_IC(sp, q).complex;
                for (const auto& st : sp->strata) {
                    const int qc = st.codim - 2 - p.at(st.codim);
                    CellSet out = ~sp->skeleton(st.codim) & sp->x->full_set();
                    // strata with only regular cells nearby: the deleted
                    // neighborhood is a product with the link
                    bool depth_one = true;
                    for (const auto& other : sp->strata)
                        if (other.codim < st.codim) depth_one = false;
                    GradedDims link = g(betti_of(*st.link->x));
                    for_each_cell(st.cells, [&](int c) {
                        ++checks;
                        CellSet del = sp->x->above(c) & out;
                        auto d_is = cohomology_dims(sections(is, del));
                        auto d_ic = cohomology_dims(sections(ic, del));
                        auto s_is = cohomology_dims(is.stalk(c));
                        auto s_ic = cohomology_dims(ic.stalk(c));
                        std::string at = e.name + " " + p.name + "/" + q.name + " at " + sp->x->name(c);
                        o.expect(s_is == cotruncate(d_is, qc), at + ": IS stalk " + s_is.str() + " vs deleted " + d_is.str());
                        o.expect(s_ic == truncate(d_ic, qc), at + ": IC stalk " + s_ic.str() + " vs deleted " + d_ic.str());
                        if (depth_one) {
                            ++literal;
                            o.expect(d_is == link && d_ic == link, at + ": deleted neighborhood is not the link " + link.str());
                            o.expect(s_is + s_ic == link, at + ": " + s_is.str() + " + " + s_ic.str() + " != " + link.str());
                        }
                    });
                }
            }
        }
        o.summary = "pole stalks (0,0,1) and (0,0,1,1); partition at " + std::to_string(checks) + " singular cells (" +
                    std::to_string(literal) + " against the link oracle)";
    });

    run(5, 120, [&](Outcome& o) {
        std::size_t pairs = 0;
        for (const auto& e : corpus_entries) {
            auto sp = e.make();
            auto cw = validate_cw(*sp->x);
            if (!(cw.closed_pseudomanifold && cw.orientable)) continue;
            for (const auto& p : perversities(*sp)) {
                ++pairs;
                auto r = duality_report(sp, p);
                o.expect(r.verdict_global.value_or(false),
                         e.name + " " + p.name + ": " + r.is_p.dims.str() + " does not mirror " + r.is_q.dims.str());
                o.expect(r.verdict_axioms, e.name + " D(IS_" + p.name + ")[-d] fails AXS1 for " + r.q.name);
                o.expect(r.verdict_regular, e.name + " " + p.name + ": dual is not Q on the regular part");
            }
        }
        o.summary = std::to_string(pairs) + " (space, perversity) pairs";
    });

    run(6, 30, [&](Outcome& o) {
        auto w = witt_check(*corpus::sigma_t2());
        o.expect(!w.witt, "sigma_t2 accepted as Witt");
        bool witness = false;
        for (const auto& s : w.witnesses) witness |= s.find("link t2 has IH^1 of dimension 2") != std::string::npos;
        o.expect(witness, "no H^1(T^2) = 2 witness");
        o.expect(witt_check(*corpus::sigma_s1xs2()).witt, "sigma_s1xs2 rejected");
        auto sd = self_duality_check(corpus::sigma_s1xs2());
        o.expect(sd.passes(), "self-duality fails on sigma_s1xs2");
        o.summary = "sigma_t2 rejected (" + (w.witnesses.empty() ? std::string("-") : w.witnesses.front()) +
                    "); sigma_s1xs2 Witt and self-dual " + (sd.report ? sd.report->is_p.dims.str() : "");
    });

    run(7, 60, [&](Outcome& o) {
        auto a = uniqueness_probe(corpus::sigma_t2(), gm_perversity('m', 3), {0, 1, 2, 3, 4});
        auto b = uniqueness_probe(corpus::sigma_sigma_t2(), gm_perversity('m', 4), {0, 1, 2});
        o.expect(a.agree, "sigma_t2: " + a.difference);
        o.expect(b.agree, "sigma_sigma_t2: " + b.difference);
        o.summary = "sigma_t2 5 seeds " + a.global.front().str() + ", sigma_sigma_t2 3 seeds " + b.global.front().str();
    });

    run(8, 60, [&](Outcome& o) {
        using namespace toric;
        auto sing = [](const Fan& f) { return orbit_stratification(f, Mode::singular_orbits); };
        auto m4 = gm_perversity('m', 4);
        auto m6 = gm_perversity('m', 6);
        Perversity m2 = gm_perversity('m', 2);
        auto p1g = fan_global_betti(p1(), sing(p1()), m2, Theory::IC).dims;
        auto p2g = fan_global_betti(p2(), sing(p2()), m4, Theory::IC).dims;
        o.expect(p1g == g({1, 0, 1}), "P1 " + p1g.str());
        o.expect(p2g == g({1, 0, 1, 0, 1}), "P2 " + p2g.str());
        for (Theory th : {Theory::IS, Theory::IC}) {
            o.expect(fan_global_betti(p1(), sing(p1()), m2, th).dims == g({1, 0, 1}), "P1 " + theory_name(th));
            o.expect(fan_global_betti(p2(), sing(p2()), m4, th).dims == g({1, 0, 1, 0, 1}), "P2 " + theory_name(th));
        }
        auto w = fan_global_betti(p112(), sing(p112()), m4, Theory::IC).dims;
        o.expect(w == g({1, 0, 1, 0, 1}), "P(1,1,2) IC_m " + w.str());
        int c = p112().find({0, 2});
        auto ic = fan_local_tables(p112(), sing(p112()), m4, Theory::IC).stalk[c];
        auto is = fan_local_tables(p112(), sing(p112()), m4, Theory::IS).stalk[c];
        o.expect(ic.range(0, 3) == oracle::Dims{1, 0, 0, 0}, "P(1,1,2) IC_m stalk " + ic.str());
        o.expect(is.range(0, 3) == oracle::Dims{0, 0, 0, 1} && is.hi() == 3, "P(1,1,2) IS_m stalk " + is.str());
        Fan k = conifold();
        auto ks = fan_local_tables(k, sing(k), m6, Theory::IS).stalk[k.find({0, 1, 2, 3})];
        o.expect(ks == g({0, 0, 0, 1, 0, 1}), "conifold IS_m stalk " + ks.str());
        for (const auto& n : fan_names()) {
            Fan f = by_name(n);
            for (Mode mode : {Mode::singular_orbits, Mode::all_orbits})
                o.expect(toric_witt(f, orbit_stratification(f, mode)).witt, n + " not Witt");
        }
        // P^1 with both fixed points as strata against the CW sphere with two poles
        auto sp = corpus::s2_poles();
        auto all = orbit_stratification(p1(), Mode::all_orbits);
        for (Theory th : {Theory::IS, Theory::IC}) {
            auto cw = build_complex(sp, th, m2).complex;
            auto fg = fan_global_betti(p1(), all, m2, th).dims;
            auto cg = cohomology_dims(cw.total());
            o.expect(fg == cg, "P1 " + theory_name(th) + " fan " + fg.str() + " vs CW " + cg.str());
            auto loc = fan_local_tables(p1(), all, m2, th);
            for (const auto& st : sp->strata)
                for_each_cell(st.cells, [&](int cell) {
                    auto h = cohomology_dims(cw.stalk(cell));
                    o.expect(h == loc.stalk[p1().find({0})] && h == loc.stalk[p1().find({1})],
                             "P1 " + theory_name(th) + " pole stalk " + h.str());
                });
            auto fl = loc.stalk[0];
            bool regular_ok = true;
            for_each_cell(sp->regular(), [&](int cell) { regular_ok &= cohomology_dims(cw.stalk(cell)) == fl; });
            o.expect(regular_ok, "P1 " + theory_name(th) + " regular stalks differ from the open orbit");
        }
        o.summary = "P1 " + p1g.str() + ", P2 " + p2g.str() + ", P(1,1,2) " + w.str() + " stalks " + ic.str(0, 3) + "/" +
                    is.str(0, 3) + ", conifold " + ks.str();
    });

    run(9, 10, [&](Outcome& o) {
        std::size_t cw_checks = 0, fan_checks = 0;
        for (const auto& e : corpus_entries) {
            auto sp = e.make();
            const std::string& n = e.name;
            for (const auto& b : all_complexes(sp)) {
                ++cw_checks;
                long long lhs = cohomology_dims(sections(b.k)).euler(), rhs = 0;
                for (int c = 0; c < sp->x->size(); ++c)
                    rhs += (sp->x->dim(c) % 2 ? -1 : 1) * cohomology_dims(b.k.stalk(c)).euler();
                o.expect(lhs == rhs, n + " " + b.label + ": " + std::to_string(lhs) + " vs " + std::to_string(rhs));
            }
        }
        using namespace toric;
        for (const auto& n : fan_names()) {
            Fan f = by_name(n);
            if (!is_complete(f)) continue;
            for (Mode mode : {Mode::singular_orbits, Mode::all_orbits})
                for (const auto& p : gm_perversities(2 * f.rank))
                    for (Theory th : {Theory::IS, Theory::IC}) {
                        ++fan_checks;
                        auto b = fan_global_betti(f, orbit_stratification(f, mode), p, th);
                        o.expect(b.euler_rule(), n + " " + theory_name(th) + "_" + p.name + ": " + std::to_string(b.euler) +
                                                     " vs " + std::to_string(b.fixed_point_euler));
                    }
        }
        o.summary = std::to_string(cw_checks) + " CW complexes, " + std::to_string(fan_checks) + " fan tables";
    });

    std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << "\n";
    return failed;
}
