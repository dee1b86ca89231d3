// kis: command-line front-end for intersection space complexes.
//
// Exit codes: 0 pass, 1 verdict failure, 2 input error.

#include "kis/io.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>

using namespace kis;
using io::json;
namespace fs = std::filesystem;

namespace {

constexpr int kPass = 0, kFail = 1, kInput = 2;

struct Common {
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "text";
    bool json() const { return format == "json"; }
};

void add_common(CLI::App* c, Common& o) {
    c->add_option("--seed", o.seed, "splitting seed");
    c->add_option("--out", o.out, "write the JSON report (or artifacts) here");
    c->add_option("--format", o.format, "stdout format")->check(CLI::IsMember({"json", "text"}));
}

// Aligned text table.
struct Table {
    std::vector<std::vector<std::string>> rows;
    void add(std::vector<std::string> r) { rows.push_back(std::move(r)); }
    void print(std::ostream& os) const {
        std::vector<std::size_t> w;
        for (const auto& r : rows)
            for (std::size_t i = 0; i < r.size(); ++i) {
                if (w.size() <= i) w.push_back(0);
                w[i] = std::max(w[i], r[i].size());
            }
        for (const auto& r : rows) {
            for (std::size_t i = 0; i < r.size(); ++i) {
                os << std::left << std::setw(static_cast<int>(w[i])) << r[i];
                if (i + 1 < r.size()) os << "  ";
            }
            os << "\n";
        }
    }
};

std::string dims_str(const GradedDims& g) { return g.empty() ? "0" : g.str(std::min(0, g.lo()), g.hi()); }

std::string yes(bool b) { return b ? "pass" : "FAIL"; }

void emit(const Common& o, const json& report, const std::function<void()>& text) {
    if (!o.out.empty()) io::write_json(o.out, report);
    if (o.json())
        std::cout << report.dump(2) << "\n";
    else
        text();
}

SpacePtr load_checked(const std::string& path) {
    auto s = io::load_space(path);
    auto r = validate_stratification(*s);
    if (!r.valid()) {
        std::string msg = path + ": invalid stratified space";
        for (const auto& v : r.violations) msg += "\n  " + v;
        throw io::InputError(msg);
    }
    return s;
}

Perversity perversity_for(const std::string& name, const StratifiedSpace& s) {
    auto p = io::parse_perversity(name, s.dim);
    for (int c : s.codims())
        if (!p.defined_at(c))
            throw io::InputError("perversity '" + name + "' is not defined in codimension " + std::to_string(c));
    return p;
}

BuildResult build(const SpacePtr& s, Theory th, const Perversity& p, std::uint64_t seed, bool slices) {
    BuildOptions o;
    o.seed = seed;
    o.check_slices = slices;
    return build_complex(s, th, p, o);
}

// ---------------------------------------------------------------- space commands

int cmd_build_space(const Common& o, const std::string& path, const std::string& pname, const std::string& theory,
                    bool slices) {
    auto s = load_checked(path);
    auto p = perversity_for(pname, *s);
    auto b = build(s, parse_theory(theory), p, o.seed, slices);
    json log = io::build_log_json(b);
    auto table = betti_table(*s, b.complex, theory_name(b.theory) + "_" + p.name);
    json report = {{"log", log}, {"betti", io::betti_json(table)}, {"stalks", io::stalks_json(*s, b.complex, true)}};
    if (!o.out.empty()) {
        fs::create_directories(o.out);
        io::write_json(fs::path(o.out) / "complex.json", io::sheaf_json(b.complex));
        io::write_json(fs::path(o.out) / "log.json", log);
    }
    if (o.json()) {
        std::cout << report.dump(2) << "\n";
    } else {
        std::cout << s->name << ": " << theory_name(b.theory) << " with perversity " << p.name << ", seed " << o.seed << "\n";
        Table t;
        t.add({"stage", "codim", "cutoff", "top cell", "G", "stalk", "contract"});
        for (const auto& st : b.log)
            for (const auto& x : st.strata)
                t.add({std::to_string(st.stage), std::to_string(st.codim), std::to_string(st.cutoff), s->x->name(x.top_cell),
                       dims_str(x.g), dims_str(x.expected), yes(x.ok())});
        t.print(std::cout);
        std::cout << "global " << dims_str(table.dims) << "  euler " << table.euler << "\n";
        if (!o.out.empty()) std::cout << "wrote " << (fs::path(o.out) / "complex.json").string() << " and log.json\n";
    }
    return b.contract_ok() ? kPass : kFail;
}

int cmd_axioms(const Common& o, const std::string& path, const std::string& pname, const std::string& complex_path,
               const std::string& theory) {
    auto s = load_checked(path);
    auto p = perversity_for(pname, *s);
    SheafComplex k;
    std::string id;
    if (!complex_path.empty()) {
        k = io::parse_sheaf(io::read_json(complex_path), s->x, complex_path);
        id = complex_path;
    } else if (theory == "constant") {
        k = constant_sheaf(s->x);
        id = "constant";
    } else {
        k = build(s, parse_theory(theory), p, o.seed, false).complex;
        id = theory + "_" + p.name;
    }
    auto r = check_AXS1(k, *s, p);
    json report = io::axiom_json(r);
    report["space"] = s->name;
    report["complex"] = id;
    report["perversity"] = io::perversity_json(p);
    report["seed"] = o.seed;
    emit(o, report, [&] {
        std::cout << s->name << ": " << id << " against perversity " << p.name << "\n";
        Table t;
        t.add({"condition", "codim", "verdict"});
        t.add({"a", "-", yes(r.a)});
        t.add({"b", "-", yes(r.b)});
        for (auto& [c, v] : r.c) t.add({"c", std::to_string(c), yes(v)});
        for (auto& [c, v] : r.d) t.add({"d", std::to_string(c), yes(v)});
        t.print(std::cout);
        for (const auto& w : r.witnesses) std::cout << "  witness (" << w.condition << ") at " << w.cell_name << ": " << w.detail << "\n";
    });
    return r.passes() ? kPass : kFail;
}

int cmd_betti(const Common& o, const std::string& path, const std::string& pname, const std::string& theory) {
    auto s = load_checked(path);
    SheafComplex k;
    std::string id;
    if (theory == "constant") {
        k = constant_sheaf(s->x);
        id = "constant";
    } else {
        auto p = perversity_for(pname, *s);
        k = build(s, parse_theory(theory), p, o.seed, false).complex;
        id = theory + "_" + p.name;
    }
    auto t = betti_table(*s, k, id);
    json report = io::betti_json(t);
    report["stalks"] = io::stalks_json(*s, k, true);
    report["seed"] = o.seed;
    emit(o, report, [&] {
        std::cout << s->name << " " << id << ": " << dims_str(t.dims) << "  euler " << t.euler;
        if (t.compact_agrees) std::cout << "  compact " << yes(*t.compact_agrees);
        std::cout << "\n";
    });
    return t.compact_agrees.value_or(true) ? kPass : kFail;
}

void print_duality(const DualityReport& r) {
    Table t;
    t.add({"table", "dims"});
    t.add({r.is_p.complex, dims_str(r.is_p.dims)});
    t.add({r.is_q.complex, dims_str(r.is_q.dims)});
    t.add({r.dual.complex, dims_str(r.dual.dims)});
    t.print(std::cout);
    std::cout << "dual satisfies the axioms for " << r.q.name << ": " << yes(r.verdict_axioms) << "\n";
    std::cout << "dual is Q on the regular part: " << yes(r.verdict_regular) << "\n";
    if (r.verdict_global) std::cout << "H^k(IS_" << r.p.name << ") = H^{d-k}(IS_" << r.q.name << "): " << yes(*r.verdict_global) << "\n";
    for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
}

int cmd_duality(const Common& o, const std::string& path, const std::string& pname) {
    auto s = load_checked(path);
    auto p = perversity_for(pname, *s);
    auto r = duality_report(s, p, o.seed);
    json report = io::duality_json(r);
    report["space"] = s->name;
    report["seed"] = o.seed;
    emit(o, report, [&] {
        std::cout << s->name << ": duality for (" << r.p.name << ", " << r.q.name << ")\n";
        print_duality(r);
    });
    return r.passes() ? kPass : kFail;
}

int cmd_selfdual(const Common& o, const std::string& path) {
    auto s = load_checked(path);
    auto r = self_duality_check(s, o.seed);
    json report = io::selfdual_json(r);
    report["space"] = s->name;
    report["seed"] = o.seed;
    emit(o, report, [&] {
        if (r.refused) {
            std::cout << s->name << ": refused, " << r.refusal << "\n";
            return;
        }
        std::cout << s->name << ": self-duality of the middle complex\n";
        print_duality(*r.report);
        std::cout << "self-dual: " << yes(r.self_dual) << "\n";
        for (const auto& n : r.notes) std::cout << "note: " << n << "\n";
    });
    return r.passes() ? kPass : kFail;
}

int cmd_witt(const Common& o, const std::string& path) {
    auto s = load_checked(path);
    auto r = witt_check(*s);
    json report = io::witt_json(r);
    report["space"] = s->name;
    emit(o, report, [&] {
        std::cout << s->name << ": " << (r.witt ? "Witt" : "not Witt") << "\n";
        for (const auto& w : r.witnesses) std::cout << "  " << w << "\n";
    });
    return r.witt ? kPass : kFail;
}

// ---------------------------------------------------------------- toric commands

int cmd_toric(const Common& o, const std::string& sub, const std::string& path, const std::string& mode,
              const std::string& pname, const std::string& theory) {
    auto f = io::load_fan(path);
    auto rep = toric::validate_fan(f);
    if (sub == "validate") {
        json report = io::fan_report_json(rep);
        report["fan"] = io::fan_json(f);
        emit(o, report, [&] {
            std::cout << path << ": " << (rep.valid() ? "valid fan" : "invalid fan") << "\n";
            for (const auto& v : rep.violations) std::cout << "  violation: " << v << "\n";
            for (const auto& n : rep.notes) std::cout << "  note: " << n << "\n";
        });
        return rep.valid() ? kPass : kFail;
    }
    if (!rep.valid()) {
        std::string msg = path + ": invalid fan";
        for (const auto& v : rep.violations) msg += "\n  " + v;
        throw io::InputError(msg);
    }
    auto s = toric::orbit_stratification(f, toric::parse_mode(mode));
    if (sub == "strata") {
        json report = io::orbit_json(f, s);
        emit(o, report, [&] {
            Table t;
            t.add({"cone", "codim", "multiplicity"});
            for (std::size_t i = 0; i < s.strata.size(); ++i)
                t.add({f.cone_name(s.strata[i]), std::to_string(s.codim[i]), s.mult[static_cast<std::size_t>(s.strata[i])].str()});
            std::cout << toric::mode_name(s.mode) << ": " << s.strata.size() << " strata\n";
            t.print(std::cout);
        });
        return kPass;
    }
    if (sub == "witt") {
        auto v = toric::toric_witt(f, s);
        json report = {{"witt", v.witt}, {"witnesses", v.witnesses}, {"mode", toric::mode_name(s.mode)}};
        emit(o, report, [&] {
            std::cout << (v.witt ? "Witt" : "not Witt") << "\n";
            for (const auto& w : v.witnesses) std::cout << "  " << w << "\n";
        });
        return v.witt ? kPass : kFail;
    }
    Perversity p = io::parse_perversity(pname, 2 * f.rank);
    for (int c : s.codim)
        if (!p.defined_at(c)) throw io::InputError("perversity '" + pname + "' is not defined in codimension " + std::to_string(c));
    Theory th = parse_theory(theory);
    auto m = toric::fan_model(f, s, p, th);
    auto tables = toric::local_tables(m);
    json report = {{"theory", theory_name(th)},
                   {"perversity", io::perversity_json(p)},
                   {"mode", toric::mode_name(s.mode)},
                   {"faces", io::local_tables_json(f, s, tables)}};
    int code = kPass;
    std::optional<toric::FanBetti> global;
    if (sub == "betti") {
        if (!toric::is_complete(f)) throw io::InputError(path + ": fan is not complete; use 'toric stalks' for local tables");
        global = toric::fan_global_betti(f, s, p, th);
        report["global"] = io::dims_json(global->dims);
        report["euler"] = global->euler;
        report["fixed_point_euler"] = global->fixed_point_euler;
        report["euler_rule"] = global->euler_rule();
        if (!global->euler_rule()) code = kFail;
    } else if (sub != "stalks") {
        throw io::InputError("unknown toric subcommand '" + sub + "'");
    }
    emit(o, report, [&] {
        std::cout << theory_name(th) << "_" << p.name << ", " << toric::mode_name(s.mode) << "\n";
        Table t;
        t.add({"cone", "stratum", "stalk", "punctured slice"});
        for (std::size_t i = 0; i < f.cones.size(); ++i)
            t.add({f.cone_name(static_cast<int>(i)), s.is_stratum[i] ? "yes" : "no", dims_str(tables.stalk[i]),
                   tables.punctured[i] ? dims_str(*tables.punctured[i]) : "-"});
        t.print(std::cout);
        if (global)
            std::cout << "global " << dims_str(global->dims) << "  euler " << global->euler << "  fixed points "
                      << global->fixed_point_euler << "\n";
    });
    return code;
}

// ---------------------------------------------------------------- recipes and corpus

int cmd_combinate(const Common& o, const std::string& recipe, const std::string& op, const std::string& of,
                  const std::string& with) {
    SpacePtr s;
    if (!recipe.empty()) {
        json j = io::read_json(recipe);
        if (!io::is_recipe(j)) throw io::InputError(recipe + ": not a recipe (missing 'op')");
        s = io::apply_recipe(j, fs::path(recipe).parent_path(), recipe);
    } else {
        if (op.empty() || of.empty()) throw io::InputError("combinate needs a recipe file or --op and --of");
        json j = {{"op", op}, {"of", of}};
        if (!with.empty()) j["with"] = with;
        s = io::apply_recipe(j, fs::current_path());
    }
    auto r = validate_stratification(*s);
    json space = io::space_json(*s);
    if (!o.out.empty()) io::write_json(o.out, space);
    if (o.json()) {
        std::cout << space.dump(2) << "\n";
    } else {
        std::cout << s->name << ": " << s->x->size() << " cells, dim " << s->dim << ", " << s->strata.size() << " strata";
        std::cout << (r.valid() ? ", valid" : ", INVALID") << "\n";
        for (const auto& v : r.violations) std::cout << "  violation: " << v << "\n";
        if (!o.out.empty()) std::cout << "wrote " << o.out << "\n";
    }
    return r.valid() ? kPass : kFail;
}

int cmd_corpus_list(const Common& o) {
    json list = json::array();
    for (const auto& e : corpus::entries()) list.push_back({{"name", e.name}, {"description", e.description}, {"recipe", e.recipe}});
    json fans = toric::fan_names();
    emit(o, json{{"spaces", list}, {"fans", fans}}, [&] {
        Table t;
        for (const auto& e : corpus::entries()) t.add({e.name, e.recipe ? "recipe" : "cw", e.description});
        t.print(std::cout);
        std::cout << "fans:";
        for (const auto& n : toric::fan_names()) std::cout << " " << n;
        std::cout << "\n";
    });
    return kPass;
}

// Writes corpus entries to the cache (or --out directory) from the built-in
// constructors; nothing is downloaded.
int cmd_corpus_fetch(const Common& o, std::vector<std::string> names, bool all) {
    fs::path dir = o.out.empty() ? io::cache_dir() : fs::path(o.out);
    if (all) {
        names.clear();
        for (const auto& e : corpus::entries()) names.push_back(e.name);
        for (const auto& n : toric::fan_names()) names.push_back(n);
    }
    if (names.empty()) throw io::InputError("corpus fetch needs entry names or --all");
    for (const auto& n : names) {
        auto fans = toric::fan_names();
        fs::path p;
        if (std::find(fans.begin(), fans.end(), n) != fans.end()) {
            p = dir / "fans" / (n + ".json");
            io::write_json(p, io::fan_json(toric::by_name(n)));
        } else {
            SpacePtr s;
            try {
                s = corpus::by_name(n);
            } catch (const StructuralError& e) {
                throw io::InputError(e.what());
            }
            p = dir / (n + ".json");
            io::write_json(p, io::space_json(*s));
        }
        if (!o.json()) std::cout << "wrote " << p.string() << "\n";
    }
    return kPass;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kis: intersection space complexes on stratified CW posets and toric fans"};
    app.require_subcommand(1);
    Common o;

    std::string space, fan, perv = "m", theory = "IS", strat = "singular", complex_path, recipe, op, of, with;
    bool slices = false, all = false;
    std::vector<std::string> names;

    auto* b = app.add_subcommand("build", "build IS or IC; dump the complex and the build log");
    add_common(b, o);
    auto* b_space = b->add_option("--space", space, "space or recipe JSON");
    auto* b_fan = b->add_option("--fan", fan, "fan JSON");
    b_space->excludes(b_fan);
    b->add_option("--perversity", perv, "m, n, 0, t or a table like 2:0,3:1");
    b->add_option("--theory", theory)->check(CLI::IsMember({"IS", "IC"}));
    b->add_option("--stratification", strat, "fans: singular or all")->check(CLI::IsMember({"singular", "all"}));
    b->add_flag("--check-slices", slices, "cross-check every stage on the slice cone(link)");

    auto* ax = app.add_subcommand("axioms", "check the intersection space axioms");
    add_common(ax, o);
    ax->add_option("--space", space)->required();
    ax->add_option("--perversity", perv);
    ax->add_option("--complex", complex_path, "dumped complex to check");
    ax->add_option("--theory", theory, "IS, IC or constant when no dump is given")->check(CLI::IsMember({"IS", "IC", "constant"}));

    auto* be = app.add_subcommand("betti", "global cohomology table");
    add_common(be, o);
    be->add_option("--space", space)->required();
    be->add_option("--perversity", perv);
    be->add_option("--theory", theory)->check(CLI::IsMember({"IS", "IC", "constant"}));

    auto* du = app.add_subcommand("duality", "Poincare duality report for (p, complement)");
    add_common(du, o);
    du->add_option("--space", space)->required();
    du->add_option("--perversity", perv);

    auto* sd = app.add_subcommand("selfdual", "self-duality of the middle complex on Witt spaces");
    add_common(sd, o);
    sd->add_option("--space", space)->required();

    auto* wi = app.add_subcommand("witt", "Witt condition on even-dimensional links");
    add_common(wi, o);
    wi->add_option("--space", space)->required();

    auto* to = app.add_subcommand("toric", "fans and orbit stratifications");
    to->require_subcommand(1);
    std::string toric_sub;
    for (const char* s : {"validate", "strata", "stalks", "betti", "witt"}) {
        auto* c = to->add_subcommand(s);
        add_common(c, o);
        c->add_option("--fan", fan)->required();
        c->add_option("--stratification", strat)->check(CLI::IsMember({"singular", "all"}));
        c->add_option("--perversity", perv);
        c->add_option("--theory", theory)->check(CLI::IsMember({"IS", "IC"}));
        c->callback([&toric_sub, s] { toric_sub = s; });
    }

    auto* co = app.add_subcommand("combinate", "cone, suspension and product of spaces");
    add_common(co, o);
    co->add_option("recipe", recipe, "recipe JSON");
    co->add_option("--op", op)->check(CLI::IsMember({"suspension", "cone", "product"}));
    co->add_option("--of", of);
    co->add_option("--with", with);

    auto* cp = app.add_subcommand("corpus", "curated spaces and fans");
    cp->require_subcommand(1);
    auto* cl = cp->add_subcommand("list");
    add_common(cl, o);
    auto* cf = cp->add_subcommand("fetch", "write entries as JSON into $KIS_CACHE_DIR or --out");
    add_common(cf, o);
    cf->add_option("names", names);
    cf->add_flag("--all", all);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kPass : kInput;
    }

    try {
        if (b->parsed()) {
            if (!fan.empty()) return cmd_toric(o, "stalks", fan, strat, perv, theory);
            if (space.empty()) throw io::InputError("build needs --space or --fan");
            return cmd_build_space(o, space, perv, theory, slices);
        }
        if (ax->parsed()) return cmd_axioms(o, space, perv, complex_path, complex_path.empty() ? theory : "");
        if (be->parsed()) return cmd_betti(o, space, perv, theory);
        if (du->parsed()) return cmd_duality(o, space, perv);
        if (sd->parsed()) return cmd_selfdual(o, space);
        if (wi->parsed()) return cmd_witt(o, space);
        if (to->parsed()) return cmd_toric(o, toric_sub, fan, strat, perv, theory);
        if (co->parsed()) return cmd_combinate(o, recipe, op, of, with);
        if (cl->parsed()) return cmd_corpus_list(o);
        if (cf->parsed()) return cmd_corpus_fetch(o, names, all);
    } catch (const io::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kInput;
    } catch (const StructuralError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kFail;
    }
    return kInput;
}
