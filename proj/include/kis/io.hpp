#pragma once

#include "kis/corpus.hpp"
#include "kis/duality.hpp"
#include "kis/toric.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace kis::io {

using nlohmann::json;
namespace fs = std::filesystem;

// Malformed or invalid input; the CLI maps it to exit code 2.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline json read_json(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw InputError(p.string() + ": cannot open");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError(p.string() + ": " + e.what());
    }
}

inline void write_json(const fs::path& p, const json& j) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw InputError(p.string() + ": cannot write");
    out << j.dump(2) << "\n";
}

namespace detail {

template <class T>
T get(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InputError(where + "." + key + ": " + e.what());
    }
}

inline const json& arr(const json& j, const char* key, const std::string& where) {
    if (!j.is_object() || !j.contains(key)) throw InputError(where + ": missing '" + key + "'");
    if (!j.at(key).is_array()) throw InputError(where + "." + key + ": expected an array");
    return j.at(key);
}

inline int cell_index(const CWPoset& x, const json& id, const std::string& where) {
    if (!id.is_string()) throw InputError(where + ": cell id must be a string");
    auto s = id.get<std::string>();
    auto c = x.find(s);
    if (!c) throw InputError(where + ": unknown cell '" + s + "'");
    return *c;
}

inline CellSet cell_set(const CWPoset& x, const json& a, const std::string& where) {
    if (!a.is_array()) throw InputError(where + ": expected an array of cell ids");
    CellSet s = x.empty_set();
    for (std::size_t i = 0; i < a.size(); ++i)
        s.set(static_cast<std::size_t>(cell_index(x, a[i], where + "[" + std::to_string(i) + "]")));
    return s;
}

inline json cell_list(const CWPoset& x, const CellSet& s) {
    json a = json::array();
    for_each_cell(s, [&](int c) { a.push_back(x.name(c)); });
    return a;
}

}  // namespace detail

// ---------------------------------------------------------------- numbers and tables

inline std::string rational_str(const Rational& r) { return r.str(); }

inline Rational parse_rational(const json& j, const std::string& where) {
    try {
        if (j.is_number_integer()) return Rational(j.get<long long>());
        if (j.is_string()) return Rational::parse(j.get<std::string>());
    } catch (const std::exception& e) {
        throw InputError(where + ": bad rational: " + e.what());
    }
    throw InputError(where + ": rational must be an integer or a \"p/q\" string");
}

// Dimensions from degree 0 when nonnegative, else {"lo","dims"}.
inline json dims_json(const GradedDims& g) {
    if (g.empty()) return json::array();
    if (g.lo() >= 0) {
        json a = json::array();
        for (int k = 0; k <= g.hi(); ++k) a.push_back(g.at(k));
        return a;
    }
    json a = json::array();
    for (int k = g.lo(); k <= g.hi(); ++k) a.push_back(g.at(k));
    return json{{"lo", g.lo()}, {"dims", a}};
}

inline json perversity_json(const Perversity& p) {
    json v = json::object();
    for (auto& [c, x] : p.values) v[std::to_string(c)] = x;
    return json{{"name", p.name}, {"values", v}};
}

// A GM name (m, n, 0, t) or an explicit table "2:0,3:0,4:1".
inline Perversity parse_perversity(const std::string& s, int d) {
    if (s.size() == 1 && std::string("mn0t").find(s[0]) != std::string::npos) {
        if (d < 2) {
            Perversity p;
            p.name = s;
            p.gm = true;
            return p;
        }
        return gm_perversity(s[0], d);
    }
    if (s.find(':') == std::string::npos)
        throw InputError("unknown perversity '" + s + "' (expected m, n, 0, t or a table like 2:0,3:1)");
    Perversity p;
    p.name = s;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw InputError("bad perversity entry '" + item + "'");
        try {
            p.values[std::stoi(item.substr(0, colon))] = std::stoi(item.substr(colon + 1));
        } catch (const std::exception&) {
            throw InputError("bad perversity entry '" + item + "'");
        }
    }
    p.gm = p.satisfies_gm();
    return p;
}

// ---------------------------------------------------------------- CW posets

inline json cw_json(const CWPoset& x) {
    json cells = json::array(), covers = json::array();
    for (int c = 0; c < x.size(); ++c) cells.push_back({{"id", x.name(c)}, {"dim", x.dim(c)}});
    for (const auto& cv : x.covers())
        covers.push_back({{"face", x.name(cv.face)}, {"coface", x.name(cv.coface)}, {"sign", cv.sign}});
    return json{{"cells", cells}, {"covers", covers}};
}

inline CWPtr parse_cw(const json& j, const std::string& where = "input") {
    std::vector<std::string> names;
    std::vector<int> dims;
    std::map<std::string, int> idx;
    const auto& cells = detail::arr(j, "cells", where);
    for (std::size_t i = 0; i < cells.size(); ++i) {
        std::string w = where + ".cells[" + std::to_string(i) + "]";
        auto id = detail::get<std::string>(cells[i], "id", w);
        if (!idx.emplace(id, static_cast<int>(names.size())).second) throw InputError(w + ": duplicate cell id '" + id + "'");
        names.push_back(id);
        dims.push_back(detail::get<int>(cells[i], "dim", w));
    }
    std::vector<Cover> covers;
    const auto& cv = detail::arr(j, "covers", where);
    for (std::size_t i = 0; i < cv.size(); ++i) {
        std::string w = where + ".covers[" + std::to_string(i) + "]";
        auto face = detail::get<std::string>(cv[i], "face", w);
        auto coface = detail::get<std::string>(cv[i], "coface", w);
        int sign = detail::get<int>(cv[i], "sign", w);
        if (!idx.count(face)) throw InputError(w + ": unknown cell '" + face + "'");
        if (!idx.count(coface)) throw InputError(w + ": unknown cell '" + coface + "'");
        if (sign != 1 && sign != -1) throw InputError(w + ": sign must be +1 or -1");
        covers.push_back({idx[face], idx[coface], sign});
    }
    try {
        return std::make_shared<const CWPoset>(std::move(names), std::move(dims), std::move(covers));
    } catch (const StructuralError& e) {
        throw InputError(where + ": " + e.what());
    }
}

// ---------------------------------------------------------------- stratified spaces

inline json space_json(const StratifiedSpace& s) {
    const CWPoset& x = *s.x;
    json j = cw_json(x);
    j["name"] = s.name;
    j["dim"] = s.dim;
    if (s.apex >= 0) j["apex"] = x.name(s.apex);
    json filt = json::array();
    for (int c : s.codims()) filt.push_back({{"codim", c}, {"cells", detail::cell_list(x, s.skeleton(c))}});
    j["filtration"] = filt;
    json strata = json::array();
    for (const auto& st : s.strata) {
        const CWPoset& z = *st.slice()->x;
        json labels = json::object();
        std::vector<std::pair<int, std::pair<int, int>>> sorted(st.labels.begin(), st.labels.end());
        std::sort(sorted.begin(), sorted.end());
        for (auto& [cell, lab] : sorted) labels[x.name(cell)] = {x.name(lab.first), z.name(lab.second)};
        strata.push_back({{"codim", st.codim},
                          {"cells", detail::cell_list(x, st.cells)},
                          {"tube", detail::cell_list(x, st.tube)},
                          {"labels", labels},
                          {"link", space_json(*st.link)}});
    }
    j["strata"] = strata;
    return j;
}

inline SpacePtr parse_space(const json& j, const std::string& where = "input") {
    auto s = std::make_shared<StratifiedSpace>();
    s->x = parse_cw(j, where);
    const CWPoset& x = *s->x;
    s->name = j.value("name", std::string("space"));
    s->dim = j.contains("dim") ? detail::get<int>(j, "dim", where) : x.dim();
    if (j.contains("apex")) s->apex = detail::cell_index(x, j["apex"], where + ".apex");
    if (j.contains("strata")) {
        const auto& st = detail::arr(j, "strata", where);
        for (std::size_t i = 0; i < st.size(); ++i) {
            std::string w = where + ".strata[" + std::to_string(i) + "]";
            Stratum t;
            t.codim = detail::get<int>(st[i], "codim", w);
            t.tube = detail::cell_set(x, detail::arr(st[i], "tube", w), w + ".tube");
            if (!st[i].contains("link")) throw InputError(w + ": missing 'link'");
            t.link = parse_space(st[i]["link"], w + ".link");
            const CWPoset& z = *t.slice()->x;
            if (st[i].contains("cells")) {
                t.cells = detail::cell_set(x, st[i]["cells"], w + ".cells");
            } else {
                t.cells = x.empty_set();
            }
            if (!st[i].contains("labels") || !st[i]["labels"].is_object()) throw InputError(w + ": missing 'labels'");
            for (auto& [cell, lab] : st[i]["labels"].items()) {
                std::string wl = w + ".labels." + cell;
                if (!lab.is_array() || lab.size() != 2) throw InputError(wl + ": expected [stratum cell, slice cell]");
                int c = detail::cell_index(x, json(cell), wl);
                int a = detail::cell_index(x, lab[0], wl);
                int b = detail::cell_index(z, lab[1], wl + " (slice)");
                t.labels[c] = {a, b};
                if (!st[i].contains("cells") && lab[1].get<std::string>() == "*") t.cells.set(static_cast<std::size_t>(a));
            }
            s->strata.push_back(std::move(t));
        }
        ::kis::detail::sort_strata(s->strata);
    }
    if (j.contains("filtration")) {
        const auto& f = detail::arr(j, "filtration", where);
        for (std::size_t i = 0; i < f.size(); ++i) {
            std::string w = where + ".filtration[" + std::to_string(i) + "]";
            int c = detail::get<int>(f[i], "codim", w);
            CellSet cells = detail::cell_set(x, detail::arr(f[i], "cells", w), w + ".cells");
            if (cells != s->skeleton(c))
                throw InputError(w + ": filtration step of codimension " + std::to_string(c) +
                                 " does not match the union of the strata");
        }
        if (!f.empty() && s->strata.empty())
            throw InputError(where + ": a filtration needs strata with links and tube labels");
    }
    return s;
}

// ---------------------------------------------------------------- recipes and loading

inline fs::path cache_dir() {
    if (const char* e = std::getenv("KIS_CACHE_DIR"); e && *e) return e;
    if (const char* h = std::getenv("HOME"); h && *h) return fs::path(h) / ".cache" / "kis";
    return fs::temp_directory_path() / "kis-cache";
}

inline fs::path data_dir() {
#ifdef KIS_DATA_DIR
    return KIS_DATA_DIR;
#else
    return "data";
#endif
}

SpacePtr load_space(const fs::path& p);

// Looks next to the referring file, then in the cache and data directories;
// bare corpus names resolve to the built-in constructors.
inline SpacePtr resolve_space(const std::string& ref, const fs::path& base) {
    for (const auto& dir : {base, cache_dir(), data_dir()}) {
        fs::path cand = dir / ref;
        if (fs::exists(cand)) return load_space(cand);
    }
    std::string stem = fs::path(ref).stem().string();
    for (const auto& e : corpus::entries())
        if (e.name == stem) return e.make();
    throw InputError("cannot find '" + ref + "'");
}

inline bool is_recipe(const json& j) { return j.is_object() && j.contains("op"); }

inline SpacePtr apply_recipe(const json& j, const fs::path& base, const std::string& where = "recipe") {
    auto op = detail::get<std::string>(j, "op", where);
    auto of = [&](const char* key) {
        const json& v = j.contains(key) ? j.at(key) : throw InputError(where + ": missing '" + key + "'");
        if (is_recipe(v)) return apply_recipe(v, base, where + "." + key);
        if (v.is_object()) return parse_space(v, where + "." + key);
        return resolve_space(v.get<std::string>(), base);
    };
    try {
        SpacePtr out;
        if (op == "suspension") {
            out = suspension(of("of"));
        } else if (op == "cone") {
            out = cone(of("of"));
        } else if (op == "product") {
            auto m = of("with");
            out = product(of("of"), m->x, m->name);
        } else {
            throw InputError(where + ": unknown op '" + op + "' (expected suspension, cone or product)");
        }
        if (j.contains("name")) {
            auto c = std::make_shared<StratifiedSpace>(*out);
            c->name = j["name"].get<std::string>();
            out = c;
        }
        return out;
    } catch (const StructuralError& e) {
        throw InputError(where + ": " + e.what());
    }
}

inline SpacePtr load_space(const fs::path& p) {
    json j = read_json(p);
    if (is_recipe(j)) return apply_recipe(j, p.parent_path(), p.string());
    auto s = parse_space(j, p.string());
    if (!j.contains("name")) {
        auto c = std::make_shared<StratifiedSpace>(*s);
        c->name = p.stem().string();
        s = c;
    }
    return s;
}

// ---------------------------------------------------------------- fans

inline json fan_json(const toric::Fan& f) { return json{{"rank", f.rank}, {"rays", f.rays}, {"cones", f.cones}}; }

inline toric::Fan parse_fan(const json& j, const std::string& where = "fan") {
    toric::Fan f;
    f.rank = detail::get<int>(j, "rank", where);
    f.rays = detail::get<std::vector<toric::IVec>>(j, "rays", where);
    f.cones = detail::get<std::vector<std::vector<int>>>(j, "cones", where);
    return f;
}

inline toric::Fan load_fan(const fs::path& p) {
    if (!fs::exists(p)) {
        std::string stem = p.stem().string();
        for (const auto& n : toric::fan_names())
            if (n == stem && !p.has_parent_path()) return toric::by_name(n);
        for (const auto& dir : {cache_dir(), data_dir() / "fans"})
            if (fs::exists(dir / p)) return parse_fan(read_json(dir / p), (dir / p).string());
        throw InputError(p.string() + ": cannot open");
    }
    return parse_fan(read_json(p), p.string());
}

// ---------------------------------------------------------------- sheaf complexes

inline json matrix_json(const RatMatrix& m) {
    json t = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c)
        for (const auto& [r, v] : m.col(c)) t.push_back({r, c, v.str()});
    return t;
}

inline RatMatrix parse_matrix(const json& t, std::size_t rows, std::size_t cols, const std::string& where) {
    std::vector<std::tuple<std::size_t, std::size_t, Rational>> trip;
    if (!t.is_array()) throw InputError(where + ": expected triplets");
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& e = t[i];
        std::string w = where + "[" + std::to_string(i) + "]";
        if (!e.is_array() || e.size() != 3) throw InputError(w + ": expected [row, col, value]");
        auto r = e[0].get<std::size_t>(), c = e[1].get<std::size_t>();
        if (r >= rows || c >= cols) throw InputError(w + ": entry outside " + std::to_string(rows) + "x" + std::to_string(cols));
        trip.emplace_back(r, c, parse_rational(e[2], w));
    }
    return RatMatrix::from_triplets(rows, cols, std::move(trip));
}

inline json complex_json(const GradedComplex& c) {
    json degs = json::array();
    for (int k = c.lo(); k <= c.hi(); ++k) degs.push_back({{"degree", k}, {"dim", c.dim(k)}, {"d", matrix_json(c.d(k))}});
    return degs;
}

inline GradedComplex parse_complex(const json& degs, const std::string& where) {
    if (!degs.is_array()) throw InputError(where + ": expected a list of degrees");
    if (degs.empty()) return GradedComplex();
    int lo = detail::get<int>(degs[0], "degree", where + "[0]");
    std::vector<std::size_t> dims;
    for (std::size_t i = 0; i < degs.size(); ++i) {
        std::string w = where + "[" + std::to_string(i) + "]";
        if (detail::get<int>(degs[i], "degree", w) != lo + static_cast<int>(i)) throw InputError(w + ": degrees must be consecutive");
        dims.push_back(detail::get<std::size_t>(degs[i], "dim", w));
    }
    std::vector<RatMatrix> d;
    for (std::size_t i = 0; i < degs.size(); ++i) {
        std::size_t next = i + 1 < dims.size() ? dims[i + 1] : 0;
        d.push_back(parse_matrix(degs[i].contains("d") ? degs[i]["d"] : json::array(), next, dims[i],
                                 where + "[" + std::to_string(i) + "].d"));
    }
    try {
        return GradedComplex(lo, std::move(dims), std::move(d), Check::yes);
    } catch (const StructuralError& e) {
        throw InputError(where + ": " + e.what());
    }
}

// Complex dump. Supported form: global generators with support cells and
// the total differential; stalk form: per-cell complexes and cover maps.
inline json sheaf_json(const SheafComplex& k) {
    const CWPoset& x = k.base();
    json j;
    j["domain"] = detail::cell_list(x, k.domain());
    if (k.form() == SheafComplex::Form::supported) {
        j["form"] = "supported";
        j["total"] = complex_json(k.total());
        json gens = json::object();
        for (auto& [deg, list] : k.gens()) {
            json a = json::array();
            for (const auto& g : list) a.push_back({x.name(g.cell), g.origin, g.index});
            gens[std::to_string(deg)] = a;
        }
        j["gens"] = gens;
    } else {
        j["form"] = "stalks";
        json st = json::array(), maps = json::array();
        for (int c = 0; c < x.size(); ++c)
            if (k.in_domain(c)) st.push_back({{"cell", x.name(c)}, {"complex", complex_json(k.stalk(c))}});
        for (int i = 0; i < static_cast<int>(x.covers().size()); ++i) {
            const auto& cv = x.cover(i);
            if (!k.in_domain(cv.face) || !k.in_domain(cv.coface)) continue;
            ChainMap m = k.cover_map(i);
            json blocks = json::array();
            for (auto& [deg, b] : m.blocks())
                if (b.nnz() > 0) blocks.push_back({{"degree", deg}, {"entries", matrix_json(b)}});
            maps.push_back({{"face", x.name(cv.face)}, {"coface", x.name(cv.coface)}, {"blocks", blocks}});
        }
        j["stalks"] = st;
        j["maps"] = maps;
    }
    return j;
}

inline SheafComplex parse_sheaf(const json& j, const CWPtr& x, const std::string& where = "complex") {
    CellSet domain = detail::cell_set(*x, detail::arr(j, "domain", where), where + ".domain");
    auto form = detail::get<std::string>(j, "form", where);
    try {
        if (form == "supported") {
            GradedComplex total = parse_complex(detail::arr(j, "total", where), where + ".total");
            GenList gens;
            if (!j.contains("gens") || !j["gens"].is_object()) throw InputError(where + ": missing 'gens'");
            for (auto& [deg, list] : j["gens"].items()) {
                auto& v = gens[std::stoi(deg)];
                for (std::size_t i = 0; i < list.size(); ++i) {
                    std::string w = where + ".gens." + deg + "[" + std::to_string(i) + "]";
                    const auto& g = list[i];
                    if (!g.is_array() || g.size() != 3) throw InputError(w + ": expected [cell, origin, index]");
                    v.push_back({detail::cell_index(*x, g[0], w), g[1].get<int>(), g[2].get<int>()});
                }
            }
            return SheafComplex::from_supported(x, domain, std::move(total), std::move(gens), Check::yes);
        }
        if (form == "stalks") {
            std::vector<GradedComplex> st(static_cast<std::size_t>(x->size()));
            for (const auto& e : detail::arr(j, "stalks", where)) {
                int c = detail::cell_index(*x, e.at("cell"), where + ".stalks");
                st[static_cast<std::size_t>(c)] = parse_complex(e.at("complex"), where + ".stalks." + x->name(c));
            }
            std::vector<ChainMap> maps(x->covers().size());
            std::map<std::pair<int, int>, const json*> given;
            for (const auto& e : detail::arr(j, "maps", where))
                given[{detail::cell_index(*x, e.at("face"), where + ".maps"), detail::cell_index(*x, e.at("coface"), where + ".maps")}] = &e;
            for (int i = 0; i < static_cast<int>(maps.size()); ++i) {
                const auto& cv = x->cover(i);
                auto& s = st[static_cast<std::size_t>(cv.face)];
                auto& t = st[static_cast<std::size_t>(cv.coface)];
                auto it = given.find({cv.face, cv.coface});
                if (it == given.end()) {
                    maps[static_cast<std::size_t>(i)] = ChainMap::zero(s, t);
                    continue;
                }
                std::map<int, RatMatrix> blocks;
                for (const auto& b : it->second->at("blocks")) {
                    int deg = b.at("degree").get<int>();
                    blocks.emplace(deg, parse_matrix(b.at("entries"), t.dim(deg), s.dim(deg), where + ".maps"));
                }
                maps[static_cast<std::size_t>(i)] = ChainMap(s, t, std::move(blocks), Check::yes);
            }
            return SheafComplex::from_stalks(x, domain, std::move(st), std::move(maps), Check::yes);
        }
    } catch (const StructuralError& e) {
        throw InputError(where + ": " + e.what());
    } catch (const json::exception& e) {
        throw InputError(where + ": " + e.what());
    }
    throw InputError(where + ": unknown form '" + form + "'");
}

// ---------------------------------------------------------------- logs and reports

inline json build_log_json(const BuildResult& b) {
    const CWPoset& x = *b.space->x;
    json stages = json::array();
    for (const auto& s : b.log) {
        json strata = json::array();
        for (const auto& t : s.strata) {
            json e = {{"stratum", t.stratum},
                      {"top_cell", x.name(t.top_cell)},
                      {"G", dims_json(t.g)},
                      {"expected", dims_json(t.expected)},
                      {"contract_ok", t.failures.empty()},
                      {"failures", t.failures}};
            if (t.slice_agrees) e["slice_agrees"] = *t.slice_agrees;
            strata.push_back(e);
        }
        stages.push_back({{"stage", s.stage}, {"codim", s.codim}, {"cutoff", s.cutoff}, {"strata", strata}});
    }
    return json{{"space", b.space->name},
                {"theory", theory_name(b.theory)},
                {"perversity", perversity_json(b.perversity)},
                {"seed", b.seed},
                {"stages", stages},
                {"contract_ok", b.contract_ok()}};
}

inline json betti_json(const BettiTable& t) {
    json j = {{"space", t.space}, {"complex", t.complex}, {"dims", dims_json(t.dims)}, {"euler", t.euler}};
    if (t.compact_agrees) j["compact_agrees"] = *t.compact_agrees;
    return j;
}

inline json axiom_json(const AxiomReport& r) {
    json c = json::object(), d = json::object(), w = json::array();
    for (auto& [k, v] : r.c) c[std::to_string(k)] = v;
    for (auto& [k, v] : r.d) d[std::to_string(k)] = v;
    for (const auto& x : r.witnesses)
        w.push_back({{"condition", x.condition},
                     {"codim", x.codim},
                     {"cell", x.cell_name},
                     {"degree", x.degree},
                     {"stalk_dim", x.stalk_dim},
                     {"target_dim", x.target_dim},
                     {"rank", x.rank},
                     {"detail", x.detail}});
    return json{{"a", r.a}, {"b", r.b}, {"c", c}, {"d", d}, {"passes", r.passes()}, {"witnesses", w}};
}

inline json witt_json(const WittReport& r) {
    return json{{"witt", r.witt}, {"failing_links", r.failing_links}, {"witnesses", r.witnesses}};
}

inline json duality_json(const DualityReport& r) {
    json j = {{"p", perversity_json(r.p)},
              {"q", perversity_json(r.q)},
              {"IS_p", betti_json(r.is_p)},
              {"IS_q", betti_json(r.is_q)},
              {"dual", betti_json(r.dual)},
              {"dual_axioms", axiom_json(r.dual_axioms)},
              {"verdict_axioms", r.verdict_axioms},
              {"verdict_regular", r.verdict_regular},
              {"notes", r.notes},
              {"passes", r.passes()}};
    if (r.verdict_global) j["verdict_global"] = *r.verdict_global;
    return j;
}

inline json selfdual_json(const SelfDualityReport& r) {
    json j = {{"refused", r.refused},
              {"witt", witt_json(r.witt)},
              {"self_complementary", r.self_complementary},
              {"self_dual", r.self_dual},
              {"notes", r.notes},
              {"passes", r.passes()}};
    if (r.refused) j["refusal"] = r.refusal;
    if (r.report) j["report"] = duality_json(*r.report);
    return j;
}

inline json stalks_json(const StratifiedSpace& sp, const SheafComplex& k, bool singular_only) {
    json j = json::object();
    auto tab = stalk_table(k);
    CellSet sing = sp.singular();
    for (int c = 0; c < sp.x->size(); ++c)
        if (!singular_only || sing.test(static_cast<std::size_t>(c))) j[sp.x->name(c)] = dims_json(tab[static_cast<std::size_t>(c)]);
    return j;
}

inline json fan_report_json(const toric::FanReport& r) {
    return json{{"valid", r.valid()}, {"violations", r.violations}, {"notes", r.notes}};
}

inline json orbit_json(const toric::Fan& f, const toric::OrbitStratification& s) {
    json strata = json::array();
    for (std::size_t i = 0; i < s.strata.size(); ++i) {
        int c = s.strata[i];
        strata.push_back({{"cone", f.cones[static_cast<std::size_t>(c)]},
                          {"name", f.cone_name(c)},
                          {"codim", s.codim[i]},
                          {"multiplicity", s.mult[static_cast<std::size_t>(c)].str()}});
    }
    return json{{"mode", toric::mode_name(s.mode)}, {"strata", strata}};
}

inline json local_tables_json(const toric::Fan& f, const toric::OrbitStratification& s, const toric::LocalTables& t) {
    json faces = json::array();
    for (std::size_t i = 0; i < f.cones.size(); ++i) {
        json e = {{"cone", f.cones[i]},
                  {"name", f.cone_name(static_cast<int>(i))},
                  {"stratum", static_cast<bool>(s.is_stratum[i])},
                  {"stalk", dims_json(t.stalk[i])}};
        if (t.punctured[i]) e["punctured_slice"] = dims_json(*t.punctured[i]);
        faces.push_back(e);
    }
    return faces;
}

}  // namespace kis::io
