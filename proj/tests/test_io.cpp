#include "kis/io.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

using namespace kis;
namespace fs = std::filesystem;

namespace {

fs::path data() { return fs::path(KIS_DATA_DIR); }

fs::path scratch_dir(const std::string& name) {
    auto p = fs::temp_directory_path() / ("kis_test_io_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

void same_shape(const StratifiedSpace& a, const StratifiedSpace& b) {
    REQUIRE(a.x->size() == b.x->size());
    CHECK(a.dim == b.dim);
    CHECK(a.x->covers().size() == b.x->covers().size());
    for (int c = 0; c < a.x->size(); ++c) CHECK(a.x->dim(c) == b.x->dim(c));
    REQUIRE(a.strata.size() == b.strata.size());
    for (std::size_t i = 0; i < a.strata.size(); ++i) {
        CHECK(a.strata[i].codim == b.strata[i].codim);
        CHECK(a.strata[i].cells.count() == b.strata[i].cells.count());
        CHECK(a.strata[i].tube.count() == b.strata[i].tube.count());
    }
}

}  // namespace

TEST_CASE("shipped spaces match the built-in constructions", "[io][corpus]") {
    for (const auto& e : corpus::entries()) {
        INFO(e.name);
        auto file = io::load_space(data() / (e.name + ".json"));
        auto built = e.make();
        CHECK(file->name == e.name);
        same_shape(*file, *built);
        CHECK(validate_stratification(*file).valid());
        auto p = file->dim >= 2 ? gm_perversity('m', file->dim) : Perversity{};
        CHECK(cohomology_dims(build_IS(file, p).complex.total()) == cohomology_dims(build_IS(built, p).complex.total()));
    }
}

TEST_CASE("space JSON round-trips", "[io]") {
    for (const char* n : {"s2_poles", "sigma_t2", "sigma_t2_x_s1", "sigma_sigma_t2"}) {
        INFO(n);
        auto sp = corpus::by_name(n);
        auto back = io::parse_space(io::space_json(*sp));
        same_shape(*sp, *back);
        CHECK(back->name == sp->name);
        for (std::size_t i = 0; i < sp->strata.size(); ++i) {
            CHECK(back->strata[i].cells == sp->strata[i].cells);
            CHECK(back->strata[i].link->name == sp->strata[i].link->name);
        }
        CHECK(io::space_json(*back) == io::space_json(*sp));
    }
}

TEST_CASE("shipped fans match the named fans", "[io][toric]") {
    for (const auto& n : toric::fan_names()) {
        auto f = io::load_fan(data() / "fans" / (n + ".json"));
        auto g = toric::by_name(n);
        CHECK(f.rank == g.rank);
        CHECK(f.rays == g.rays);
        CHECK(f.cones == g.cones);
        CHECK(io::parse_fan(io::fan_json(g)).cones == g.cones);
    }
}

TEST_CASE("complex and sheaf JSON round-trip", "[io]") {
    auto sp = corpus::sigma_t2();
    auto m = gm_perversity('m', 3);
    auto k = build_IS(sp, m).complex;
    auto back = io::parse_sheaf(io::sheaf_json(k), sp->x);
    CHECK(back.form() == k.form());
    CHECK(cohomology_dims(back.total()) == cohomology_dims(k.total()));
    for (int c = 0; c < sp->x->size(); ++c) CHECK(cohomology_dims(back.stalk(c)) == cohomology_dims(k.stalk(c)));
    CHECK(check_AXS1(back, *sp, m).passes());

    auto c = constant_sheaf(sp->x);
    auto cb = io::parse_sheaf(io::sheaf_json(c), sp->x);
    CHECK(cohomology_dims(sections(cb)) == cohomology_dims(sections(c)));

    auto g = k.total();
    auto gb = io::parse_complex(io::complex_json(g), "total");
    CHECK(cohomology_dims(gb) == cohomology_dims(g));
}

TEST_CASE("perversity parsing", "[io]") {
    CHECK(io::parse_perversity("m", 4) == gm_perversity('m', 4));
    CHECK(io::parse_perversity("t", 6) == gm_perversity('t', 6));
    auto p = io::parse_perversity("2:0,3:1", 3);
    CHECK(p.at(3) == 1);
    CHECK(p.gm);
    CHECK_FALSE(io::parse_perversity("2:1", 2).gm);
    CHECK(io::parse_perversity("n", 1).values.empty());
    CHECK_THROWS_AS(io::parse_perversity("q", 4), io::InputError);
    CHECK_THROWS_AS(io::parse_perversity("2:x", 4), io::InputError);
}

TEST_CASE("graded dimensions in JSON", "[io]") {
    CHECK(io::dims_json(GradedDims::from_vector(0, {1, 0, 2})) == nlohmann::json::array({1, 0, 2}));
    auto neg = io::dims_json(GradedDims::from_vector(-2, {1, 0, 1}));
    CHECK(neg["lo"] == -2);
    CHECK(neg["dims"] == nlohmann::json::array({1, 0, 1}));
}

TEST_CASE("recipes", "[io]") {
    auto dir = scratch_dir("recipes");
    io::write_json(dir / "t2.json", io::space_json(*corpus::t2()));
    io::write_json(dir / "st.json", {{"op", "suspension"}, {"of", "t2.json"}});
    io::write_json(dir / "stx.json", {{"op", "product"}, {"of", "st.json"}, {"with", "s1"}, {"name", "stx"}});
    auto st = io::load_space(dir / "st.json");
    same_shape(*st, *corpus::sigma_t2());
    auto stx = io::load_space(dir / "stx.json");
    CHECK(stx->name == "stx");
    same_shape(*stx, *corpus::sigma_t2_x_s1());
    nlohmann::json nested = {{"op", "suspension"}, {"of", {{"op", "suspension"}, {"of", "t2"}}}};
    same_shape(*io::apply_recipe(nested, dir), *corpus::sigma_sigma_t2());
    CHECK_THROWS_AS(io::apply_recipe({{"op", "join"}, {"of", "t2"}}, dir), io::InputError);
    CHECK_THROWS_AS(io::apply_recipe({{"op", "cone"}}, dir), io::InputError);
    CHECK_THROWS_AS(io::apply_recipe({{"op", "cone"}, {"of", "klein_bottle"}}, dir), io::InputError);
    fs::remove_all(dir);
}

TEST_CASE("malformed input is an input error", "[io]") {
    auto dir = scratch_dir("bad");
    CHECK_THROWS_AS(io::read_json(dir / "absent.json"), io::InputError);
    {
        std::ofstream(dir / "broken.json") << "{\"cells\": [";
    }
    CHECK_THROWS_AS(io::load_space(dir / "broken.json"), io::InputError);
    CHECK_THROWS_AS(io::parse_space(nlohmann::json::object()), io::InputError);
    CHECK_THROWS_AS(io::parse_fan(nlohmann::json{{"rank", 2}}), io::InputError);
    auto j = io::space_json(*corpus::s2_poles());
    j["covers"][0]["face"] = "no_such_cell";
    CHECK_THROWS_AS(io::parse_space(j), io::InputError);
    fs::remove_all(dir);
}
