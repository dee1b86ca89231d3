#include "kis/corpus.hpp"
#include "kis/duality.hpp"
#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace kis;

namespace {

GradedDims mirror(const GradedDims& g, int d) {
    GradedDims out;
    for (auto& [k, n] : g.entries()) out.set(d - k, n);
    return out;
}

}  // namespace

TEST_CASE("Verdier dual of the constant sheaf on a closed manifold", "[duality]") {
    for (const char* n : {"s2", "t2", "s1xs2"}) {
        auto sp = corpus::by_name(n);
        auto k = constant_sheaf(sp->x);
        auto dual = shift_sheaf(verdier_dual(k), -sp->dim);
        GradedDims q;
        q.set(0, 1);
        for (int c = 0; c < sp->x->size(); ++c) CHECK(cohomology_dims(dual.stalk(c)) == q);
        CHECK(cohomology_dims(sections(dual)) == cohomology_dims(sections(k)));
    }
}

TEST_CASE("biduality on stalks", "[duality]") {
    auto sp = corpus::sigma_t2();
    auto k = build_IS(sp, gm_perversity('m', 3)).complex;
    auto dd = verdier_dual(verdier_dual(k));
    for (int c = 0; c < sp->x->size(); ++c) CHECK(cohomology_dims(dd.stalk(c)) == cohomology_dims(k.stalk(c)));
}

TEST_CASE("dual of IS_p satisfies the axioms for the complement", "[duality]") {
    for (const char* n : {"sigma_t2", "sigma_s1xs2", "sigma_t2_x_s1", "sigma_sigma_t2"}) {
        auto sp = corpus::by_name(n);
        for (const auto& p : gm_perversities(sp->dim)) {
            INFO(n << " " << p.name);
            auto r = duality_report(sp, p);
            CHECK(r.q == complement(p));
            CHECK(r.verdict_axioms);
            CHECK(r.verdict_regular);
            REQUIRE(r.verdict_global.has_value());
            CHECK(*r.verdict_global);
            CHECK(r.passes());
            CHECK(r.dual.dims == r.is_q.dims);
            CHECK(mirror(r.is_p.dims, sp->dim) == r.is_q.dims);
        }
    }
}

TEST_CASE("mirror check on the suspended torus", "[duality]") {
    auto r = duality_report(corpus::sigma_t2(), gm_perversity('m', 3));
    CHECK(r.is_p.dims == GradedDims::from_vector(0, {0, 1, 3}));
    CHECK(r.is_q.dims == GradedDims::from_vector(0, {0, 3, 1}));
    CHECK(dims_mirror(r.is_p.dims, r.is_q.dims, 3));
    CHECK_FALSE(dims_mirror(r.is_p.dims, r.is_p.dims, 3));
}

TEST_CASE("Witt condition", "[duality][witt]") {
    auto w = witt_check(*corpus::sigma_t2());
    CHECK_FALSE(w.witt);
    REQUIRE(w.witnesses.size() == 2);
    CHECK(w.witnesses[0] == "stratum 0: link t2 has IH^1 of dimension 2");
    CHECK(witt_check(*corpus::sigma_s1xs2()).witt);
    CHECK(witt_check(*corpus::sigma_rp3()).witt);
    CHECK_FALSE(witt_check(*corpus::sigma_sigma_t2()).witt);
    CHECK_FALSE(witt_check(*corpus::sigma_t2_x_s1()).witt);
    CHECK(witt_check(*corpus::s2_poles()).witt);
    CHECK(witt_check(*corpus::t2()).witt);
}

TEST_CASE("self-duality", "[duality][witt]") {
    auto refused = self_duality_check(corpus::sigma_t2());
    CHECK(refused.refused);
    CHECK_FALSE(refused.passes());
    CHECK(refused.refusal.find("IH^1 of dimension 2") != std::string::npos);

    auto ok = self_duality_check(corpus::sigma_s1xs2());
    CHECK_FALSE(ok.refused);
    CHECK(ok.self_complementary);
    CHECK(ok.self_dual);
    CHECK(ok.passes());
    REQUIRE(ok.report);
    CHECK(ok.report->is_p.dims == GradedDims::from_vector(0, {0, 1, 2, 1}));

    // m and n differ in codimension 3, the only codimension of sigma_rp3 is 4
    auto rp = self_duality_check(corpus::sigma_rp3());
    CHECK(rp.passes());
    CHECK(rp.self_complementary);
}

TEST_CASE("tables do not depend on the splitting seed", "[duality][seeds]") {
    auto a = uniqueness_probe(corpus::sigma_t2(), gm_perversity('m', 3), {0, 1, 7, 42, 1234567});
    CHECK(a.agree);
    CHECK(a.difference.empty());
    for (const auto& g : a.global) CHECK(g == a.global.front());
    auto b = uniqueness_probe(corpus::sigma_sigma_t2(), gm_perversity('n', 4), {3, 99, 2024}, Theory::IC);
    CHECK(b.agree);
    CHECK_THROWS_AS(uniqueness_probe(corpus::sigma_t2(), gm_perversity('m', 3), {1}), StructuralError);
}

TEST_CASE("stalk table of the constant sheaf", "[duality]") {
    auto sp = corpus::s2();
    for (const auto& g : stalk_table(constant_sheaf(sp->x))) CHECK(g == GradedDims::from_vector(0, {1}));
}
