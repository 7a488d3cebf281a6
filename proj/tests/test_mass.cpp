#include <doctest.h>

#include "cvp/jets.hpp"
#include "cvp/mass.hpp"
#include "cvp/numeric.hpp"
#include "fixtures.hpp"

#include <random>

using namespace cvp;

namespace {

double scale(const StaticSystem& st, const StaticSystem& s)
{
    return s.s_param * s.measure.volume() + std::abs(spatial_integral_form(st, s));
}

} // namespace

TEST_SUITE("mass")
{
    TEST_CASE("identical systems have zero mass")
    {
        const auto s = testing::load("vac.json");
        const auto e = exhaustion_by_radius(s, s.point(0).matrix);
        CHECK(std::abs(spatial_integral_form(s, s)) < 1e-15);
        CHECK(std::abs(total_mass_general(s, s, e, e).value) < 1e-15);
        CHECK(std::abs(total_mass_matched(s, s, e, e).value) < 1e-15);
    }

    TEST_CASE("general, matched and spatial forms agree")
    {
        const auto s = testing::load("vac.json"), st = testing::load("vac_tilde.json");
        const PairTable cross = cross_table(st, s);
        const double spatial = spatial_integral_form(st, s, cross), tol = 1e-10 * scale(st, s);
        for (int c : {0, s.size() - 1}) {
            const auto e = exhaustion_by_radius(s, s.point(c).matrix);
            const auto et = exhaustion_by_radius(st, s.point(c).matrix);
            CHECK(std::abs(total_mass_general(st, s, e, et, cross).value - spatial) < tol);
            CHECK(std::abs(total_mass_matched(st, s, e, et, cross).value - spatial) < tol);
            CHECK(cut_identity(st, s, e, et, cross).max_gap < tol);
        }
    }

    TEST_CASE("surface layer integral limits")
    {
        const auto s = testing::load("vac.json"), st = testing::load("vac_tilde.json");
        const PairTable cross = cross_table(st, s);
        const RVec none_t = RVec::Zero(st.size()), none = RVec::Zero(s.size());
        const RVec all_t = RVec::Ones(st.size()), all = RVec::Ones(s.size());
        CHECK(nonlinear_sli(st, s, none_t, none, cross) == 0.0);
        CHECK(nonlinear_sli(st, s, all_t, all, cross) == 0.0);
        CHECK(volume_of(s, all) == doctest::Approx(s.measure.volume()));
    }

    TEST_CASE("excision identity")
    {
        const auto s = testing::load("vac.json"), st = testing::load("vac_tilde.json");
        for (const auto& [in_t, in] : std::vector<std::pair<std::vector<int>, std::vector<int>>>{
                 {{0}, {0}}, {{1, 4}, {2}}, {{}, {1, 3}}}) {
            const auto r = excision_identity(st, s, in_t, in);
            CHECK(r.gap < 1e-12 * (scale(st, s) + std::abs(r.correction)));
        }
    }

    TEST_CASE("unitary invariance")
    {
        const auto s = testing::load("vac.json"), st = testing::load("vac_tilde.json");
        std::mt19937_64 rng(3);
        Mat a = Mat::Zero(s.model.group.dim(), s.model.group.dim());
        for (const auto& b : commutant_basis(s.model.group)) a += normal(rng) * b;
        const auto r = unitary_invariance_check(st, s, unitary_from(a, 0.8));
        CHECK(r.static_w);
        CHECK(r.commutator < 1e-12);
        CHECK(r.gap < 1e-12 * scale(st, s));
        CHECK(r.table_change > 1e-3);
        const auto g = unitary_invariance_check(st, s, random_unitary(s.model.group.dim(), rng));
        CHECK_FALSE(g.static_w);
    }

    TEST_CASE("incompatible systems are rejected")
    {
        const auto s = testing::load("vac.json"), b = testing::load("body.json");
        CHECK_THROWS_AS(cross_table(b, s), Error);
    }
}
