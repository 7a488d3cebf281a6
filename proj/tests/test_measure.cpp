#include <doctest.h>

#include "cvp/measure.hpp"
#include "cvp/optimize.hpp"
#include "fixtures.hpp"

using namespace cvp;

TEST_SUITE("measure")
{
    TEST_CASE("ell on and off the support")
    {
        const auto s = testing::load("vac.json");
        const PairTable t = self_table(s);
        const RVec l = ell_values(s, t), lk = ell_kappa_values(s, t), ft = frak_t_values(s, t);
        for (int i = 0; i < s.size(); ++i) {
            CHECK(ell(s.point(i).matrix, s) == doctest::Approx(l(i)).epsilon(1e-12));
            CHECK(ell_kappa(s.point(i).matrix, s) == doctest::Approx(lk(i)).epsilon(1e-12));
            CHECK(lk(i) == doctest::Approx(l(i) + s.kappa() * ft(i)).epsilon(1e-12));
        }
    }

    TEST_CASE("critical fixtures satisfy the EL equations")
    {
        const auto s = testing::load("vac.json");
        const auto r = el_residual(s);
        CHECK(std::abs(r.minimum) < 1e-12);
        CHECK(r.total < 1e-6 * action_scale(s));
        // the perturbed partner is not critical
        const auto t = testing::load("vac_tilde.json");
        CHECK(el_residual(t).total > 1e-3 * action_scale(t));
    }

    TEST_CASE("correlations of a system with itself")
    {
        const auto s = testing::load("vac.json");
        const auto c = correlations(s, s);
        const RVec lk = ell_kappa_values(s, self_table(s));
        for (int i = 0; i < s.size(); ++i) {
            CHECK(c.n_values(i) == doctest::Approx(lk(i) + s.s_param).epsilon(1e-12));
            CHECK(c.n_tilde_values(i) == doctest::Approx(c.n_values(i)).epsilon(1e-12));
        }
        const auto e = exhaustion_by_radius(s, s.point(0).matrix);
        const auto cl = asymptotic_closeness(s, s, e, e);
        CHECK(cl.sum == doctest::Approx(cl.sum_tilde));
    }

    TEST_CASE("pushforward keeps weights")
    {
        const auto s = testing::load("vac.json");
        const auto p = pushforward([](const Mat& x) { return x; }, s);
        REQUIRE(p.size() == s.size());
        for (int i = 0; i < s.size(); ++i) {
            CHECK(p.weight(i) == s.weight(i));
            CHECK((p.point(i).matrix - s.point(i).matrix).norm() == 0.0);
        }
    }
}
