#include <doctest.h>

#include "cvp/optimize.hpp"
#include "fixtures.hpp"

#include <cmath>

using namespace cvp;

TEST_SUITE("optimize")
{
    TEST_CASE("random systems are feasible")
    {
        SystemSpec sp;
        sp.points = 6;
        sp.volume = 2.5;
        sp.trace = 1.5;
        const auto s = random_system(sp);
        CHECK(s.size() == 6);
        CHECK(s.measure.volume() == doctest::Approx(2.5).epsilon(1e-14));
        for (int i = 0; i < s.size(); ++i) CHECK(s.point(i).matrix.trace().real() == doctest::Approx(1.5).epsilon(1e-12));
        CHECK_FALSE(s.model.group.central);
        const auto c = calibrate_s(s);
        CHECK(std::abs(ell_kappa_values(c, self_table(c)).minCoeff()) < 1e-14);
    }

    TEST_CASE("rescaling")
    {
        const auto s = testing::load("vac.json");
        const auto r = rescale(s, 2.0, 0.5);
        CHECK(r.trace_constant == doctest::Approx(2.0 * s.model.kernel.trace_constant));
        CHECK(r.s_param == doctest::Approx(0.5 * 16.0 * s.s_param));
        CHECK(r.system.measure.volume() == doctest::Approx(0.5 * s.measure.volume()));
        CHECK(action(r.system) == doctest::Approx(0.25 * 16.0 * action(s)).epsilon(1e-10));
    }

    TEST_CASE("descent is monotone and keeps the constraints")
    {
        SystemSpec sp;
        sp.points = 6;
        sp.seed = 4;
        OptimizeOptions o;
        o.iterations = 300;
        OptimizeReport r;
        const auto s = minimize(random_system(sp), o, &r);
        CHECK(r.monotone);
        CHECK(r.action_final <= r.action_initial);
        CHECK(r.volume_drift < 1e-12);
        CHECK(r.trace_drift < 1e-12);
        CHECK(action(s) == doctest::Approx(r.action_final).epsilon(1e-12));
        OptimizeReport r2;
        const auto s2 = minimize(random_system(sp), o, &r2);
        CHECK(r2.history == r.history);
        CHECK(s2.measure.weights == s.measure.weights);
    }

    TEST_CASE("frozen points keep their position")
    {
        const auto b = testing::load("body.json");
        OptimizeOptions o;
        o.iterations = 50;
        o.frozen = {0};
        const auto s = minimize(b, o);
        CHECK((s.point(0).matrix - b.point(0).matrix).norm() == 0.0);
    }
}
