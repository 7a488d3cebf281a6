#include <doctest.h>

#include "cvp/build.hpp"
#include "cvp/lingrav.hpp"
#include "cvp/numeric.hpp"
#include "fixtures.hpp"

#include <random>

using namespace cvp;

TEST_SUITE("lingrav")
{
    TEST_CASE("compatible ell at infinity is the weighted mean")
    {
        const auto s = testing::load("vac.json");
        const RVec l = ell_values(s, self_table(s));
        double m = 0.0;
        for (int i = 0; i < s.size(); ++i) m += s.weight(i) * l(i);
        m /= s.measure.volume();
        CHECK(compatible_ell_infinity(s) == doctest::Approx(m).epsilon(1e-12));
        CHECK(std::abs(mass_identity(s, 1.0, m)) < 1e-14);
        CHECK(mass_identity(s, 2.0, l.minCoeff()) == doctest::Approx(2.0 * mass_identity(s, 1.0, l.minCoeff())));
        CHECK(local_energy_check(s, l.minCoeff()).holds);
        CHECK_FALSE(local_energy_check(s, l.maxCoeff() + 1.0).holds);
    }

    TEST_CASE("solve and surface layer identity")
    {
        const auto s = testing::load("vac.json");
        const double li = compatible_ell_infinity(s);
        const auto sol = solve_lingrav(s, li);
        CHECK(sol.relative < 1e-6);
        CHECK(sol.rank > 0);
        const auto r = prposinhom_check(s, sol.v, exhaustion_by_radius(s, s.point(0).matrix), li);
        CHECK(r.within_bound);
        // ell_inf off the compatible value leaves a residual
        CHECK(solve_lingrav(s, li + 0.05).relative > 1e3 * sol.relative);
    }

    TEST_CASE("kappa family is second order")
    {
        const auto s = testing::load("vac.json");
        std::mt19937_64 rng(5);
        const int f = s.model.group.dim();
        const Mat b1 = random_hermitian(f, rng), b2 = random_hermitian(f, rng);
        auto family = [&](const Mat& b) {
            return sample_family(s, [&](double t, const Mat& x) {
                return retract(x + t * 0.1 * (b * x + x * b) + t * t * 0.05 * b * x * b, s.model.kernel).matrix;
            });
        };
        const auto r = kappa_family_consistency(s, family(b2), s, family(b1), 1.0,
                                                exhaustion_by_radius(s, s.point(0).matrix));
        CHECK(r.order >= 1.8);
        CHECK(r.ratio == doctest::Approx(1.0).epsilon(1e-2));
    }
}
