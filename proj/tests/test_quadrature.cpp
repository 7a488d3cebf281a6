#include <doctest.h>

#include "cvp/quadrature.hpp"

#include <cmath>
#include <numbers>

using namespace cvp;
using std::numbers::pi;

TEST_SUITE("quadrature")
{
    TEST_CASE("finite interval")
    {
        auto r = quad::integrate([](double x) { return std::sin(x); }, 0.0, pi);
        CHECK(r.converged);
        CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
        // kink in the middle forces subdivision
        r = quad::integrate([](double x) { return std::abs(x - 0.3); }, 0.0, 1.0, {1e-12, 0.0, 2000});
        CHECK(r.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-12));
        CHECK(quad::integrate([](double) { return 1.0; }, 2.0, 2.0).value == 0.0);
    }

    TEST_CASE("half line and real line")
    {
        auto r = quad::integrate_to_infinity([](double x) { return std::exp(-x); }, 1.0);
        CHECK(r.value == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
        r = quad::integrate_to_infinity([](double x) { return 1.0 / (1.0 + x * x); }, 0.0);
        CHECK(r.value == doctest::Approx(pi / 2).epsilon(1e-10));
        r = quad::integrate_real_line([](double x) { return std::exp(-x * x); }, {1e-12, 0.0, 2000});
        CHECK(r.value == doctest::Approx(std::sqrt(pi)).epsilon(1e-11));
    }

    TEST_CASE("gauss legendre exactness")
    {
        for (int m : {3, 5, 12}) {
            quad::GaussLegendre g(m);
            REQUIRE(g.x.size() == static_cast<std::size_t>(m));
            double w = 0.0, p = 0.0;
            for (int i = 0; i < m; ++i) {
                w += g.w[i];
                p += g.w[i] * std::pow(g.x[i], 2 * m - 2);
            }
            CHECK(w == doctest::Approx(2.0).epsilon(1e-14));
            CHECK(p == doctest::Approx(2.0 / (2 * m - 1)).epsilon(1e-13));
        }
    }
}
