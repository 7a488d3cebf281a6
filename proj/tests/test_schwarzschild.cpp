#include <doctest.h>

#include "cvp/schwarzschild.hpp"

#include <cmath>
#include <numbers>

using namespace cvp;
using namespace cvp::schw;
using std::numbers::pi;

TEST_SUITE("schwarzschild")
{
    TEST_CASE("profiles")
    {
        const auto g = Profile::parse("gaussian", 1.5, 2.0);
        CHECK(g(0.3, 0.4) == doctest::Approx(2.0 * std::exp(-0.25 / (2 * 2.25))));
        const double h = 1e-6;
        CHECK(g.d_t(0.3, 0.4) == doctest::Approx((g(0.3 + h, 0.4) - g(0.3 - h, 0.4)) / (2 * h)).epsilon(1e-7));
        CHECK(g.d_rho(0.3, 0.4) == doctest::Approx((g(0.3, 0.4 + h) - g(0.3, 0.4 - h)) / (2 * h)).epsilon(1e-7));
        CHECK(std::isinf(g.support()));
        const auto b = Profile::parse("bump", 2.0);
        CHECK(b.support() == 2.0);
        CHECK(b(1.5, 1.5) == 0.0);
        // time integral against direct quadrature
        for (const char* n : {"gaussian", "exponential", "bump"}) {
            const auto p = Profile::parse(n, 0.8);
            const double q = 0.36;
            double direct = 0.0;
            const int m = 200000;
            const double T = 40.0;
            for (int i = 0; i < m; ++i) {
                const double t = -T + (i + 0.5) * 2 * T / m;
                direct += p(t, std::sqrt(q)) * 2 * T / m;
            }
            CHECK(p.static_value(q) == doctest::Approx(direct).epsilon(1e-6));
        }
        CHECK_THROWS_AS(Profile::parse("lorentzian"), Error);
    }

    TEST_CASE("constant c oracles")
    {
        for (double w : {0.7, 1.0, 1.3}) {
            const double w6 = std::pow(w, 6);
            CHECK(constant_c(Profile::parse("gaussian", w)) == doctest::Approx(3 * pi * w6).epsilon(1e-10));
            CHECK(constant_c(Profile::parse("exponential", w)) == doctest::Approx(45 * pi * w6).epsilon(1e-9));
            CHECK(constant_c(Profile::parse("bump", w)) == doctest::Approx(pi * w6 / 160).epsilon(1e-10));
        }
    }

    TEST_CASE("surface layer mass matches the closed form")
    {
        const auto p = Profile::parse("gaussian");
        const double closed = mass_closed_form(p, 0.4);
        CHECK(closed == doctest::Approx(0.4 * constant_c(p)).epsilon(1e-10));
        for (double R : {10.0, 20.0}) CHECK(mass_MR(R, p, 0.4) == doctest::Approx(closed).epsilon(1e-9));
        const auto b = Profile::parse("bump", 1.0);
        CHECK(mass_MR(8.0, b, 1.0) == doctest::Approx(mass_closed_form(b, 1.0)).epsilon(1e-8));
    }

    TEST_CASE("averaging")
    {
        const auto p = Profile::parse("gaussian");
        const auto r = averaging_check(p, 15.0, 20.0);
        CHECK(r.split_gap < 1e-10 * std::abs(r.lhs));
        CHECK(r.full_gap < 1e-10 * std::abs(r.lhs));
        CHECK(r.gap > 0.0);
        CHECK(averaging_exponent(p, 15.0, {10, 20, 40}) == doctest::Approx(1.0).epsilon(0.02));
    }

    TEST_CASE("line integrals of h")
    {
        MetricPerturbation h;
        h.tensor = Mat4::Identity();
        h.radius = 0.5;
        h.shape = Shape::bump;
        const Vec4 x(0, -2, 0, 0), y(0, 2, 0, 0);
        const auto s = d12p_line_integrals(x, y, h);
        // support strictly between the endpoints: eps = +1 on it for v1, -1 for v2
        CHECK(s.alpha_lo > 0.0);
        CHECK(s.alpha_hi < 1.0);
        CHECK((s.v1 - 0.5 * s.bounded).norm() < 1e-12);
        CHECK((s.v2 + 0.5 * s.bounded).norm() < 1e-12);
        // (1 - r^2)^2 along a diameter: int = 16/15 radius, xi = y - x
        CHECK(s.bounded(1) == doctest::Approx(0.5 * 16.0 / 15.0 * 0.5 / 4.0 * 4.0).epsilon(1e-10));
        // line starting inside the support, off center
        const auto t = d12p_line_integrals(Vec4(0, 0.2, 0, 0), Vec4(0, 2.2, 0, 0), h);
        CHECK(t.alpha_lo < 0.0);
        CHECK(t.v1.norm() > 1e-3);
        // h is static: a timelike line through its support never leaves it
        CHECK_THROWS_AS(d12p_line_integrals(Vec4(0, 0, 0, 0), Vec4(1, 0, 0, 0), h), Error);
    }

    TEST_CASE("J structure and batching")
    {
        const auto p = Profile::parse("gaussian");
        const Vec3 zeta = Vec3(1, 2, 2).normalized();
        const auto far = j_structure(p, 12.0, zeta);
        CHECK(far.off_pattern < 1e-10 * far.norm);
        // far from the boundary J^0_0 = int_0^inf beta^2 L_s(beta^2) = pi for the unit Gaussian
        CHECK(far.c == doctest::Approx(pi).epsilon(1e-8));
        CHECK(far.J.trace() == doctest::Approx(4 * far.c).epsilon(1e-8));
        // near the boundary the pattern is not attained
        CHECK(j_structure(p, 0.7, zeta).off_pattern > 1e-3 * far.norm);

        const std::vector<double> r0{0.5, 3.0, 1.2, 3.0, 9.0};
        const auto batch = j_scalars_batch(p, r0);
        REQUIRE(batch.size() == r0.size());
        for (std::size_t k = 0; k < r0.size(); ++k) {
            const auto one = j_scalars(p, r0[k]);
            CHECK(batch[k].tt == doctest::Approx(one.tt).epsilon(1e-9));
            CHECK(batch[k].trho == doctest::Approx(one.trho).epsilon(1e-9));
            CHECK(batch[k].rhot == doctest::Approx(one.rhot).epsilon(1e-9));
            CHECK(batch[k].rhorho == doctest::Approx(one.rhorho).epsilon(1e-9));
        }
    }

    TEST_CASE("trace-free perturbations do not contribute")
    {
        const auto p = Profile::parse("gaussian");
        MetricPerturbation h;
        h.radius = 2.0;
        h.tensor = Vec4(3, -1, -1, -1).asDiagonal();
        REQUIRE(h.symmetric());
        const auto r = tracefree_vanishing(h, p, 12.0);
        h.tensor = Mat4::Identity();
        const auto c = tracefree_vanishing(h, p, 12.0);
        CHECK(std::abs(c.integral) > 1.0);
        CHECK(std::abs(r.integral) < 1e-10 * std::abs(c.integral));
        h.center = Vec3(11.5, 0, 0);
        CHECK_THROWS_AS(tracefree_vanishing(h, p, 12.0), Error);
    }
}
