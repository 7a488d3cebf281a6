#include <doctest.h>

#include "cvp/build.hpp"
#include "cvp/numeric.hpp"
#include "cvp/static.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>

using namespace cvp;

namespace {

KernelSpec spec_n(int n, double c)
{
    KernelSpec s;
    s.spin_dimension = n;
    s.trace_constant = c;
    return s;
}

} // namespace

TEST_SUITE("static")
{
    TEST_CASE("orbit points")
    {
        std::mt19937_64 rng(1);
        auto s = spec_n(1, 1.0);
        auto g = StaticGroup::from_generator(integer_generator(4, rng));
        auto x = validate_point(random_point_matrix(4, 1, 1.0, rng), s);
        CHECK((orbit_point(x, 0.0, g, s).matrix - x.matrix).norm() < 1e-14);

        auto gd = StaticGroup::from_generator(integer_generator(4, rng, false));
        RVec d(4);
        d << 0.8, -0.3, 0.5, 0.0;
        auto xd = make_point(d.cast<cplx>().asDiagonal(), 1);
        CHECK((orbit_point(xd, 1.7, gd, s).matrix - xd.matrix).norm() < 1e-14);

        for (int k = 0; k < 10; ++k) {
            double t = uniform(rng, -5.0, 5.0);
            auto y = orbit_point(x, t, g, s);
            Eigen::SelfAdjointEigenSolver<Mat> es(y.matrix);
            CHECK((es.eigenvalues() - x.spectrum).norm() < 1e-10);
        }
    }

    TEST_CASE("period detection")
    {
        std::mt19937_64 rng(2);
        auto g = StaticGroup::from_generator(integer_generator(5, rng));
        CHECK(g.period == doctest::Approx(2.0 * M_PI));
        RVec w(3);
        w << 0.0, 0.5, 1.5;
        auto g2 = StaticGroup::from_generator(w.cast<cplx>().asDiagonal());
        CHECK(g2.period == doctest::Approx(4.0 * M_PI));
        w << 0.0, 1.0, std::sqrt(2.0);
        CHECK(StaticGroup::from_generator(w.cast<cplx>().asDiagonal()).period == 0.0);
        CHECK(StaticGroup::from_generator(Mat::Identity(3, 3) * 2.0).central);
    }

    TEST_CASE("orthogonal ranges give a zero integrand")
    {
        RVec w(4);
        w << 0.0, 1.0, 2.0, 3.0;
        Model m{spec_n(1, 0.5), StaticGroup::from_generator(w.cast<cplx>().asDiagonal()), {}};
        Mat a = Mat::Zero(4, 4), b = Mat::Zero(4, 4);
        a(0, 0) = 1.0;
        a(1, 1) = -0.5;
        a(0, 1) = a(1, 0) = 0.3;
        b(2, 2) = 0.9;
        b(3, 3) = -0.4;
        b(2, 3) = b(3, 2) = cplx(0.0, 0.2);
        auto v = static_pair(make_point(a, 1), make_point(b, 1), m);
        CHECK(v.lagrangian == 0.0);
        CHECK(v.boundedness == 0.0);
    }

    TEST_CASE("central generator is rejected")
    {
        std::mt19937_64 rng(3);
        auto s = spec_n(1, 1.0);
        auto g = StaticGroup::from_generator(Mat::Identity(4, 4) * 0.7);
        auto x = validate_point(random_point_matrix(4, 1, 1.0, rng), s);
        CHECK_THROWS_AS(static_lagrangian(x, x, g, {}, s), Error);
        CHECK_THROWS_AS(static_boundedness(x, x, g, {}, s), Error);
    }

    TEST_CASE("symmetry, resolution and additivity")
    {
        std::mt19937_64 rng(4);
        for (int n : {1, 2}) {
            const int f = 2 * n + 2;
            auto s = spec_n(n, 1.0);
            auto g = StaticGroup::from_generator(integer_generator(f, rng));
            QuadratureSpec q, q2;
            q2.node_count = 2 * q.node_count;
            for (int trial = 0; trial < 5; ++trial) {
                auto x = validate_point(random_point_matrix(f, n, 1.0, rng), s);
                auto y = validate_point(random_point_matrix(f, n, 1.0, rng), s);
                Model m{s, g, q}, m2{s, g, q2};
                auto xy = static_pair(x, y, m), yx = static_pair(y, x, m);
                auto ref = static_pair(x, y, m2);
                const double tol = xy.error + yx.error + ref.error + 1e-12 * (1.0 + xy.lagrangian);
                CHECK(std::abs(xy.lagrangian - yx.lagrangian) <= tol);
                CHECK(std::abs(xy.boundedness - yx.boundedness) <= tol * (1.0 + xy.boundedness));
                CHECK(std::abs(xy.lagrangian - ref.lagrangian) <= xy.error + ref.error + 1e-13 * (1.0 + xy.lagrangian));
                const double k = 0.37;
                CHECK(std::abs(static_kappa_lagrangian(x, y, g, q, s, k) -
                               (static_lagrangian(x, y, g, q, s) + k * static_boundedness(x, y, g, q, s))) <=
                      1e-12 * (1.0 + xy.kappa(k)));
                CHECK(static_kappa_lagrangian(x, y, g, q, s, 0.0) == static_lagrangian(x, y, g, q, s));
            }
        }
    }

    TEST_CASE("conjugation invariance")
    {
        std::mt19937_64 rng(5);
        auto s = spec_n(1, 1.0);
        auto g = StaticGroup::from_generator(integer_generator(4, rng));
        Model m{s, g, {}};
        for (int trial = 0; trial < 5; ++trial) {
            auto x = validate_point(random_point_matrix(4, 1, 1.0, rng), s);
            auto y = validate_point(random_point_matrix(4, 1, 1.0, rng), s);
            const double t = uniform(rng, -3.0, 3.0);
            auto a = static_pair(x, y, m);
            auto b = static_pair(orbit_point(x, t, g, s), orbit_point(y, t, g, s), m);
            CHECK(std::abs(a.kappa(0.2) - b.kappa(0.2)) <= a.error + b.error + 1e-12 * (1.0 + a.kappa(0.2)));
        }
    }

    TEST_CASE("analytic gradient matches finite differences")
    {
        std::mt19937_64 rng(6);
        for (int n : {1, 2}) {
            const int f = 2 * n + 2;
            auto s = spec_n(n, 1.0);
            auto g = StaticGroup::from_generator(integer_generator(f, rng));
            Model m{s, g, {}};
            auto x = validate_point(random_point_matrix(f, n, 1.0, rng), s);
            auto y = validate_point(random_point_matrix(f, n, 1.0, rng), s);
            auto yf = orbit_frame(y, g);
            auto gr = static_pair_gradient(rotate_in(x.matrix, g), yf, m);
            for (int k = 0; k < 4; ++k) {
                Mat u = random_hermitian(f, rng);
                const double h = 1e-5;
                auto p = static_pair_rotated(rotate_in(x.matrix + h * u, g), yf, m);
                auto q = static_pair_rotated(rotate_in(x.matrix - h * u, g), yf, m);
                const double fd_l = (p.lagrangian - q.lagrangian) / (2 * h);
                const double fd_t = (p.boundedness - q.boundedness) / (2 * h);
                CHECK(std::abs(fd_l - frob_dot(gr.d_lagrangian, u)) < 1e-6 * (1.0 + std::abs(fd_l)));
                CHECK(std::abs(fd_t - frob_dot(gr.d_boundedness, u)) < 1e-6 * (1.0 + std::abs(fd_t)));
            }
        }
    }

    TEST_CASE("aperiodic orbits use the tail monitor")
    {
        // Coherent wave packets over many incommensurate modes dephase, so the
        // orbit integrand decays on the window.
        const int f = 48;
        std::mt19937_64 rng(7);
        RVec w(f);
        CVec u0(f), u1(f);
        for (int k = 0; k < f; ++k) {
            w(k) = 0.25 * (k - f / 2) + 0.013 * std::sqrt(2.0) * k * k / f;
            u0(k) = std::exp(-0.5 * std::pow((k - f / 2) / 6.0, 2));
            u1(k) = u0(k) * ((k - f / 2) / 6.0);
        }
        auto g = StaticGroup::from_generator(w.cast<cplx>().asDiagonal());
        REQUIRE(g.period == 0.0);
        Mat vx(f, 2), vy(f, 2);
        vx.col(0) = u0.normalized();
        vx.col(1) = u1.normalized();
        vy.col(0) = (u0 + 0.5 * u1).normalized();
        vy.col(1) = (u1 - 0.5 * u0).normalized();
        RVec lam(2);
        lam << 1.2, -0.4;
        Mat a = vx * lam.cast<cplx>().asDiagonal() * vx.adjoint();
        Mat b = vy * lam.cast<cplx>().asDiagonal() * vy.adjoint();
        auto s = spec_n(1, 0.0);
        s.trace_constraint = false;
        QuadratureSpec q;
        q.half_width = 6.0;
        q.node_count = 48;
        q.tail_tolerance = 1e-6;
        Model m{s, g, q};
        StaticValue v;
        CHECK_NOTHROW(v = static_pair(make_point(a, 1), make_point(b, 1), m));
        CHECK(v.lagrangian > 0.0);

        // three modes with incommensurate frequencies never dephase
        RVec w3(4);
        w3 << 0.0, 1.0, std::sqrt(2.0), std::sqrt(5.0);
        Model m3{spec_n(1, 1.0), StaticGroup::from_generator(w3.cast<cplx>().asDiagonal()), q};
        auto x = validate_point(random_point_matrix(4, 1, 1.0, rng), m3.kernel);
        CHECK_THROWS_AS(static_pair(x, x, m3), Error);
    }

    TEST_CASE("pair evaluation cost")
    {
        std::mt19937_64 rng(8);
        auto s = spec_n(1, 1.0);
        auto g = StaticGroup::from_generator(integer_generator(4, rng));
        Model m{s, g, {}};
        auto x = validate_point(random_point_matrix(4, 1, 1.0, rng), s);
        auto y = validate_point(random_point_matrix(4, 1, 1.0, rng), s);
        auto t0 = std::chrono::steady_clock::now();
        double acc = 0.0;
        for (int k = 0; k < 200; ++k) acc += static_pair(x, y, m).lagrangian;
        double us = std::chrono::duration<double, std::micro>(std::chrono::steady_clock::now() - t0).count() / 200;
        MESSAGE("static pair evaluation: " << us << " us");
        CHECK(acc > 0.0);
    }
}
