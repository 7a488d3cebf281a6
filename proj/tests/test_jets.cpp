#include <doctest.h>

#include "cvp/build.hpp"
#include "cvp/jets.hpp"
#include "cvp/numeric.hpp"
#include "fixtures.hpp"

#include <random>

using namespace cvp;

TEST_SUITE("jets")
{
    TEST_CASE("tangent basis")
    {
        const auto s = testing::load("vac.json");
        const auto& x = s.point(1);
        const auto basis = tangent_basis(x, s.model.kernel);
        REQUIRE(!basis.empty());
        for (std::size_t a = 0; a < basis.size(); ++a) {
            CHECK((basis[a] - basis[a].adjoint()).norm() < 1e-13);
            CHECK(std::abs(basis[a].trace()) < 1e-12);
            for (std::size_t b = 0; b < basis.size(); ++b) {
                const double ip = (basis[a].adjoint() * basis[b]).trace().real();
                CHECK(ip == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12));
            }
            CHECK((project_tangent(x, basis[a], s.model.kernel) - basis[a]).norm() < 1e-12);
        }
        // moving along a tangent direction stays on F to second order
        std::mt19937_64 rng(2);
        const Mat u = project_tangent(x, random_hermitian(x.dim(), rng), s.model.kernel);
        const Mat y = x.matrix + 1e-4 * u;
        CHECK((retract(y, s.model.kernel).matrix - y).norm() < 1e-6);
    }

    TEST_CASE("directional derivative")
    {
        std::mt19937_64 rng(4);
        const Mat x = random_hermitian(4, rng), u = random_hermitian(4, rng);
        auto f = [](const Mat& m) { return (m * m * m).trace().real(); };
        const auto d = directional(f, x, u, {});
        CHECK(d.value == doctest::Approx(3.0 * (x * x * u).trace().real()).epsilon(1e-7));
        CHECK(nabla(2.0, u, f, x) == doctest::Approx(2.0 * f(x) + d.value).epsilon(1e-9));
    }

    TEST_CASE("commutator jets are conserved")
    {
        const auto s = testing::load("vac.json");
        std::mt19937_64 rng(5);
        Mat a = Mat::Zero(s.model.group.dim(), s.model.group.dim());
        for (const auto& b : commutant_basis(s.model.group)) {
            CHECK((b * s.model.group.generator - s.model.group.generator * b).norm() < 1e-12);
            a += normal(rng) * b;
        }
        const Jet u = commutator_jet(a, s);
        check_jet(u, s);
        const auto r = conservation_check(s, u, exhaustion_by_radius(s, s.point(0).matrix));
        CHECK(r.max_gap <= 10.0 * r.fd_tolerance);
        CHECK(r.fd_tolerance > 0.0);
    }

    TEST_CASE("gamma over the whole support vanishes")
    {
        const auto s = testing::load("vac.json");
        std::mt19937_64 rng(6);
        Jet u = zero_jet(s.size(), s.model.group.dim());
        for (int i = 0; i < s.size(); ++i) {
            u.scalars(i) = normal(rng);
            u.directions[i] = project_tangent(s.point(i), random_hermitian(s.point(i).dim(), rng), s.model.kernel);
        }
        CHECK(std::abs(gamma_sli(s, RVec::Ones(s.size()), u)) < 1e-14);
        CHECK(std::abs(gamma_sli(s, RVec::Zero(s.size()), u)) < 1e-14);
    }

    TEST_CASE("jet arithmetic and validation")
    {
        const auto s = testing::load("vac.json");
        const int n = s.size(), f = s.model.group.dim();
        const Jet a = scalar_jet(n, f, 1, 2.0), b = scalar_jet(n, f, 1, 3.0);
        CHECK((a + b).scalars(1) == 5.0);
        CHECK((2.0 * a).scalars(1) == 4.0);
        CHECK_THROWS_AS(check_jet(scalar_jet(n + 1, f, 0), s), Error);
    }

    TEST_CASE("divergence on a graph")
    {
        const auto s = testing::load("body.json");
        std::mt19937_64 rng(7);
        RVec a(s.size());
        for (int i = 0; i < s.size(); ++i) a(i) = normal(rng);
        const Graph g = knn_graph(s, -1, {s.size() - 1});
        const auto sol = solve_divergence(a, g);
        CHECK(sol.residual < 1e-12);
        double wa = 0.0;
        for (int i = 0; i < s.size(); ++i) wa += g.node_weight[i] * a(i);
        CHECK(boundary_flux(sol.field, g) == doctest::Approx(wa).epsilon(1e-12));
        // balanced source without an end
        const Graph g0 = knn_graph(s);
        RVec b = a;
        b.array() -= wa / s.measure.volume();
        const auto sol0 = solve_divergence(b, g0);
        CHECK(sol0.residual < 1e-12);
        CHECK(std::abs(boundary_flux(sol0.field, g0)) < 1e-14);
        CHECK_THROWS_AS(solve_divergence(a, g0), Error);
    }
}
