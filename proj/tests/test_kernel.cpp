#include <doctest.h>

#include "cvp/build.hpp"
#include "cvp/kernel.hpp"
#include "cvp/numeric.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>

using namespace cvp;

namespace {

Mat diag(std::initializer_list<double> d)
{
    RVec v(static_cast<int>(d.size()));
    int i = 0;
    for (double x : d) v(i++) = x;
    return v.cast<cplx>().asDiagonal();
}

KernelSpec spec1(double kappa = 0.0)
{
    KernelSpec s;
    s.spin_dimension = 1;
    s.kappa = kappa;
    s.trace_constraint = false;
    return s;
}

// Largest distance under greedy nearest matching of two eigenvalue multisets.
double multiset_gap(SpectralData a, SpectralData b)
{
    double worst = 0.0;
    for (auto e : a) {
        auto it = std::min_element(b.begin(), b.end(),
                                   [&](cplx p, cplx q) { return std::abs(p - e) < std::abs(q - e); });
        worst = std::max(worst, std::abs(*it - e));
        b.erase(it);
    }
    return worst;
}

} // namespace

TEST_SUITE("kernel")
{
    TEST_CASE("identity product has unit eigenvalues")
    {
        auto s = spec1();
        auto x = validate_point(diag({1, -1}), s);
        auto ev = eigen_product(x, x, s);
        REQUIRE(ev.size() == 2);
        for (auto e : ev) CHECK(std::abs(e - cplx(1.0)) < 1e-14);
        CHECK(causal_lagrangian(x, x, s) == doctest::Approx(0.0));
        CHECK(spectral_weight_sq(x, x, s) == doctest::Approx(4.0));
    }

    TEST_CASE("diagonal product")
    {
        auto s = spec1(0.1);
        auto x = validate_point(diag({2, -1}), s);
        auto ev = eigen_product(x, x, s);
        std::vector<double> mod{std::abs(ev[0]), std::abs(ev[1])};
        std::sort(mod.begin(), mod.end());
        CHECK(mod[0] == doctest::Approx(1.0));
        CHECK(mod[1] == doctest::Approx(4.0));
        CHECK(causal_lagrangian(x, x, s) == doctest::Approx(4.5));
        CHECK(spectral_weight_sq(x, x, s) == doctest::Approx(25.0));
        CHECK(kappa_lagrangian(x, x, s) == doctest::Approx(7.0));
        s.kappa = 0.0;
        CHECK(kappa_lagrangian(x, x, s) == doctest::Approx(4.5));
    }

    TEST_CASE("zero operator")
    {
        auto s = spec1();
        auto x = validate_point(Mat::Zero(2, 2), s);
        auto y = validate_point(diag({2, -1}), s);
        CHECK(spectral_weight_sq(x, y, s) == 0.0);
        CHECK(causal_lagrangian(x, y, s) == 0.0);
    }

    TEST_CASE("validation")
    {
        auto s = spec1();
        CHECK_NOTHROW(validate_point(diag({1, -1, 0, 0}), s));
        CHECK_THROWS_AS(validate_point(diag({1, 1, -1, 0}), s), Error);
        try {
            validate_point(diag({1, 1, -1, 0}), s);
        } catch (const Error& e) {
            CHECK(std::string(e.what()).find("signature") != std::string::npos);
            CHECK(e.kind() == ErrorKind::invariant);
        }
        s.trace_constraint = true;
        s.trace_constant = 1.0;
        CHECK_NOTHROW(validate_point(diag({2, -1}), s));
        s.trace_constant = 2.0;
        CHECK_THROWS_AS(validate_point(diag({2, -1}), s), Error);
        Mat nh = diag({1, -1});
        nh(0, 1) = cplx(0.0, 1.0);
        CHECK_THROWS_AS(validate_point(nh, s), Error);
    }

    TEST_CASE("swap invariance of the product spectrum against the full product")
    {
        std::mt19937_64 rng(11);
        for (int n : {1, 2}) {
            KernelSpec s;
            s.spin_dimension = n;
            s.trace_constraint = false;
            for (int trial = 0; trial < 20; ++trial) {
                const int f = 2 * n + 3;
                auto x = validate_point(random_point_matrix(f, n, 0.7, rng), s);
                auto y = validate_point(random_point_matrix(f, n, 0.7, rng), s);
                auto a = eigen_product(x, y, s);
                CHECK(multiset_gap(a, eigen_product(y, x, s)) < 1e-10);

                // oracle: the 2n largest-modulus eigenvalues of the full f x f product
                Eigen::ComplexEigenSolver<Mat> ces(x.matrix * y.matrix, false);
                SpectralData full(ces.eigenvalues().data(), ces.eigenvalues().data() + f);
                std::sort(full.begin(), full.end(), [](cplx p, cplx q) { return std::abs(p) > std::abs(q); });
                full.resize(2 * n);
                CHECK(multiset_gap(a, full) < 1e-10);
            }
        }
    }

    TEST_CASE("closed-form two by two route agrees with the eigensolver route")
    {
        std::mt19937_64 rng(5);
        auto s = spec1();
        for (int trial = 0; trial < 200; ++trial) {
            auto x = validate_point(random_point_matrix(4, 1, uniform(rng, -1.0, 1.0), rng), s);
            auto y = validate_point(random_point_matrix(4, 1, uniform(rng, -1.0, 1.0), rng), s);
            Mat m = compress_product(x.matrix, y);
            auto r = lagrangian_2x2(m.trace().real(), m.determinant().real());
            auto ev = eigen_product(x, y, s);
            const double scale = 1.0 + weight_sq_from_spectrum(ev);
            CHECK(std::abs(r.L - lagrangian_from_spectrum(ev)) < 1e-12 * scale);
            CHECK(std::abs(r.T - weight_sq_from_spectrum(ev)) < 1e-12 * scale);
        }
    }

    TEST_CASE("homogeneity and symmetry")
    {
        std::mt19937_64 rng(3);
        KernelSpec s = spec1(0.3);
        for (int trial = 0; trial < 50; ++trial) {
            Mat a = random_point_matrix(5, 1, 0.4, rng), b = random_point_matrix(5, 1, -0.3, rng);
            auto x = validate_point(a, s), y = validate_point(b, s);
            auto x2 = validate_point(2.0 * a, s), y2 = validate_point(2.0 * b, s);
            const double l = causal_lagrangian(x, y, s);
            CHECK(std::abs(causal_lagrangian(x2, y2, s) - 16.0 * l) <= 1e-12 * 16.0 * l);
            CHECK(std::abs(kappa_lagrangian(x2, y2, s) - 16.0 * kappa_lagrangian(x, y, s)) <=
                  1e-12 * 16.0 * kappa_lagrangian(x, y, s));
            CHECK(std::abs(l - causal_lagrangian(y, x, s)) <= 1e-10 * (1.0 + l));
        }
    }

    TEST_CASE("diagonal positivity")
    {
        auto s = spec1();
        auto x = validate_point(diag({1.5, -0.5, 0.0}), s);
        CHECK(causal_lagrangian(x, x, s) > 0.0);
    }
}
