#include <doctest.h>

#include "cvp/jets.hpp"
#include "cvp/lingrav.hpp"
#include "cvp/mass.hpp"
#include "cvp/optimize.hpp"
#include "cvp/verify.hpp"
#include "fixtures.hpp"

#include <omp.h>

using namespace cvp;

namespace {

bool same(const RMat& a, const RMat& b) { return a.rows() == b.rows() && a.cols() == b.cols() && (a.array() == b.array()).all(); }

} // namespace

// The OpenMP kernels must reproduce the serial reference bit for bit.
TEST_SUITE("parallel")
{
    TEST_CASE("pair tables")
    {
        omp_set_num_threads(4);
        const auto s = testing::load("body.json");
        const auto t = verify::partner_system(s, 9);
        const auto a = self_table(s, Exec::serial), b = self_table(s, Exec::parallel);
        CHECK(same(a.L, b.L));
        CHECK(same(a.T, b.T));
        const auto c = pair_table(t, s, Exec::serial), d = pair_table(t, s, Exec::parallel);
        CHECK(same(c.L, d.L));
        CHECK(same(c.T, d.T));
        // symmetric self table agrees with the full evaluation
        const auto f = pair_table(s, s, Exec::serial);
        CHECK((f.L - a.L).cwiseAbs().maxCoeff() < 1e-15 * a.L.cwiseAbs().maxCoeff());
    }

    TEST_CASE("jet tables and derivatives")
    {
        omp_set_num_threads(3);
        const auto s = testing::load("vac.json");
        Jet u = zero_jet(s.size(), s.model.group.dim());
        for (int i = 0; i < s.size(); ++i) {
            u.scalars(i) = 0.1 * i;
            u.directions[i] = tangent_basis(s.point(i), s.model.kernel)[0];
        }
        const auto a = jet_table(s, u, {}, Exec::serial), b = jet_table(s, u, {}, Exec::parallel);
        CHECK(same(a.G, b.G));
        CHECK(same(a.err, b.err));
        CHECK(d_ell_kappa(s, u, {}, Exec::serial) == d_ell_kappa(s, u, {}, Exec::parallel));
        const auto basis = solution_basis(s);
        const double li = compatible_ell_infinity(s);
        CHECK(same(assemble_lingrav(s, li, basis, {}, Exec::serial).matrix,
                   assemble_lingrav(s, li, basis, {}, Exec::parallel).matrix));
    }

    TEST_CASE("optimizer")
    {
        omp_set_num_threads(4);
        SystemSpec sp;
        sp.points = 5;
        OptimizeOptions o;
        o.iterations = 60;
        o.exec = Exec::serial;
        const auto a = minimize(random_system(sp), o);
        o.exec = Exec::parallel;
        const auto b = minimize(random_system(sp), o);
        CHECK(a.measure.weights == b.measure.weights);
        for (int i = 0; i < a.size(); ++i) CHECK((a.point(i).matrix - b.point(i).matrix).norm() == 0.0);
    }
}
