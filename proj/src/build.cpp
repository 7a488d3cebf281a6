#include "cvp/build.hpp"
#include "cvp/numeric.hpp"

#include <Eigen/Eigenvalues>

namespace cvp {

Mat random_point_matrix(int f, int n, double trace, std::mt19937_64& rng)
{
    Mat u = random_unitary(f, rng);
    RVec ev = RVec::Zero(f);
    double pos = 0.0, neg = 0.0;
    for (int k = 0; k < n; ++k) {
        ev(k) = uniform(rng, 0.5, 1.5);
        ev(n + k) = -uniform(rng, 0.2, 1.0);
        pos += ev(k);
        neg += ev(n + k);
    }
    // fix the trace by scaling the positive block
    if (trace - neg > 0.0)
        ev.head(n) *= (trace - neg) / pos;
    else
        ev.segment(n, n) *= (trace - pos) / neg;
    Mat m = u * ev.cast<cplx>().asDiagonal() * u.adjoint();
    return hermitian_part(m);
}

OperatorPoint retract(const Mat& m, const KernelSpec& spec)
{
    const int n = spec.spin_dimension;
    OperatorPoint p = make_point(m, n, true);
    if (spec.trace_constraint) {
        double pos = 0.0, neg = 0.0;
        for (int k = 0; k < n; ++k) {
            pos += p.range_eigs(k);
            neg += p.range_eigs(n + k);
        }
        const double c = spec.trace_constant;
        if (pos > 0.0 && c - neg > 0.0) {
            const double s = (c - neg) / pos;
            for (int k = 0; k < n; ++k) p.range_eigs(k) *= s;
        } else if (neg < 0.0 && c - pos < 0.0) {
            const double s = (c - pos) / neg;
            for (int k = 0; k < n; ++k) p.range_eigs(n + k) *= s;
        } else {
            throw Error(ErrorKind::invariant, "retraction: trace cannot be restored without a signature change");
        }
        p.matrix = hermitian_part(p.range * p.range_eigs.cast<cplx>().asDiagonal() * p.range.adjoint());
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(p.matrix, Eigen::EigenvaluesOnly);
    p.spectrum = es.eigenvalues();
    return p;
}

Mat integer_generator(int f, std::mt19937_64& rng, bool random_basis)
{
    RVec ev(f);
    for (int k = 0; k < f; ++k) ev(k) = k;
    if (!random_basis) return ev.cast<cplx>().asDiagonal();
    Mat u = random_unitary(f, rng);
    return hermitian_part(u * ev.cast<cplx>().asDiagonal() * u.adjoint());
}

} // namespace cvp
