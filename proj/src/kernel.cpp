#include "cvp/kernel.hpp"
#include "cvp/numeric.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cvp {

double KernelSpec::tolerance_for(const Mat& m) const
{
    if (signature_tolerance >= 0.0) return signature_tolerance;
    return 1e-9 * std::max(op_norm(m), 1e-300);
}

OperatorPoint make_point(const Mat& m, int n, bool truncate)
{
    const int f = static_cast<int>(m.rows());
    if (m.cols() != f) throw Error(ErrorKind::schema, "operator point: matrix is not square");
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(m));
    if (es.info() != Eigen::Success) throw Error(ErrorKind::convergence, "operator point: eigensolver failed");
    const RVec& ev = es.eigenvalues();
    const double tol = 1e-9 * std::max(ev.cwiseAbs().maxCoeff(), 1e-300);

    OperatorPoint p;
    p.spectrum = ev;
    p.range = Mat::Zero(f, 2 * n);
    p.range_eigs = RVec::Zero(2 * n);
    int col = 0;
    for (int k = f - 1, taken = 0; k >= 0 && taken < n; --k, ++taken) {
        if (ev(k) <= tol) break;
        p.range.col(col) = es.eigenvectors().col(k);
        p.range_eigs(col++) = ev(k);
    }
    col = n;
    for (int k = 0, taken = 0; k < f && taken < n; ++k, ++taken) {
        if (ev(k) >= -tol) break;
        p.range.col(col) = es.eigenvectors().col(k);
        p.range_eigs(col++) = ev(k);
    }
    if (truncate) {
        p.matrix = p.range * p.range_eigs.cast<cplx>().asDiagonal() * p.range.adjoint();
        p.matrix = hermitian_part(p.matrix);
    } else {
        p.matrix = m;
    }
    return p;
}

OperatorPoint validate_point(const Mat& m, const KernelSpec& spec)
{
    const int n = spec.spin_dimension;
    if (n < 1) throw Error(ErrorKind::schema, "kernel spec: spin dimension must be >= 1");
    if (m.rows() != m.cols() || m.rows() == 0) throw Error(ErrorKind::schema, "operator point: matrix is not square");
    const double tol = spec.tolerance_for(m);
    if (herm_defect(m) > tol) throw Error(ErrorKind::invariant, "operator point: matrix is not Hermitian");
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(m), Eigen::EigenvaluesOnly);
    const RVec& ev = es.eigenvalues();
    int pos = 0, neg = 0;
    for (int k = 0; k < ev.size(); ++k) {
        if (ev(k) > tol) ++pos;
        if (ev(k) < -tol) ++neg;
    }
    if (pos > n || neg > n) {
        std::ostringstream os;
        os << "operator point: signature violation (" << pos << " positive, " << neg
           << " negative eigenvalues, at most " << n << " each allowed)";
        throw Error(ErrorKind::invariant, os.str());
    }
    if (spec.trace_constraint) {
        const double tr = m.trace().real();
        const double ttol = std::max(tol, 1e-12 * std::abs(spec.trace_constant)) * m.rows();
        if (std::abs(tr - spec.trace_constant) > ttol) {
            std::ostringstream os;
            os << "operator point: trace violation (trace " << tr << ", required " << spec.trace_constant << ")";
            throw Error(ErrorKind::invariant, os.str());
        }
    }
    return make_point(hermitian_part(m), n, false);
}

Mat compress_product(const Mat& x, const OperatorPoint& y)
{
    if (x.rows() != y.range.rows()) throw Error(ErrorKind::schema, "kernel: dimension mismatch");
    Mat b = y.range.adjoint() * x * y.range;
    return y.range_eigs.cast<cplx>().asDiagonal() * b;
}

SpectralData eigen_product(const OperatorPoint& x, const OperatorPoint& y, const KernelSpec& spec)
{
    if (y.range.cols() != 2 * spec.spin_dimension || x.dim() != y.dim())
        throw Error(ErrorKind::schema, "kernel: dimension mismatch");
    Mat m = compress_product(x.matrix, y);
    Eigen::ComplexEigenSolver<Mat> ces(m, false);
    if (ces.info() != Eigen::Success) throw Error(ErrorKind::convergence, "kernel: eigensolver did not converge");
    SpectralData ev(ces.eigenvalues().data(), ces.eigenvalues().data() + ces.eigenvalues().size());
    return ev;
}

double lagrangian_from_spectrum(const SpectralData& ev)
{
    const std::size_t m = ev.size();
    double s = 0.0;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) {
            double d = std::abs(ev[i]) - std::abs(ev[j]);
            s += d * d;
        }
    // m = 2n; the double sum counts each unordered pair twice
    return 2.0 * s / (2.0 * static_cast<double>(m));
}

double weight_sq_from_spectrum(const SpectralData& ev)
{
    double s = 0.0;
    for (const auto& l : ev) s += std::abs(l);
    return s * s;
}

double causal_lagrangian(const OperatorPoint& x, const OperatorPoint& y, const KernelSpec& spec)
{
    return lagrangian_from_spectrum(eigen_product(x, y, spec));
}

double spectral_weight_sq(const OperatorPoint& x, const OperatorPoint& y, const KernelSpec& spec)
{
    return weight_sq_from_spectrum(eigen_product(x, y, spec));
}

double kappa_lagrangian(const OperatorPoint& x, const OperatorPoint& y, const KernelSpec& spec)
{
    SpectralData ev = eigen_product(x, y, spec);
    return lagrangian_from_spectrum(ev) + spec.kappa * weight_sq_from_spectrum(ev);
}

TwoByTwo lagrangian_2x2(double tr, double det)
{
    const double disc = tr * tr - 4.0 * det;
    TwoByTwo r{};
    if (disc < 0.0) {
        // complex conjugate pair of equal modulus
        r.T = 4.0 * det;
        r.T_det = 4.0;
    } else if (det >= 0.0) {
        r.L = 0.5 * disc;
        r.L_tr = tr;
        r.L_det = -2.0;
        r.T = tr * tr;
        r.T_tr = 2.0 * tr;
    } else {
        r.L = 0.5 * tr * tr;
        r.L_tr = tr;
        r.T = disc;
        r.T_tr = 2.0 * tr;
        r.T_det = -4.0;
    }
    return r;
}

} // namespace cvp
