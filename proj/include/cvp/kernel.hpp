#pragma once

#include "cvp/types.hpp"

#include <vector>

namespace cvp {

struct KernelSpec {
    int spin_dimension = 1;
    double kappa = 0.0;
    double trace_constant = 1.0;
    bool trace_constraint = true;
    // Negative selects the default 1e-9 * ||matrix||.
    double signature_tolerance = -1.0;

    double tolerance_for(const Mat& m) const;
};

// A point of F. The nonzero part of the spectrum is kept as an eigenvector
// factor so that x = range * diag(range_eigs) * range^*; unused columns are zero.
struct OperatorPoint {
    Mat matrix;
    RVec spectrum;   // ascending
    Mat range;       // f x 2n
    RVec range_eigs; // 2n, positives first, zero padded

    int dim() const { return static_cast<int>(matrix.rows()); }
};

using SpectralData = std::vector<cplx>;

// Builds the factor of a Hermitian matrix, keeping the n largest positive and
// n most negative eigenvalues. With truncate = true the stored matrix is the
// truncated reconstruction (nearest point of F in Frobenius norm).
OperatorPoint make_point(const Mat& m, int n, bool truncate = false);

OperatorPoint validate_point(const Mat& m, const KernelSpec& spec);

// 2n x 2n matrix whose eigenvalues are the nonzero eigenvalues of x*y.
Mat compress_product(const Mat& x, const OperatorPoint& y);

SpectralData eigen_product(const OperatorPoint& x, const OperatorPoint& y, const KernelSpec& spec);

double lagrangian_from_spectrum(const SpectralData& ev);
double weight_sq_from_spectrum(const SpectralData& ev);

double causal_lagrangian(const OperatorPoint& x, const OperatorPoint& y, const KernelSpec& spec);
double spectral_weight_sq(const OperatorPoint& x, const OperatorPoint& y, const KernelSpec& spec);
double kappa_lagrangian(const OperatorPoint& x, const OperatorPoint& y, const KernelSpec& spec);

// Spin dimension one: L and |xy|^2 from trace and determinant of the 2x2
// compression. Also yields the partial derivatives used by gradients.
struct TwoByTwo {
    double L, T;
    double L_tr, L_det, T_tr, T_det;
};
TwoByTwo lagrangian_2x2(double tr, double det);

} // namespace cvp
