#pragma once

#include "cvp/types.hpp"

#include <cstddef>
#include <random>
#include <span>

namespace cvp {

// Pairwise summation in fixed index order.
double pairwise_sum(std::span<const double> v);
cplx pairwise_sum(std::span<const cplx> v);

double op_norm(const Mat& m);
double herm_defect(const Mat& m);
Mat hermitian_part(const Mat& m);

Mat random_hermitian(int f, std::mt19937_64& rng);
Mat random_unitary(int f, std::mt19937_64& rng);
double normal(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double a, double b);

// Real inner product Re tr(a* b) on Hermitian matrices.
double frob_dot(const Mat& a, const Mat& b);

} // namespace cvp
