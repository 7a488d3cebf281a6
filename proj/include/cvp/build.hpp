#pragma once

#include "cvp/static.hpp"

#include <random>

namespace cvp {

// Random point of F with exactly n positive and n negative eigenvalues and
// the prescribed trace.
Mat random_point_matrix(int f, int n, double trace, std::mt19937_64& rng);

// Trace-preserving retraction onto F: keeps the n largest positive and the
// n most negative eigenvalues, then rescales the positive part to restore the
// trace. Requires at least one positive eigenvalue when trace > 0.
OperatorPoint retract(const Mat& m, const KernelSpec& spec);

// Generator with integer spectrum {0, 1, ..., f-1} in a random eigenbasis;
// its orbits are 2 pi periodic.
Mat integer_generator(int f, std::mt19937_64& rng, bool random_basis = true);

} // namespace cvp
