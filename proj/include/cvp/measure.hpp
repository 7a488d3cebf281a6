#pragma once

#include "cvp/jets.hpp"

#include <functional>

namespace cvp {

// sum_j w_j L(x, y_j) - s for a point that need not lie in the support. The
// first argument may be any Hermitian matrix.
double ell(const Mat& x, const StaticSystem& s);
double frak_t(const Mat& x, const StaticSystem& s);
double ell_kappa(const Mat& x, const StaticSystem& s);

// The same functions on the support, from a pair table.
RVec ell_values(const StaticSystem& s, const PairTable& t);
RVec frak_t_values(const StaticSystem& s, const PairTable& t);
RVec ell_kappa_values(const StaticSystem& s, const PairTable& t);

struct ElResidual {
    double scalar = 0.0;     // max |ell_kappa - min ell_kappa| over the support
    double derivative = 0.0; // max over test jets and points of |nabla_u (ell_kappa - min)|
    double total = 0.0;
    double minimum = 0.0;
    int argmin = 0;          // lowest index attaining the minimum
    int worst_jet = -1;
};

ElResidual el_residual(const StaticSystem& s, const std::vector<Jet>& tests, const FDScheme& fd = {});
ElResidual el_residual(const StaticSystem& s, const FDScheme& fd = {});

struct CorrelationData {
    RVec n_values, n_tilde_values;
    RVec nu_weights, nu_tilde_weights;
};

// n(x_i) = sum_j w~_j L_kappa(x_i, y~_j) and n~(y~_j) = sum_i w_i L_kappa(y~_j, x_i).
CorrelationData correlations(const StaticSystem& s, const StaticSystem& st);
CorrelationData correlations(const StaticSystem& s, const StaticSystem& st, const PairTable& cross);

struct ClosenessReport {
    double sum = 0.0;       // sum_i w_i |n(x_i) - s|
    double sum_tilde = 0.0; // sum_j w~_j |n~(y~_j) - s|
    std::vector<double> shells, shells_tilde; // contribution per exhaustion shell
    bool decaying = true;   // outer shells smaller than inner ones
};

ClosenessReport asymptotic_closeness(const StaticSystem& s, const StaticSystem& st, const Exhaustion& e,
                                     const Exhaustion& et);

// Moves every support point through the map, keeping the weights.
StaticSystem pushforward(const std::function<Mat(const Mat&)>& map, const StaticSystem& s);

} // namespace cvp
