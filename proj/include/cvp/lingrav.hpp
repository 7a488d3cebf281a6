#pragma once

#include "cvp/mass.hpp"

namespace cvp {

struct EllInfinity {
    double value = 0.0;
    double drift = 0.0;          // |mean of the outer shell - mean of the shell before it|
    std::vector<double> shells;  // weighted mean of ell per shell, inner to outer
};

// Weighted mean of ell over the outermost fraction of the exhaustion volume.
EllInfinity estimate_ell_infinity(const StaticSystem& s, const Exhaustion& e, double outer = 0.2, int shells = 5);

// On a finite support sum_i w_i <e_i, Delta v> = 2 sum_i w_i D_v ell_kappa,
// which vanishes where the EL equations hold, so the equations are solvable
// only for ell_inf = weighted mean of ell over the support.
double compatible_ell_infinity(const StaticSystem& s);

// Linearized equations tested with the scalar jets (delta_{x_i}, 0):
//   sum_j w_j (D_1 + D_2) L_kappa(x_i, x_j)[v] = -(ell(x_i) - ell_inf)
struct LinGravSystem {
    RMat matrix;                  // rows: support points, columns: solution basis
    RVec rhs;
    double ell_infinity = 0.0;
    double regularization = 0.0;  // ridge, 1e-10 of the largest entry
    std::vector<Jet> basis;
};

struct LinGravSolution {
    Jet v;
    RVec coefficients;
    RVec residual;                // per test point
    double residual_norm = 0.0;   // 2-norm
    double rhs_norm = 0.0;
    double relative = 0.0;        // residual_norm / rhs_norm (0 when rhs = 0)
    int rank = 0;
    int columns = 0;
};

// Point-local tangent directions at every support point outside `exclude`.
std::vector<Jet> solution_basis(const StaticSystem& s, const std::vector<int>& exclude = {});

LinGravSystem assemble_lingrav(const StaticSystem& s, double ell_infinity, const std::vector<Jet>& basis,
                               const FDScheme& fd = {}, Exec exec = Exec::parallel);
// Minimum-norm ridge solution; ridge < 0 uses sys.regularization.
LinGravSolution solve_lingrav(const LinGravSystem& sys, double ridge = -1.0);
// v vanishes on the inner region of s.
LinGravSolution solve_lingrav(const StaticSystem& s, double ell_infinity, const FDScheme& fd = {});

struct InhomReport {
    std::vector<double> volumes;
    std::vector<double> gamma;       // gamma^Omega(v)
    std::vector<double> ell_sum;     // sum_Omega w (ell - ell_inf)
    std::vector<double> gap;
    std::vector<double> el_term;     // 2 sum_Omega w D_v ell_kappa
    std::vector<double> bound;       // max |residual| mu(Omega) + 10 fd tolerance
    double max_gap = 0.0;
    double residual = 0.0;           // max |<e_i, Delta v> + ell - ell_inf|
    double fd_tolerance = 0.0;
    bool within_bound = true;
};
InhomReport prposinhom_check(const StaticSystem& s, const Jet& v, const Exhaustion& e, double ell_infinity,
                             const FDScheme& fd = {});

// g sum w (ell - ell_inf)
double mass_identity(const StaticSystem& s, double g, double ell_infinity);

struct LocalEnergy {
    bool holds = true;
    double margin = 0.0; // min (ell - ell_inf)
    int argmin = 0;
};
LocalEnergy local_energy_check(const StaticSystem& s, double ell_infinity, double tolerance = 0.0);

// Families tau -> point maps, given by the systems at tau = -h, 0, +h (and
// optionally -h/2, +h/2 for the halved difference).
struct Family {
    std::vector<StaticSystem> minus, plus; // minus[k] at -h/2^k, plus[k] at +h/2^k
    double h = 1e-3;
};

// Family from a point map F(tau, x); samples at -h, +h and the halved nodes.
Family sample_family(const StaticSystem& s, const std::function<Mat(double, const Mat&)>& map, double h = 1e-3);

struct KappaFamilyReport {
    Jet v, v_tilde, w;              // w = g (v~ - v), projected to the tangent space
    std::vector<double> tau;
    std::vector<double> nonlinear;  // gamma^{Omega, Omega}(G_tau mu, mu) at the worst cut
    std::vector<double> linear;     // tau gamma^Omega(w)
    std::vector<double> error;
    double order = 0.0;             // log2 of successive error ratios (last pair)
    double ratio = 0.0;             // nonlinear / linear at the smallest tau
    double derivative_gap = 0.0;    // difference between the h and h/2 central differences
};

KappaFamilyReport kappa_family_consistency(const StaticSystem& st, const Family& ft, const StaticSystem& s,
                                           const Family& f, double g, const Exhaustion& e,
                                           const std::vector<double>& taus = {4e-3, 2e-3, 1e-3},
                                           const FDScheme& fd = {});

} // namespace cvp
