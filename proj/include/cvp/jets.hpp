#pragma once

#include "cvp/system.hpp"

#include <functional>
#include <vector>

namespace cvp {

// (a, u): a scalar and a Hermitian direction at every support point.
struct Jet {
    RVec scalars;
    std::vector<Mat> directions;

    int size() const { return static_cast<int>(scalars.size()); }
};

Jet zero_jet(int n, int f);
Jet scalar_jet(int n, int f, int at, double a = 1.0);
Jet direction_jet(int n, int f, int at, const Mat& u);
Jet operator+(const Jet& a, const Jet& b);
Jet operator*(double s, const Jet& a);
void check_jet(const Jet& j, const StaticSystem& s);

// Central differences with step h = step * ||x|| along the unit direction.
// With analytic = true first derivatives come from the quadrature gradient.
struct FDScheme {
    double step = 1e-4;
    bool analytic = false;
};

struct FDValue {
    double value = 0.0;
    double error = 0.0; // Richardson estimate |D(h) - D(2h)| / 3
};

// Tangent space of F at x: U K U* + U Z P* + P Z* U* with tr K = 0 under the
// trace constraint. Orthonormal for Re tr(a* b).
std::vector<Mat> tangent_basis(const OperatorPoint& x, const KernelSpec& spec);
Mat project_tangent(const OperatorPoint& x, const Mat& u, const KernelSpec& spec);

// d/dh f(x + h u) at h = 0; f is any function on Hermitian matrices.
FDValue directional(const std::function<double(const Mat&)>& f, const Mat& x, const Mat& u, const FDScheme& fd);

// a(x) f(x) + D_u f(x)
double nabla(double a, const Mat& u, const std::function<double(const Mat&)>& f, const Mat& x,
             const FDScheme& fd = {});

enum class Slot { d1, d2, sum, difference };

// Directional derivatives of the static kappa-Lagrangian. u moves the first
// argument, v the second.
FDValue dL(const OperatorPoint& x, const OperatorPoint& y, const Mat& u, const Mat& v, Slot which, const Model& m,
           const FDScheme& fd = {});

// G(i, j) = D_{1, u(x_i)} L_kappa(x_i, x_j), the building block of all jet
// sums; G(j, i) then gives D_{2, u(x_i)} L_kappa(x_j, x_i).
struct JetTable {
    RMat G;
    RMat err;
};
JetTable jet_table(const StaticSystem& s, const Jet& u, const FDScheme& fd = {}, Exec exec = Exec::parallel);

// D_u ell_kappa(x_i) for every i
RVec d_ell_kappa(const StaticSystem& s, const Jet& u, const FDScheme& fd = {}, Exec exec = Exec::parallel);

// <u, Delta v>(x_i), second derivatives by differences.
double laplacian_pairing(const Jet& u, const Jet& v, const StaticSystem& s, int i, const FDScheme& fd = {});

// sum over Omega x (N \ Omega) of (nabla_1 - nabla_2) L_kappa; omega is a
// per-point membership in [0, 1].
double gamma_sli(const StaticSystem& s, const RVec& omega, const Jet& u, const JetTable& t, const PairTable& k);
double gamma_sli(const StaticSystem& s, const RVec& omega, const Jet& u, const FDScheme& fd = {});

// Linearized equation residual for scalar test jets:
// r_i = sum_j w_j (nabla_1 + nabla_2) L_kappa(x_i, x_j) - a_i s.
RVec linearized_residual(const StaticSystem& s, const Jet& u, const JetTable& t, const PairTable& k);

struct ConservationReport {
    std::vector<double> volumes;
    std::vector<double> gamma;    // gamma^Omega(u)
    std::vector<double> expected; // s * sum_Omega w a
    std::vector<double> gap;
    double max_gap = 0.0;
    double residual = 0.0;        // max |r_i|
    double fd_tolerance = 0.0;
};
ConservationReport conservation_check(const StaticSystem& s, const Jet& u, const Exhaustion& e,
                                      const FDScheme& fd = {});

// Scale of FD errors for quantities of the size of the action.
double fd_tolerance(const StaticSystem& s, const PairTable& k, const JetTable& t, const FDScheme& fd);

Jet commutator_jet(const Mat& a, const StaticSystem& s, double tolerance = 1e-9);

// Hermitian matrices commuting with the generator: projectors on its
// eigenvectors plus the off-diagonal pieces of degenerate eigenspaces.
std::vector<Mat> commutant_basis(const StaticGroup& g);

struct TestBasisOptions {
    bool scalars = true;
    bool commutators = true;
    bool tangents = true;
};
std::vector<Jet> test_basis(const StaticSystem& s, const TestBasisOptions& opt = {});

// Discrete vector fields live on the edges of a weighted neighbour graph.
struct Graph {
    int nodes = 0;
    std::vector<std::pair<int, int>> edges; // i < j, flow counted from i to j
    std::vector<double> conductance;        // (w_i + w_j) / 2
    std::vector<double> node_weight;
    std::vector<int> sinks;                 // nodes joined to the virtual end
    std::vector<double> sink_conductance;
};

Graph knn_graph(const StaticSystem& s, int k = -1, const std::vector<int>& ends = {});
Graph knn_graph(const std::vector<double>& weights, const RMat& distance, int k, const std::vector<int>& ends = {});

struct EdgeField {
    std::vector<double> flow;      // per edge
    std::vector<double> sink_flow; // per sink edge, out of the support
};

// Weighted adjoint of the graph gradient:
// sum_i w_i div(v)_i eta_i = -sum_e c_e v_e (grad eta)_e for eta with eta = 0 at the end.
RVec divergence(const EdgeField& v, const Graph& g);
double boundary_flux(const EdgeField& v, const Graph& g);

struct DivergenceSolution {
    EdgeField field;
    RVec potential;
    double residual = 0.0; // max |div v - a|
    double flux = 0.0;
};
DivergenceSolution solve_divergence(const RVec& a, const Graph& g);

} // namespace cvp
