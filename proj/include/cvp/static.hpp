#pragma once

#include "cvp/kernel.hpp"

namespace cvp {

struct StaticGroup {
    Mat generator;
    Mat basis;  // eigenvectors of the generator
    RVec freq;  // eigenvalues of the generator
    double period = 0.0; // > 0 when the spectrum is commensurate
    bool central = false;

    static StaticGroup from_generator(const Mat& h);
    int dim() const { return static_cast<int>(generator.rows()); }
    Mat unitary(double t) const; // exp(-i t H)
};

struct QuadratureSpec {
    double half_width = 40.0;
    int node_count = 12;
    double tail_tolerance = 1e-8;
    double rel_tol = 1e-10; // local refinement target for the Kronrod/Gauss difference
    int max_depth = 12;
};

// Everything a pair evaluation needs besides the two points.
struct Model {
    KernelSpec kernel;
    StaticGroup group;
    QuadratureSpec quad;
};

struct StaticValue {
    double lagrangian = 0.0;
    double boundedness = 0.0;
    double error = 0.0; // panel error estimate
    double tail = 0.0;  // tail estimate (aperiodic orbits only)
    double kappa(double k) const { return lagrangian + k * boundedness; }
};

struct StaticGradient {
    StaticValue value;
    Mat d_lagrangian;  // Hermitian gradient with respect to the first argument
    Mat d_boundedness;
};

// A point expressed in the eigenbasis of the generator.
struct OrbitFrame {
    Mat rotated;  // V^* x V
    Mat q;        // V^* range
    RVec lam;     // range eigenvalues
};

OrbitFrame orbit_frame(const OperatorPoint& p, const StaticGroup& g);
Mat rotate_in(const Mat& x, const StaticGroup& g);

OperatorPoint orbit_point(const OperatorPoint& x, double t, const StaticGroup& g, const KernelSpec& spec);

// int L(x, U_t y U_t^{-1}) dt over one period (periodic orbits) or over
// [-T, T] with a monitored tail. The first argument may be any Hermitian matrix
// (given in the rotated frame); the second supplies the orbit.
StaticValue static_pair_rotated(const Mat& x_rot, const OrbitFrame& y, const Model& m);
StaticGradient static_pair_gradient(const Mat& x_rot, const OrbitFrame& y, const Model& m);

StaticValue static_pair(const OperatorPoint& x, const OperatorPoint& y, const Model& m);

double static_lagrangian(const OperatorPoint& x, const OperatorPoint& y, const StaticGroup& g,
                         const QuadratureSpec& q, const KernelSpec& spec);
double static_boundedness(const OperatorPoint& x, const OperatorPoint& y, const StaticGroup& g,
                          const QuadratureSpec& q, const KernelSpec& spec);
double static_kappa_lagrangian(const OperatorPoint& x, const OperatorPoint& y, const StaticGroup& g,
                               const QuadratureSpec& q, const KernelSpec& spec, double kappa);

} // namespace cvp
