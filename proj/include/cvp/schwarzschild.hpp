#pragma once

#include "cvp/types.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace cvp::schw {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

enum class ProfileKind { gaussian, exponential, bump };

// Lagrangian of the vacuum as a function of the time and spatial separation,
// L(t, rho). All kinds depend on t^2 + rho^2 only:
//   gaussian     scale exp(-(t^2 + rho^2) / 2w^2)
//   exponential  scale exp(-sqrt(t^2 + rho^2) / w)
//   bump         scale (1 - (t^2 + rho^2) / w^2)^2 inside the ball of radius w
struct Profile {
    ProfileKind kind = ProfileKind::gaussian;
    double width = 1.0;
    double scale = 1.0;

    static Profile parse(const std::string& name, double width = 1.0, double scale = 1.0);
    std::string name() const;

    double operator()(double t, double rho) const;
    double d_t(double t, double rho) const;
    double d_rho(double t, double rho) const;
    // time integral, as a function of q = rho^2
    double static_value(double q) const;
    // radius beyond which L vanishes (infinity unless compact)
    double support() const;
};

struct Tolerance {
    double rel_tol = 1e-10;
    int max_intervals = 4000;
};

// (M_S / 2) int_0^inf dr (r - R)(3r - 2R) int_0^{2 sqrt(R r)} dsigma sigma L_s((r - R)^2 + sigma^2),
// the surface layer mass at radius R after the angular integration.
double mass_MR(double R, const Profile& p, double mass_s, const Tolerance& tol = {});

// (M_S / 4 pi) int |y|^2 L(t, |y|) dt d^3y on the (t, rho) quarter plane.
double mass_closed_form(const Profile& p, double mass_s, const Tolerance& tol = {});

// (1 / 4 pi) int |y|^2 L dt d^3y computed from the time-integrated profile.
double constant_c(const Profile& p, const Tolerance& tol = {});

// Both sides of the averaging identity for the radial flux kernel
// A(r, r') = (r' - r) L_s((r' - r)^2).
struct AveragingReport {
    double lhs = 0.0;   // int_{Rmin}^R dr int_R^inf dr' A
    double t1 = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0;
    double full = 0.0;  // (1/2L) int_R^{R+L} dr int_{Rmin}^inf dr' (r' - r) A
    double gap = 0.0;   // |lhs - t3|, the terms dropped at finite L
    double full_gap = 0.0;
    double split_gap = 0.0; // |lhs - (t1 + t2 + t3 + t4)|
};
AveragingReport averaging_check(const Profile& p, double R, double window, double r_min = 0.0,
                                const Tolerance& tol = {});

// Exponent k of gap ~ L^-k fitted over the given windows.
double averaging_exponent(const Profile& p, double R, const std::vector<double>& windows, double r_min = 0.0);

enum class Shape { indicator, smooth, bump };

// Static, compactly supported perturbation h^i_j(z) = phi(|z - center| / radius) T^i_j
// with indices placed as (upper, lower).
struct MetricPerturbation {
    Mat4 tensor = Mat4::Zero();
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
    Shape shape = Shape::smooth;

    double phi(const Vec3& z) const;
    Mat4 at(const Vec3& z) const { return phi(z) * tensor; }
    double trace() const { return tensor.trace(); }
    // eta h, i.e. both indices down, must be symmetric
    bool symmetric(double tol = 1e-14) const;
};

Mat4 minkowski();

struct LineShifts {
    Vec4 v1 = Vec4::Zero();      // (1/4) int eps(alpha) h xi
    Vec4 v2 = Vec4::Zero();      // (1/4) int eps(alpha - 1) h xi
    Vec4 bounded = Vec4::Zero(); // (1/2) int_0^1 h xi
    double alpha_lo = 0.0, alpha_hi = 0.0; // support of h along the line
};
LineShifts d12p_line_integrals(const Vec4& x, const Vec4& y, const MetricPerturbation& h, const Tolerance& tol = {});

// J^k_j(zeta) at distance r0 from z to the boundary of Omega along zeta:
//   J^k_j = - int_0^inf dbeta beta min(beta, r0) int dxi0 xi^k d_j L(xi),  xi = (xi0, beta zeta).
// All components reduce to four scalar double integrals.
struct JScalars {
    double tt = 0.0;     // int int beta m xi0 L_t
    double trho = 0.0;   // int int beta m xi0 L_rho
    double rhot = 0.0;   // int int beta m beta L_t
    double rhorho = 0.0; // int int beta m beta L_rho
};
JScalars j_scalars(const Profile& p, double r0, const Tolerance& tol = {});
// Same scalars for many boundary distances at once.
std::vector<JScalars> j_scalars_batch(const Profile& p, const std::vector<double>& r0, const Tolerance& tol = {});
Mat4 j_tensor(const JScalars& s, const Vec3& zeta);

struct JStructure {
    Mat4 J;
    double c = 0.0;           // J^0_0
    double off_pattern = 0.0; // max |J - c (e0 e0^T + 3 (0,zeta)(0,zeta)^T)|
    double norm = 0.0;        // max |J|
};
JStructure j_structure(const Profile& p, double r0, const Vec3& zeta, const Tolerance& tol = {});

struct TraceFreeGrid {
    int z_radial = 4, z_polar = 4, z_azimuth = 6;
    int sphere_polar = 6, sphere_azimuth = 12;
};

struct TraceFreeReport {
    double integral = 0.0;   // I
    double trace = 0.0;      // mixed trace of the tensor
    int j_evaluations = 0;
    double min_r0 = 0.0;     // closest approach of a ray to the boundary of Omega
};
// Omega is the ball of radius omega_radius about the origin; h must lie inside.
TraceFreeReport tracefree_vanishing(const MetricPerturbation& h, const Profile& p, double omega_radius,
                                    const TraceFreeGrid& grid = {}, const Tolerance& tol = {});

} // namespace cvp::schw
