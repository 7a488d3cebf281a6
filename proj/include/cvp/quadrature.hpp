#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace cvp::quad {

// 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
// Abscissae listed for the nonnegative half, center last.
inline constexpr std::array<double, 8> kronrod_x = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_w = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights on the odd-indexed Kronrod abscissae (1, 3, 5, 7).
inline constexpr std::array<double, 4> gauss_w = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Result {
    double value = 0.0;
    double error = 0.0;
    int evaluations = 0;
    bool converged = true;
};

struct Options {
    double rel_tol = 1e-8;
    double abs_tol = 0.0;
    int max_intervals = 2000;
};

// Globally adaptive Gauss-Kronrod integration on a finite interval.
Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opt = {});

// [a, inf): x = a + exp(pi/2 sinh s); (-inf, inf): x = sinh(pi/2 sinh s).
// The transformed integrand decays double exponentially and the s-range is cut
// where it underflows.
Result integrate_to_infinity(const std::function<double(double)>& f, double a, const Options& opt = {});
Result integrate_real_line(const std::function<double(double)>& f, const Options& opt = {});

// Fixed Gauss-Legendre rule of order m on [-1, 1].
struct GaussLegendre {
    std::vector<double> x, w;
    explicit GaussLegendre(int m);
};

} // namespace cvp::quad
