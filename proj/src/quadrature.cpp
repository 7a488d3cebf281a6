#include "cvp/quadrature.hpp"

#include <algorithm>
#include <numbers>
#include <queue>

namespace cvp::quad {

namespace {

struct Piece {
    double a, b, value, error;
    bool operator<(const Piece& o) const { return error < o.error; }
};

Piece gk15(const std::function<double(double)>& f, double a, double b)
{
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    double fc = f(c);
    double k = kronrod_w[7] * fc;
    double g = gauss_w[3] * fc;
    for (int i = 0; i < 7; ++i) {
        double d = h * kronrod_x[i];
        double s = f(c - d) + f(c + d);
        k += kronrod_w[i] * s;
        if (i % 2 == 1) g += gauss_w[i / 2] * s;
    }
    return {a, b, k * h, std::abs((k - g) * h)};
}

double finite_or_zero(double v) { return std::isfinite(v) ? v : 0.0; }

} // namespace

Result integrate(const std::function<double(double)>& f, double a, double b, const Options& opt)
{
    Result r;
    if (a == b) return r;
    std::priority_queue<Piece> heap;
    Piece first = gk15(f, a, b);
    heap.push(first);
    double value = first.value, error = first.error;
    int intervals = 1;
    r.evaluations = 15;
    while (error > std::max(opt.abs_tol, opt.rel_tol * std::abs(value))) {
        if (intervals >= opt.max_intervals) {
            r.converged = false;
            break;
        }
        Piece p = heap.top();
        heap.pop();
        double m = 0.5 * (p.a + p.b);
        if (!(m > std::min(p.a, p.b) && m < std::max(p.a, p.b))) {
            r.converged = false;
            heap.push(p);
            break;
        }
        Piece l = gk15(f, p.a, m), u = gk15(f, m, p.b);
        value += l.value + u.value - p.value;
        error += l.error + u.error - p.error;
        heap.push(l);
        heap.push(u);
        ++intervals;
        r.evaluations += 30;
    }
    // Re-add the pieces in a fixed order so the result does not depend on the
    // running updates above.
    std::vector<Piece> pieces;
    while (!heap.empty()) {
        pieces.push_back(heap.top());
        heap.pop();
    }
    std::sort(pieces.begin(), pieces.end(), [](const Piece& x, const Piece& y) { return x.a < y.a; });
    r.value = 0.0;
    r.error = 0.0;
    for (const auto& p : pieces) {
        r.value += p.value;
        r.error += p.error;
    }
    return r;
}

Result integrate_to_infinity(const std::function<double(double)>& f, double a, const Options& opt)
{
    constexpr double hp = std::numbers::pi / 2;
    auto g = [&](double s) {
        double e = std::exp(hp * std::sinh(s));
        return finite_or_zero(f(a + e) * hp * std::cosh(s) * e);
    };
    return integrate(g, -4.5, 4.5, opt);
}

Result integrate_real_line(const std::function<double(double)>& f, const Options& opt)
{
    constexpr double hp = std::numbers::pi / 2;
    auto g = [&](double s) {
        double u = hp * std::sinh(s);
        return finite_or_zero(f(std::sinh(u)) * std::cosh(u) * hp * std::cosh(s));
    };
    return integrate(g, -4.5, 4.5, opt);
}

GaussLegendre::GaussLegendre(int m) : x(m), w(m)
{
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int k = 1; k <= m; ++k) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
            }
            dp = m * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // recompute the derivative at the converged root
        double p0 = 1.0, p1 = 0.0;
        for (int k = 1; k <= m; ++k) {
            double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p2) / k;
        }
        dp = m * (z * p0 - p1) / (z * z - 1.0);
        x[i] = -z;
        x[m - 1 - i] = z;
        w[i] = w[m - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
}

} // namespace cvp::quad
