#include "cvp/schwarzschild.hpp"
#include "cvp/quadrature.hpp"

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

namespace cvp::schw {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

quad::Options options(const Tolerance& tol)
{
    quad::Options o;
    o.rel_tol = tol.rel_tol;
    o.max_intervals = tol.max_intervals;
    return o;
}

double checked(const quad::Result& r, const char* what)
{
    if (!r.converged || !std::isfinite(r.value))
        throw Error(ErrorKind::convergence, std::string("schwarzschild: quadrature did not converge in ") + what);
    return r.value;
}

// int_a^b f, where b may be infinite
double span(const std::function<double(double)>& f, double a, double b, const Tolerance& tol, const char* what,
            double abs_tol = 0.0)
{
    if (!(b > a)) return 0.0;
    auto o = options(tol);
    o.abs_tol = abs_tol;
    if (std::isinf(b)) return checked(quad::integrate_to_infinity(f, a, o), what);
    return checked(quad::integrate(f, a, b, o), what);
}

// int over the real line of f restricted to |x| < half (half may be infinite)
double line(const std::function<double(double)>& f, double half, const Tolerance& tol, const char* what)
{
    if (std::isinf(half)) return checked(quad::integrate_real_line(f, options(tol)), what);
    if (!(half > 0.0)) return 0.0;
    return checked(quad::integrate(f, -half, half, options(tol)), what);
}

} // namespace

Profile Profile::parse(const std::string& name, double width, double scale)
{
    if (!(width > 0.0) || !std::isfinite(width)) throw Error(ErrorKind::schema, "profile: width must be positive");
    if (!(scale >= 0.0) || !std::isfinite(scale)) throw Error(ErrorKind::schema, "profile: scale must be nonnegative");
    Profile p;
    p.width = width;
    p.scale = scale;
    if (name == "gaussian")
        p.kind = ProfileKind::gaussian;
    else if (name == "exponential")
        p.kind = ProfileKind::exponential;
    else if (name == "bump")
        p.kind = ProfileKind::bump;
    else
        throw Error(ErrorKind::schema, "profile: unknown kind '" + name + "'");
    return p;
}

std::string Profile::name() const
{
    switch (kind) {
    case ProfileKind::gaussian: return "gaussian";
    case ProfileKind::exponential: return "exponential";
    case ProfileKind::bump: return "bump";
    }
    return "";
}

double Profile::operator()(double t, double rho) const
{
    const double q = t * t + rho * rho, w = width;
    switch (kind) {
    case ProfileKind::gaussian: return scale * std::exp(-q / (2 * w * w));
    case ProfileKind::exponential: return scale * std::exp(-std::sqrt(q) / w);
    case ProfileKind::bump: {
        const double u = 1.0 - q / (w * w);
        return u > 0.0 ? scale * u * u : 0.0;
    }
    }
    return 0.0;
}

double Profile::d_t(double t, double rho) const
{
    const double q = t * t + rho * rho, w = width;
    switch (kind) {
    case ProfileKind::gaussian: return -t / (w * w) * (*this)(t, rho);
    case ProfileKind::exponential: {
        const double r = std::sqrt(q);
        return r == 0.0 ? 0.0 : -t / (w * r) * (*this)(t, rho);
    }
    case ProfileKind::bump: {
        const double u = 1.0 - q / (w * w);
        return u > 0.0 ? -4.0 * scale * u * t / (w * w) : 0.0;
    }
    }
    return 0.0;
}

double Profile::d_rho(double t, double rho) const { return d_t(rho, t); }

double Profile::static_value(double q) const
{
    const double w = width;
    switch (kind) {
    case ProfileKind::gaussian: return scale * std::sqrt(2 * std::numbers::pi) * w * std::exp(-q / (2 * w * w));
    case ProfileKind::exponential: {
        // int exp(-sqrt(t^2 + rho^2) / w) dt = 2 rho K_1(rho / w)
        const double rho = std::sqrt(q);
        if (rho == 0.0) return 2.0 * w * scale;
        if (rho / w > 700.0) return 0.0;
        return scale * 2.0 * rho * boost::math::cyl_bessel_k(1, rho / w);
    }
    case ProfileKind::bump: {
        if (q >= w * w) return 0.0;
        const double a = std::sqrt(w * w - q);
        return scale * 16.0 / 15.0 * std::pow(a, 5) / std::pow(w, 4);
    }
    }
    return 0.0;
}

double Profile::support() const { return kind == ProfileKind::bump ? width : inf; }

double mass_MR(double R, const Profile& p, double mass_s, const Tolerance& tol)
{
    if (!(R > 0.0)) throw Error(ErrorKind::schema, "mass_MR: radius must be positive");
    if (mass_s == 0.0 || p.scale == 0.0) return 0.0;
    const double supp = p.support();
    auto inner = [&](double r) {
        const double s = r - R;
        double top = 2.0 * std::sqrt(R * r);
        if (!std::isinf(supp)) {
            if (std::abs(s) >= supp) return 0.0;
            top = std::min(top, std::sqrt(supp * supp - s * s));
        }
        auto g = [&](double sigma) { return sigma * p.static_value(s * s + sigma * sigma); };
        return span(g, 0.0, top, tol, "mass_MR (sigma)");
    };
    auto outer = [&](double r) { return (r - R) * (3.0 * r - 2.0 * R) * inner(r); };
    const double lo = std::isinf(supp) ? 0.0 : std::max(0.0, R - supp);
    const double hi = std::isinf(supp) ? inf : R + supp;
    const double v = span(outer, lo, R, tol, "mass_MR (r)") + span(outer, R, hi, tol, "mass_MR (r)");
    return 0.5 * mass_s * v;
}

double mass_closed_form(const Profile& p, double mass_s, const Tolerance& tol)
{
    if (mass_s == 0.0 || p.scale == 0.0) return 0.0;
    const double supp = p.support();
    auto inner = [&](double t) {
        const double top = std::isinf(supp) ? inf : std::sqrt(std::max(0.0, supp * supp - t * t));
        auto g = [&](double rho) { return std::pow(rho, 4) * p(t, rho); };
        return span(g, 0.0, top, tol, "closed form (rho)");
    };
    // L is even in t
    return mass_s * 2.0 * span(inner, 0.0, supp, tol, "closed form (t)");
}

double constant_c(const Profile& p, const Tolerance& tol)
{
    if (p.scale == 0.0) return 0.0;
    auto g = [&](double rho) { return std::pow(rho, 4) * p.static_value(rho * rho); };
    return span(g, 0.0, p.support(), tol, "constant c");
}

AveragingReport averaging_check(const Profile& p, double R, double window, double r_min, const Tolerance& tol)
{
    if (!(window > 0.0) || !(R > r_min)) throw Error(ErrorKind::schema, "averaging: need window > 0 and R > R_min");
    const double L = window, supp = p.support();
    auto a = [&](double s) { return s * p.static_value(s * s); };
    // int_{lo}^{hi} dr' k(r, r') a(r' - r), cut to the support of a around r
    auto row = [&](double r, double lo, double hi, auto&& k) {
        if (!std::isinf(supp)) {
            lo = std::max(lo, r - supp);
            hi = std::min(hi, r + supp);
        }
        auto f = [&](double rp) { return k(r, rp) * a(rp - r); };
        // the tail map is centered at its lower end, so start it at the peak
        if (std::isinf(hi) && r > lo)
            return span(f, lo, r, tol, "averaging (r')") + span(f, r, hi, tol, "averaging (r')");
        return span(f, lo, hi, tol, "averaging (r')");
    };
    auto one = [](double, double) { return 1.0; };
    AveragingReport rep;
    rep.lhs = span([&](double r) { return row(r, R, inf, one); }, r_min, R, tol, "averaging (r)");
    rep.t1 = span([&](double r) { return row(r, R, R + L, [&](double, double rp) { return rp - R; }); }, r_min, R,
                  tol, "averaging (r)") / L;
    rep.t2 = span([&](double r) { return row(r, R + L, inf, [&](double, double) { return L; }); }, r_min, R, tol,
                  "averaging (r)") / L;
    rep.t3 = span([&](double r) { return row(r, r, R + L, [](double x, double rp) { return rp - x; }); }, R, R + L,
                  tol, "averaging (r)") / L;
    rep.t4 = span([&](double r) { return row(r, R + L, inf, [&](double x, double) { return L - x + R; }); }, R,
                  R + L, tol, "averaging (r)") / L;
    rep.full = span([&](double r) { return row(r, r_min, inf, [](double x, double rp) { return rp - x; }); }, R,
                    R + L, tol, "averaging (r)") / (2.0 * L);
    rep.gap = std::abs(rep.lhs - rep.t3);
    rep.full_gap = std::abs(rep.lhs - rep.full);
    rep.split_gap = std::abs(rep.lhs - (rep.t1 + rep.t2 + rep.t3 + rep.t4));
    return rep;
}

double averaging_exponent(const Profile& p, double R, const std::vector<double>& windows, double r_min)
{
    if (windows.size() < 2) throw Error(ErrorKind::schema, "averaging: need at least two windows");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(windows.size());
    for (double L : windows) {
        const double g = averaging_check(p, R, L, r_min).gap;
        if (!(g > 0.0)) throw Error(ErrorKind::invariant, "averaging: gap vanished, no decay to fit");
        const double x = std::log(L), y = std::log(g);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Mat4 minkowski() { return Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal(); }

double MetricPerturbation::phi(const Vec3& z) const
{
    const double r = (z - center).norm() / radius;
    if (r >= 1.0) return 0.0;
    switch (shape) {
    case Shape::indicator: return 1.0;
    case Shape::smooth: return std::exp(1.0 - 1.0 / (1.0 - r * r));
    case Shape::bump: return (1.0 - r * r) * (1.0 - r * r);
    }
    return 0.0;
}

bool MetricPerturbation::symmetric(double tol) const
{
    const Mat4 low = minkowski() * tensor;
    return (low - low.transpose()).cwiseAbs().maxCoeff() <= tol * std::max(1.0, low.cwiseAbs().maxCoeff());
}

LineShifts d12p_line_integrals(const Vec4& x, const Vec4& y, const MetricPerturbation& h, const Tolerance& tol)
{
    LineShifts out;
    const Vec4 xi = y - x;
    const Vec3 xs = x.tail<3>(), ds = xi.tail<3>();
    // alpha with |xs + alpha ds - c| < radius
    const Vec3 d0 = xs - h.center;
    const double qa = ds.squaredNorm(), qb = 2.0 * d0.dot(ds), qc = d0.squaredNorm() - h.radius * h.radius;
    if (qa == 0.0) {
        if (qc < 0.0 && h.tensor.cwiseAbs().maxCoeff() > 0.0)
            throw Error(ErrorKind::invariant, "d12p: the line stays inside the support, integral unbounded");
        return out;
    }
    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc <= 0.0) return out;
    const double sq = std::sqrt(disc);
    const double lo = (-qb - sq) / (2.0 * qa), hi = (-qb + sq) / (2.0 * qa);
    out.alpha_lo = lo;
    out.alpha_hi = hi;
    auto piece = [&](double a, double b) {
        Vec4 v = Vec4::Zero();
        a = std::max(a, lo);
        b = std::min(b, hi);
        if (!(b > a)) return v;
        for (int c = 0; c < 4; ++c) {
            auto f = [&](double al) { return h.phi(xs + al * ds) * h.tensor.row(c).dot(xi); };
            if (h.tensor.row(c).dot(xi) == 0.0) continue;
            v(c) = span(f, a, b, tol, "d12p line");
        }
        return v;
    };
    const Vec4 neg = piece(-inf, 0.0), mid = piece(0.0, 1.0), pos = piece(1.0, inf);
    // eps(alpha): -1 below 0; eps(alpha - 1): -1 below 1
    out.v1 = 0.25 * (mid + pos - neg);
    out.v2 = 0.25 * (pos - mid - neg);
    out.bounded = 0.5 * mid;
    return out;
}

JScalars j_scalars(const Profile& p, double r0, const Tolerance& tol)
{
    if (!(r0 > 0.0)) throw Error(ErrorKind::schema, "J: boundary distance must be positive");
    const double supp = p.support();
    auto half = [&](double beta) { return std::isinf(supp) ? inf : std::sqrt(std::max(0.0, supp * supp - beta * beta)); };
    auto outer = [&](auto&& g) {
        auto f = [&](double beta) { return beta * std::min(beta, r0) * g(beta); };
        const double top = std::min(r0, supp);
        return span(f, 0.0, top, tol, "J (beta)") + span(f, r0, supp, tol, "J (beta)");
    };
    JScalars s;
    s.tt = outer([&](double b) { return line([&](double t) { return t * p.d_t(t, b); }, half(b), tol, "J (xi0)"); });
    s.trho = outer([&](double b) { return line([&](double t) { return t * p.d_rho(t, b); }, half(b), tol, "J (xi0)"); });
    s.rhot = outer([&](double b) { return line([&](double t) { return b * p.d_t(t, b); }, half(b), tol, "J (xi0)"); });
    s.rhorho =
        outer([&](double b) { return line([&](double t) { return b * p.d_rho(t, b); }, half(b), tol, "J (xi0)"); });
    return s;
}

Mat4 j_tensor(const JScalars& s, const Vec3& zeta)
{
    Mat4 J;
    J(0, 0) = -s.tt;
    for (int k = 0; k < 3; ++k) {
        J(0, k + 1) = -s.trho * zeta(k);
        J(k + 1, 0) = -s.rhot * zeta(k);
        for (int j = 0; j < 3; ++j) J(k + 1, j + 1) = -s.rhorho * zeta(k) * zeta(j);
    }
    return J;
}

JStructure j_structure(const Profile& p, double r0, const Vec3& zeta, const Tolerance& tol)
{
    JStructure r;
    const Vec3 u = zeta.normalized();
    r.J = j_tensor(j_scalars(p, r0, tol), u);
    r.c = r.J(0, 0);
    Vec4 e0 = Vec4::Zero(), z4 = Vec4::Zero();
    e0(0) = 1.0;
    z4.tail<3>() = u;
    const Mat4 pattern = e0 * e0.transpose() + 3.0 * z4 * z4.transpose();
    r.off_pattern = (r.J - r.c * pattern).cwiseAbs().maxCoeff();
    r.norm = r.J.cwiseAbs().maxCoeff();
    return r;
}

std::vector<JScalars> j_scalars_batch(const Profile& p, const std::vector<double>& r0, const Tolerance& tol)
{
    // S(r0) = int_0^r0 beta^2 G + r0 int_r0^inf beta G with G independent of r0:
    // integrate between consecutive sorted r0 and accumulate.
    std::vector<double> knots(r0);
    for (double r : knots)
        if (!(r > 0.0)) throw Error(ErrorKind::schema, "J: boundary distance must be positive");
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());
    const int n = static_cast<int>(knots.size());
    const double supp = p.support();
    auto half = [&](double beta) { return std::isinf(supp) ? inf : std::sqrt(std::max(0.0, supp * supp - beta * beta)); };
    using G = std::function<double(double, double)>;
    const std::array<G, 4> kernels = {
        G([&](double t, double b) { return t * p.d_t(t, b); }), G([&](double t, double b) { return t * p.d_rho(t, b); }),
        G([&](double t, double b) { return b * p.d_t(t, b); }), G([&](double t, double b) { return b * p.d_rho(t, b); })};
    auto g = [&](int c, double beta) {
        return line([&](double t) { return kernels[c](t, beta); }, half(beta), tol, "J (xi0)");
    };
    // per kernel: a[k] = int_{knot k-1}^{knot k} beta^2 G, b[k] = same with beta, b[n] = tail
    std::vector<std::array<double, 4>> a(n), b(n + 1);
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 1)
    for (int k = 0; k <= n; ++k) {
        try {
            const double lo = k == 0 ? 0.0 : knots[k - 1], hi = k == n ? inf : knots[k];
            const double l = std::min(lo, supp), h = std::min(hi, supp);
            for (int c = 0; c < 4; ++c) {
                b[k][c] = span([&](double x) { return x * g(c, x); }, l, h, tol, "J (beta)");
                if (k < n) a[k][c] = span([&](double x) { return x * x * g(c, x); }, l, h, tol, "J (beta)");
            }
        } catch (...) {
#pragma omp critical(cvp_jbatch_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
    std::vector<std::array<double, 4>> S(n);
    std::array<double, 4> inner{}, tail = b[n];
    for (int k = 0; k < n; ++k)
        for (int c = 0; c < 4; ++c) inner[c] += a[k][c], S[k][c] = inner[c];
    for (int k = n - 1; k >= 0; --k)
        for (int c = 0; c < 4; ++c) {
            S[k][c] += knots[k] * tail[c];
            tail[c] += b[k][c];
        }
    std::vector<JScalars> out;
    out.reserve(r0.size());
    for (double r : r0) {
        const auto& v = S[std::lower_bound(knots.begin(), knots.end(), r) - knots.begin()];
        out.push_back({v[0], v[1], v[2], v[3]});
    }
    return out;
}

TraceFreeReport tracefree_vanishing(const MetricPerturbation& h, const Profile& p, double omega_radius,
                                    const TraceFreeGrid& grid, const Tolerance& tol)
{
    if (!h.symmetric()) throw Error(ErrorKind::invariant, "tracefree: perturbation is not symmetric");
    if (h.center.norm() + h.radius >= omega_radius)
        throw Error(ErrorKind::invariant, "tracefree: support of h must lie inside Omega");
    TraceFreeReport rep;
    rep.trace = h.trace();
    if (h.tensor.cwiseAbs().maxCoeff() == 0.0 || p.scale == 0.0) return rep;
    const quad::GaussLegendre gr(grid.z_radial), gp(grid.z_polar), sp(grid.sphere_polar);
    const double pi = std::numbers::pi;
    std::vector<Vec3> zetas;
    std::vector<double> zw;
    for (int a = 0; a < grid.sphere_polar; ++a)
        for (int b = 0; b < grid.sphere_azimuth; ++b) {
            const double ct = sp.x[a], st = std::sqrt(1.0 - ct * ct), ph = 2 * pi * b / grid.sphere_azimuth;
            zetas.emplace_back(st * std::cos(ph), st * std::sin(ph), ct);
            zw.push_back(sp.w[a] * 2 * pi / grid.sphere_azimuth);
        }
    // ball nodes about the center of h
    std::vector<Vec3> zs;
    std::vector<double> wz;
    for (int i = 0; i < grid.z_radial; ++i) {
        const double r = 0.5 * h.radius * (gr.x[i] + 1.0), wr = 0.5 * h.radius * gr.w[i] * r * r;
        for (int a = 0; a < grid.z_polar; ++a)
            for (int b = 0; b < grid.z_azimuth; ++b) {
                const double ct = gp.x[a], st = std::sqrt(1.0 - ct * ct), ph = 2 * pi * b / grid.z_azimuth;
                zs.push_back(h.center + r * Vec3(st * std::cos(ph), st * std::sin(ph), ct));
                wz.push_back(wr * gp.w[a] * 2 * pi / grid.z_azimuth);
            }
    }
    const std::size_t nz = zs.size(), ns = zetas.size();
    std::vector<double> r0(nz * ns);
    for (std::size_t q = 0; q < nz; ++q)
        for (std::size_t k = 0; k < ns; ++k) {
            const double zd = zs[q].dot(zetas[k]);
            r0[q * ns + k] = -zd + std::sqrt(zd * zd + omega_radius * omega_radius - zs[q].squaredNorm());
        }
    const auto js = j_scalars_batch(p, r0, tol);
    for (std::size_t q = 0; q < nz; ++q) {
        const Mat4 hz = h.at(zs[q]);
        double acc = 0.0;
        for (std::size_t k = 0; k < ns; ++k) acc += zw[k] * (hz * j_tensor(js[q * ns + k], zetas[k])).trace();
        rep.integral += wz[q] * acc;
    }
    rep.min_r0 = *std::min_element(r0.begin(), r0.end());
    rep.j_evaluations = static_cast<int>(r0.size());
    return rep;
}

} // namespace cvp::schw
