#include "cvp/static.hpp"
#include "cvp/numeric.hpp"
#include "cvp/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace cvp {

StaticGroup StaticGroup::from_generator(const Mat& h)
{
    if (h.rows() != h.cols() || h.rows() == 0) throw Error(ErrorKind::schema, "generator: matrix is not square");
    const double scale = std::max(op_norm(h), 1e-300);
    if (herm_defect(h) > 1e-9 * scale) throw Error(ErrorKind::invariant, "generator: matrix is not Hermitian");
    StaticGroup g;
    g.generator = hermitian_part(h);
    Eigen::SelfAdjointEigenSolver<Mat> es(g.generator);
    g.basis = es.eigenvectors();
    g.freq = es.eigenvalues();

    const double tol = 1e-9 * scale;
    std::vector<double> gaps;
    for (int k = 1; k < g.freq.size(); ++k) {
        double d = g.freq(k) - g.freq(0);
        if (d > tol) gaps.push_back(d);
    }
    if (gaps.empty()) {
        g.central = true;
        return g;
    }
    const double dmin = *std::min_element(gaps.begin(), gaps.end());
    for (int m = 1; m <= 32 && g.period == 0.0; ++m) {
        const double w0 = dmin / m;
        bool ok = true;
        for (double d : gaps) {
            double q = d / w0;
            if (std::abs(q - std::round(q)) > 1e-9 * std::max(1.0, q)) {
                ok = false;
                break;
            }
        }
        if (ok) g.period = 2.0 * std::numbers::pi / w0;
    }
    return g;
}

Mat StaticGroup::unitary(double t) const
{
    CVec ph(freq.size());
    for (int k = 0; k < freq.size(); ++k) ph(k) = std::exp(cplx(0.0, -freq(k) * t));
    return basis * ph.asDiagonal() * basis.adjoint();
}

Mat rotate_in(const Mat& x, const StaticGroup& g) { return g.basis.adjoint() * x * g.basis; }

OrbitFrame orbit_frame(const OperatorPoint& p, const StaticGroup& g)
{
    if (p.dim() != g.dim()) throw Error(ErrorKind::schema, "static: dimension mismatch between point and generator");
    return {rotate_in(p.matrix, g), g.basis.adjoint() * p.range, p.range_eigs};
}

OperatorPoint orbit_point(const OperatorPoint& x, double t, const StaticGroup& g, const KernelSpec& spec)
{
    if (!std::isfinite(t)) throw Error(ErrorKind::invariant, "orbit: time must be finite");
    if (x.dim() != g.dim()) throw Error(ErrorKind::schema, "orbit: dimension mismatch");
    Mat u = g.unitary(t);
    OperatorPoint p;
    p.matrix = hermitian_part(u * x.matrix * u.adjoint());
    p.spectrum = x.spectrum;
    p.range = u * x.range;
    p.range_eigs = x.range_eigs;
    (void)spec;
    return p;
}

namespace {

struct Sample {
    double L = 0.0, T = 0.0;
    double ind[2] = {0.0, 0.0};
};

// t -> L(x, U_t y U_t^{-1}) evaluated through the 2n x 2n compression.
class Integrand {
public:
    Integrand(const Mat& xr, const OrbitFrame& y, const Model& m)
        : xr_(xr), y_(y), freq_(m.group.freq), n_(m.kernel.spin_dimension)
    {
        for (int a = 0; a < y.lam.size(); ++a)
            if (y.lam(a) != 0.0) active_.push_back(a);
        qt_.resize(y.q.rows(), y.q.cols());
    }

    Sample eval(double t) { return eval_impl(t, nullptr, nullptr, 0.0, 0.0); }

    Sample eval_grad(double t, Mat& gl, Mat& gt, double wl, double wt) { return eval_impl(t, &gl, &gt, wl, wt); }

private:
    void compress(double t)
    {
        for (int k = 0; k < freq_.size(); ++k) qt_.row(k) = std::exp(cplx(0.0, -freq_(k) * t)) * y_.q.row(k);
        b_.noalias() = qt_.adjoint() * (xr_ * qt_);
    }

    Sample eval_impl(double t, Mat* gl, Mat* gt, double wl, double wt)
    {
        compress(t);
        Sample s;
        if (n_ == 1) {
            const double l0 = y_.lam(0), l1 = y_.lam(1);
            const double tr = l0 * b_(0, 0).real() + l1 * b_(1, 1).real();
            const double detb = (b_(0, 0) * b_(1, 1)).real() - std::norm(b_(0, 1));
            const double det = l0 * l1 * detb;
            TwoByTwo r = lagrangian_2x2(tr, det);
            s.L = r.L;
            s.T = r.T;
            s.ind[0] = det;
            s.ind[1] = tr * tr - 4.0 * det;
            if (gl) {
                Mat adj(2, 2);
                adj << b_(1, 1), -b_(0, 1), -b_(1, 0), b_(0, 0);
                Mat lam = Mat::Zero(2, 2);
                lam(0, 0) = l0;
                lam(1, 1) = l1;
                Mat gam_l = r.L_tr * lam + (r.L_det * l0 * l1) * adj;
                Mat gam_t = r.T_tr * lam + (r.T_det * l0 * l1) * adj;
                gl->noalias() += wl * (qt_ * gam_l * qt_.adjoint());
                gt->noalias() += wt * (qt_ * gam_t * qt_.adjoint());
            }
            return s;
        }
        const int na = static_cast<int>(active_.size());
        const int m = 2 * n_;
        SpectralData ev(m, cplx(0.0, 0.0));
        Mat ma(na, na);
        for (int i = 0; i < na; ++i)
            for (int j = 0; j < na; ++j) ma(i, j) = y_.lam(active_[i]) * b_(active_[i], active_[j]);
        Eigen::ComplexEigenSolver<Mat> ces;
        if (na > 0) {
            ces.compute(ma, gl != nullptr);
            if (ces.info() != Eigen::Success) throw Error(ErrorKind::convergence, "static: eigensolver did not converge");
            for (int i = 0; i < na; ++i) ev[i] = ces.eigenvalues()(i);
        }
        s.L = lagrangian_from_spectrum(ev);
        s.T = weight_sq_from_spectrum(ev);
        cplx det = 1.0, disc = 1.0;
        for (int i = 0; i < na; ++i) {
            det *= ev[i];
            for (int j = i + 1; j < na; ++j) disc *= (ev[i] - ev[j]) * (ev[i] - ev[j]);
        }
        s.ind[0] = na > 0 ? det.real() : 0.0;
        s.ind[1] = na > 1 ? disc.real() : 0.0;
        if (gl && na > 0) {
            std::vector<double> a(m);
            double sum_a = 0.0;
            for (int i = 0; i < m; ++i) {
                a[i] = std::abs(ev[i]);
                sum_a += a[i];
            }
            const Mat& r = ces.eigenvectors();
            Mat rinv = r.inverse();
            Mat gam_l = Mat::Zero(na, na), gam_t = Mat::Zero(na, na);
            for (int i = 0; i < na; ++i) {
                if (a[i] == 0.0) continue;
                double cl = 0.0;
                for (int j = 0; j < m; ++j) cl += a[i] - a[j];
                cl /= n_;
                const double ct = 2.0 * sum_a;
                cplx ph = std::conj(ev[i]) / a[i];
                Mat outer = r.col(i) * rinv.row(i);
                gam_l += (cl * ph) * outer;
                gam_t += (ct * ph) * outer;
            }
            Mat lam_a = Mat::Zero(na, na);
            for (int i = 0; i < na; ++i) lam_a(i, i) = y_.lam(active_[i]);
            gam_l = gam_l * lam_a;
            gam_t = gam_t * lam_a;
            Mat full_l = Mat::Zero(m, m), full_t = Mat::Zero(m, m);
            for (int i = 0; i < na; ++i)
                for (int j = 0; j < na; ++j) {
                    full_l(active_[i], active_[j]) = gam_l(i, j);
                    full_t(active_[i], active_[j]) = gam_t(i, j);
                }
            gl->noalias() += wl * hermitian_part(qt_ * full_l * qt_.adjoint());
            gt->noalias() += wt * hermitian_part(qt_ * full_t * qt_.adjoint());
        }
        return s;
    }

    const Mat& xr_;
    const OrbitFrame& y_;
    const RVec& freq_;
    int n_;
    std::vector<int> active_;
    Mat qt_, b_;
};

struct PanelSum {
    double L = 0.0, T = 0.0, err = 0.0;
    void operator+=(const PanelSum& o)
    {
        L += o.L;
        T += o.T;
        err += o.err;
    }
};

constexpr int kSamplesPerPanel = 4;

// Integrates pieces between kinks with G7K15 and bisects where the Kronrod and
// Gauss sums disagree. The kinks are sign changes of the indicator functions,
// i.e. the points where an eigenvalue modulus is not smooth.
template <bool Grad>
class PanelIntegrator {
public:
    PanelIntegrator(Integrand& f, double floor_density, const QuadratureSpec& q, int f_dim)
        : f_(f), floor_(floor_density), rel_(q.rel_tol), max_depth_(q.max_depth)
    {
        if (Grad) {
            bl_.assign(max_depth_ + 1, Mat::Zero(f_dim, f_dim));
            bt_.assign(max_depth_ + 1, Mat::Zero(f_dim, f_dim));
        }
    }

    // [a, b] with indicator samples at ns + 1 equally spaced points
    PanelSum segment(double a, double b, const Sample* smp, int ns, int depth, Mat* ol, Mat* ot)
    {
        std::vector<double> cuts{a};
        const double h = (b - a) / ns;
        for (int k = 0; k < ns; ++k) {
            const double lo = a + k * h, hi = (k + 1 == ns) ? b : a + (k + 1) * h;
            for (int c = 0; c < 2; ++c) {
                const double fa = smp[k].ind[c], fb = smp[k + 1].ind[c];
                if (!((fa < 0.0 && fb > 0.0) || (fa > 0.0 && fb < 0.0))) continue;
                auto g = [&](double t) { return f_.eval(t).ind[c]; };
                boost::uintmax_t iters = 100;
                auto root = boost::math::tools::toms748_solve(g, lo, hi, fa, fb,
                                                              boost::math::tools::eps_tolerance<double>(52), iters);
                cuts.push_back(0.5 * (root.first + root.second));
            }
        }
        cuts.push_back(b);
        std::sort(cuts.begin(), cuts.end());
        PanelSum out;
        for (std::size_t p = 0; p + 1 < cuts.size(); ++p)
            if (cuts[p + 1] > cuts[p]) out += piece(cuts[p], cuts[p + 1], depth, ol, ot);
        return out;
    }

private:
    PanelSum piece(double a, double b, int depth, Mat* ol, Mat* ot)
    {
        Mat* ql = nullptr;
        Mat* qt = nullptr;
        if (Grad) {
            ql = &bl_[depth];
            qt = &bt_[depth];
            ql->setZero();
            qt->setZero();
        }
        PanelSum r = rule(a, b, ql, qt);
        const double target = rel_ * std::max(std::abs(r.L) + std::abs(r.T), floor_ * (b - a));
        if (r.err <= target || depth >= max_depth_) {
            if (Grad) {
                *ol += *ql;
                *ot += *qt;
            }
            return r;
        }
        const double m = 0.5 * (a + b);
        const Sample sm[3] = {f_.eval(a), f_.eval(m), f_.eval(b)};
        PanelSum out = segment(a, m, &sm[0], 1, depth + 1, ol, ot);
        out += segment(m, b, &sm[1], 1, depth + 1, ol, ot);
        return out;
    }

    PanelSum rule(double a, double b, Mat* ql, Mat* qt)
    {
        const double c = 0.5 * (a + b), hw = 0.5 * (b - a);
        double kl = 0.0, kt = 0.0, gl7 = 0.0, gt7 = 0.0;
        double vl[15], vt[15], wk[15];
        int n = 0;
        auto node = [&](double t, double w, double wg) {
            Sample s = Grad ? f_.eval_grad(t, *ql, *qt, w * hw, w * hw) : f_.eval(t);
            kl += w * s.L;
            kt += w * s.T;
            gl7 += wg * s.L;
            gt7 += wg * s.T;
            vl[n] = s.L;
            vt[n] = s.T;
            wk[n++] = w;
        };
        node(c, quad::kronrod_w[7], quad::gauss_w[3]);
        for (int i = 0; i < 7; ++i) {
            const double d = hw * quad::kronrod_x[i];
            const double wg = (i % 2 == 1) ? quad::gauss_w[i / 2] : 0.0;
            node(c - d, quad::kronrod_w[i], wg);
            node(c + d, quad::kronrod_w[i], wg);
        }
        // QUADPACK style scaling of |K - G|
        auto scaled = [&](const double* v, double k, double g) {
            double asc = 0.0;
            for (int i = 0; i < 15; ++i) asc += wk[i] * std::abs(v[i] - 0.5 * k);
            asc *= hw;
            double e = std::abs(k - g) * hw;
            if (asc != 0.0 && e != 0.0) e = asc * std::min(1.0, std::pow(200.0 * e / asc, 1.5));
            return e;
        };
        return {kl * hw, kt * hw, scaled(vl, kl, gl7) + scaled(vt, kt, gt7)};
    }

    Integrand& f_;
    double floor_, rel_;
    int max_depth_;
    std::vector<Mat> bl_, bt_;
};

template <bool Grad>
StaticValue integrate_orbit(const Mat& x_rot, const OrbitFrame& y, const Model& m, Mat* gl, Mat* gt)
{
    const StaticGroup& g = m.group;
    if (g.central)
        throw Error(ErrorKind::convergence,
                    "static: central generator, the orbit integrand is constant and the time integral diverges");
    if (x_rot.rows() != y.q.rows()) throw Error(ErrorKind::schema, "static: dimension mismatch");
    const int panels = m.quad.node_count;
    if (panels < 3) throw Error(ErrorKind::schema, "static: node_count must be at least 3");
    const bool periodic = g.period > 0.0;
    const double half = periodic ? 0.5 * g.period : m.quad.half_width;

    Integrand f(x_rot, y, m);
    const int ng = panels * kSamplesPerPanel + 1;
    std::vector<Sample> grid(ng);
    const double step = 2.0 * half / (ng - 1);
    for (int k = 0; k < ng; ++k) grid[k] = f.eval(-half + k * step);

    double density = 0.0;
    for (const Sample& q : grid) density += std::abs(q.L) + std::abs(q.T);
    density /= ng;
    PanelIntegrator<Grad> pi(f, density, m.quad, static_cast<int>(x_rot.rows()));

    std::vector<double> pl(panels), pt(panels), pe(panels);
    for (int p = 0; p < panels; ++p) {
        const double lo = -half + p * kSamplesPerPanel * step;
        const double hi = (p + 1 == panels) ? half : -half + (p + 1) * kSamplesPerPanel * step;
        PanelSum s = pi.segment(lo, hi, &grid[p * kSamplesPerPanel], kSamplesPerPanel, 0, gl, gt);
        pl[p] = s.L;
        pt[p] = s.T;
        pe[p] = s.err;
    }
    StaticValue v;
    v.lagrangian = std::max(pairwise_sum(pl), 0.0);
    v.boundedness = std::max(pairwise_sum(pt), 0.0);
    v.error = pairwise_sum(pe);
    if (!periodic) {
        // geometric extrapolation from the two outermost panels; panels at
        // rounding level count as converged
        const double floor = 1e-15 * (v.lagrangian + v.boundedness);
        auto tail_of = [floor](double last, double prev) {
            last = std::abs(last);
            prev = std::abs(prev);
            if (last <= floor) return last;
            if (last >= prev) return std::numeric_limits<double>::infinity();
            const double r = last / prev;
            return last * r / (1.0 - r);
        };
        v.tail = tail_of(pl[0], pl[1]) + tail_of(pl[panels - 1], pl[panels - 2]) + tail_of(pt[0], pt[1]) +
                 tail_of(pt[panels - 1], pt[panels - 2]);
        const double scale = v.lagrangian + v.boundedness;
        if (!(v.tail <= m.quad.tail_tolerance * scale))
            throw Error(ErrorKind::convergence,
                        "static: tail tolerance not met, the orbit integrand does not decay within the window");
    }
    return v;
}

} // namespace

StaticValue static_pair_rotated(const Mat& x_rot, const OrbitFrame& y, const Model& m)
{
    return integrate_orbit<false>(x_rot, y, m, nullptr, nullptr);
}

StaticGradient static_pair_gradient(const Mat& x_rot, const OrbitFrame& y, const Model& m)
{
    const int f = static_cast<int>(x_rot.rows());
    Mat gl = Mat::Zero(f, f), gt = Mat::Zero(f, f);
    StaticGradient r;
    r.value = integrate_orbit<true>(x_rot, y, m, &gl, &gt);
    const Mat& v = m.group.basis;
    r.d_lagrangian = hermitian_part(v * gl * v.adjoint());
    r.d_boundedness = hermitian_part(v * gt * v.adjoint());
    return r;
}

StaticValue static_pair(const OperatorPoint& x, const OperatorPoint& y, const Model& m)
{
    return static_pair_rotated(rotate_in(x.matrix, m.group), orbit_frame(y, m.group), m);
}

double static_lagrangian(const OperatorPoint& x, const OperatorPoint& y, const StaticGroup& g, const QuadratureSpec& q,
                         const KernelSpec& spec)
{
    return static_pair(x, y, Model{spec, g, q}).lagrangian;
}

double static_boundedness(const OperatorPoint& x, const OperatorPoint& y, const StaticGroup& g,
                          const QuadratureSpec& q, const KernelSpec& spec)
{
    return static_pair(x, y, Model{spec, g, q}).boundedness;
}

double static_kappa_lagrangian(const OperatorPoint& x, const OperatorPoint& y, const StaticGroup& g,
                               const QuadratureSpec& q, const KernelSpec& spec, double kappa)
{
    return static_pair(x, y, Model{spec, g, q}).kappa(kappa);
}

} // namespace cvp
