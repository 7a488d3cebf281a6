#include "cvp/lingrav.hpp"
#include "cvp/build.hpp"
#include "cvp/numeric.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

namespace cvp {

EllInfinity estimate_ell_infinity(const StaticSystem& s, const Exhaustion& e, double outer, int shells)
{
    check_exhaustion(s, e);
    if (!(outer > 0.0 && outer <= 1.0) || shells < 1) throw Error(ErrorKind::schema, "ell_inf: bad shell parameters");
    const RVec l = ell_values(s, self_table(s));
    const double vol = s.measure.volume();
    EllInfinity r;
    // equal-volume shells, the last `outer` of the volume split into `shells` pieces
    const double width = outer * vol / shells;
    RVec prev = membership(s, e, vol - outer * vol);
    for (int k = 1; k <= shells; ++k) {
        const RVec m = membership(s, e, vol - outer * vol + k * width);
        std::vector<double> num(s.size()), den(s.size());
        for (int i = 0; i < s.size(); ++i) {
            const double d = (m(i) - prev(i)) * s.weight(i);
            num[i] = d * l(i);
            den[i] = d;
        }
        const double dd = pairwise_sum(den);
        r.shells.push_back(dd > 0.0 ? pairwise_sum(num) / dd : 0.0);
        prev = m;
    }
    // whole outer region
    {
        const RVec in = membership(s, e, vol - outer * vol);
        std::vector<double> num(s.size()), den(s.size());
        for (int i = 0; i < s.size(); ++i) {
            const double d = (1.0 - in(i)) * s.weight(i);
            num[i] = d * l(i);
            den[i] = d;
        }
        r.value = pairwise_sum(num) / pairwise_sum(den);
    }
    if (r.shells.size() >= 2) r.drift = std::abs(r.shells.back() - r.shells[r.shells.size() - 2]);
    return r;
}

double compatible_ell_infinity(const StaticSystem& s)
{
    const RVec l = ell_values(s, self_table(s));
    std::vector<double> buf(s.size());
    for (int i = 0; i < s.size(); ++i) buf[i] = s.weight(i) * l(i);
    return pairwise_sum(buf) / s.measure.volume();
}

std::vector<Jet> solution_basis(const StaticSystem& s, const std::vector<int>& exclude)
{
    std::vector<Jet> out;
    const int n = s.size(), f = s.model.group.dim();
    const RVec skip = membership_of(n, exclude);
    for (int i = 0; i < n; ++i)
        if (skip(i) == 0.0)
            for (const Mat& b : tangent_basis(s.point(i), s.model.kernel))
            out.push_back(direction_jet(n, f, i, b * op_norm(s.point(i).matrix)));
    return out;
}

LinGravSystem assemble_lingrav(const StaticSystem& s, double ell_infinity, const std::vector<Jet>& basis,
                               const FDScheme& fd, Exec exec)
{
    check_system(s);
    const int n = s.size();
    LinGravSystem sys;
    sys.ell_infinity = ell_infinity;
    sys.basis = basis;
    sys.matrix = RMat::Zero(n, static_cast<int>(basis.size()));
    const PairTable t = self_table(s, exec);
    sys.rhs = -(ell_values(s, t).array() - ell_infinity).matrix();
    std::vector<double> buf(n);
    for (std::size_t c = 0; c < basis.size(); ++c) {
        const Jet& b = basis[c];
        if (b.scalars.cwiseAbs().maxCoeff() != 0.0)
            throw Error(ErrorKind::schema, "lingrav: solution jets carry no scalar component");
        const JetTable jt = jet_table(s, b, fd, exec);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) buf[j] = s.weight(j) * (jt.G(i, j) + jt.G(j, i));
            sys.matrix(i, static_cast<int>(c)) = pairwise_sum(buf);
        }
    }
    sys.regularization = sys.matrix.size() ? 1e-10 * sys.matrix.cwiseAbs().maxCoeff() : 0.0;
    return sys;
}

LinGravSolution solve_lingrav(const LinGravSystem& sys, double ridge)
{
    const RMat& A = sys.matrix;
    LinGravSolution out;
    out.columns = static_cast<int>(A.cols());
    out.rhs_norm = sys.rhs.norm();
    const double amax = A.size() ? A.cwiseAbs().maxCoeff() : 0.0;
    const double lam = ridge >= 0.0 ? ridge : (sys.regularization > 0.0 ? sys.regularization : 1e-10 * amax);
    out.coefficients = RVec::Zero(A.cols());
    if (A.size() && amax > 0.0) {
        Eigen::BDCSVD<RMat> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const RVec& sv = svd.singularValues();
        const RVec ub = svd.matrixU().transpose() * sys.rhs;
        RVec y(sv.size());
        for (int k = 0; k < sv.size(); ++k) {
            y(k) = sv(k) / (sv(k) * sv(k) + lam * lam) * ub(k);
            if (sv(k) > lam) ++out.rank;
        }
        out.coefficients = svd.matrixV() * y;
    }
    out.residual = A * out.coefficients - sys.rhs;
    out.residual_norm = out.residual.norm();
    out.relative = out.rhs_norm > 0.0 ? out.residual_norm / out.rhs_norm : out.residual_norm;
    if (!sys.basis.empty()) {
        out.v = 0.0 * sys.basis[0];
        for (std::size_t c = 0; c < sys.basis.size(); ++c)
            if (out.coefficients(c) != 0.0) out.v = out.v + out.coefficients(c) * sys.basis[c];
    }
    return out;
}

LinGravSolution solve_lingrav(const StaticSystem& s, double ell_infinity, const FDScheme& fd)
{
    LinGravSolution r = solve_lingrav(assemble_lingrav(s, ell_infinity, solution_basis(s, s.inner_region), fd));
    if (r.columns == 0) r.v = zero_jet(s.size(), s.model.group.dim());
    return r;
}

InhomReport prposinhom_check(const StaticSystem& s, const Jet& v, const Exhaustion& e, double ell_infinity,
                             const FDScheme& fd)
{
    check_exhaustion(s, e);
    check_jet(v, s);
    const int n = s.size();
    const PairTable k = self_table(s);
    const JetTable t = jet_table(s, v, fd);
    const RVec l = ell_values(s, k);
    const RVec dl = weighted_rows(t.G, s.measure.weights);
    const RVec r = linearized_residual(s, v, t, k);
    InhomReport rep;
    rep.fd_tolerance = fd_tolerance(s, k, t, fd);
    for (int i = 0; i < n; ++i) rep.residual = std::max(rep.residual, std::abs(r(i) + l(i) - ell_infinity));
    std::vector<double> a(n), b(n);
    for (double vol : e.cut_points) {
        const RVec om = membership(s, e, vol);
        for (int i = 0; i < n; ++i) {
            a[i] = om(i) * s.weight(i) * (l(i) - ell_infinity);
            b[i] = om(i) * s.weight(i) * 2.0 * dl(i);
        }
        rep.volumes.push_back(vol);
        rep.gamma.push_back(gamma_sli(s, om, v, t, k));
        rep.ell_sum.push_back(pairwise_sum(a));
        rep.el_term.push_back(pairwise_sum(b));
        rep.gap.push_back(std::abs(rep.gamma.back() - rep.ell_sum.back()));
        rep.bound.push_back(rep.residual * volume_of(s, om) + 10.0 * rep.fd_tolerance);
        rep.max_gap = std::max(rep.max_gap, rep.gap.back());
        if (rep.gap.back() > rep.bound.back()) rep.within_bound = false;
    }
    return rep;
}

double mass_identity(const StaticSystem& s, double g, double ell_infinity)
{
    const RVec l = ell_values(s, self_table(s));
    std::vector<double> buf(s.size());
    for (int i = 0; i < s.size(); ++i) buf[i] = s.weight(i) * (l(i) - ell_infinity);
    return g * pairwise_sum(buf);
}

LocalEnergy local_energy_check(const StaticSystem& s, double ell_infinity, double tolerance)
{
    LocalEnergy r;
    if (s.size() == 0) return r;
    const RVec l = ell_values(s, self_table(s));
    r.margin = l(0) - ell_infinity;
    for (int i = 1; i < s.size(); ++i)
        if (l(i) - ell_infinity < r.margin) {
            r.margin = l(i) - ell_infinity;
            r.argmin = i;
        }
    r.holds = r.margin >= -tolerance;
    return r;
}

Family sample_family(const StaticSystem& s, const std::function<Mat(double, const Mat&)>& map, double h)
{
    Family f;
    f.h = h;
    for (int k = 0; k < 2; ++k) {
        const double t = h / (1 << k);
        f.minus.push_back(pushforward([&](const Mat& x) { return map(-t, x); }, s));
        f.plus.push_back(pushforward([&](const Mat& x) { return map(t, x); }, s));
    }
    return f;
}

namespace {

Jet central_difference(const StaticSystem& s, const Family& f, int level)
{
    if (static_cast<int>(f.plus.size()) <= level || static_cast<int>(f.minus.size()) <= level)
        throw Error(ErrorKind::schema, "kappa family: missing tau node");
    const StaticSystem& p = f.plus[level];
    const StaticSystem& m = f.minus[level];
    if (p.size() != s.size() || m.size() != s.size())
        throw Error(ErrorKind::schema, "kappa family: node systems differ in size from the base");
    const double t = f.h / (1 << level);
    Jet v = zero_jet(s.size(), s.model.group.dim());
    for (int i = 0; i < s.size(); ++i)
        v.directions[i] = hermitian_part((p.point(i).matrix - m.point(i).matrix) / (2.0 * t));
    return v;
}

} // namespace

KappaFamilyReport kappa_family_consistency(const StaticSystem& st, const Family& ft, const StaticSystem& s,
                                           const Family& f, double g, const Exhaustion& e,
                                           const std::vector<double>& taus, const FDScheme& fd)
{
    check_system(s);
    check_exhaustion(s, e);
    if (st.size() != s.size()) throw Error(ErrorKind::schema, "kappa family: the two systems must have equal size");
    KappaFamilyReport r;
    r.v = central_difference(s, f, 0);
    r.v_tilde = central_difference(st, ft, 0);
    if (f.plus.size() > 1 && ft.plus.size() > 1) {
        const Jet v2 = central_difference(s, f, 1), vt2 = central_difference(st, ft, 1);
        for (int i = 0; i < s.size(); ++i)
            r.derivative_gap = std::max({r.derivative_gap, (v2.directions[i] - r.v.directions[i]).norm(),
                                         (vt2.directions[i] - r.v_tilde.directions[i]).norm()});
    }
    r.w = zero_jet(s.size(), s.model.group.dim());
    for (int i = 0; i < s.size(); ++i)
        r.w.directions[i] =
            project_tangent(s.point(i), g * (r.v_tilde.directions[i] - r.v.directions[i]), s.model.kernel);

    const PairTable k = self_table(s);
    const JetTable t = jet_table(s, r.w, fd);
    // the cut where the linear flux is largest
    RVec om = RVec::Ones(s.size());
    double best = -1.0, lin = 0.0;
    for (double vol : e.cut_points) {
        const RVec m = membership(s, e, vol);
        const double gv = gamma_sli(s, m, r.w, t, k);
        if (std::abs(gv) > best) {
            best = std::abs(gv);
            om = m;
            lin = gv;
        }
    }
    for (double tau : taus) {
        StaticSystem gt = s;
        for (int i = 0; i < s.size(); ++i)
            gt.measure.points[i] = retract(s.point(i).matrix + tau * r.w.directions[i], s.model.kernel);
        const double nl = nonlinear_sli(gt, s, om, om, cross_table(gt, s));
        r.tau.push_back(tau);
        r.nonlinear.push_back(nl);
        r.linear.push_back(tau * lin);
        r.error.push_back(std::abs(nl - tau * lin));
    }
    const std::size_t m = r.error.size();
    if (m >= 2 && r.error[m - 1] > 0.0 && r.tau[m - 2] != r.tau[m - 1])
        r.order = std::log(r.error[m - 2] / r.error[m - 1]) / std::log(r.tau[m - 2] / r.tau[m - 1]);
    if (m >= 1 && r.linear.back() != 0.0) r.ratio = r.nonlinear.back() / r.linear.back();
    return r;
}

} // namespace cvp
