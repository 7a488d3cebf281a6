#include "cvp/mass.hpp"
#include "cvp/numeric.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace cvp {

PairTable cross_table(const StaticSystem& st, const StaticSystem& s, Exec exec) { return pair_table(st, s, exec); }

double volume_of(const StaticSystem& s, const RVec& omega)
{
    std::vector<double> buf(s.size());
    for (int i = 0; i < s.size(); ++i) buf[i] = s.weight(i) * omega(i);
    return pairwise_sum(buf);
}

double nonlinear_sli(const StaticSystem& st, const StaticSystem& s, const RVec& omega_t, const RVec& omega,
                     const PairTable& cross)
{
    const int nt = st.size(), n = s.size();
    if (omega_t.size() != nt || omega.size() != n) throw Error(ErrorKind::schema, "surface layer: membership size");
    if (cross.L.rows() != nt || cross.L.cols() != n) throw Error(ErrorKind::schema, "surface layer: table size");
    const RMat K = cross.kappa(s.kappa());
    std::vector<double> rows(nt), buf(n);
    for (int i = 0; i < nt; ++i) {
        // w~_i [a_i sum_j w_j (1 - b_j) K - (1 - a_i) sum_j w_j b_j K]
        for (int j = 0; j < n; ++j)
            buf[j] = s.weight(j) * K(i, j) * (omega_t(i) * (1.0 - omega(j)) - (1.0 - omega_t(i)) * omega(j));
        rows[i] = st.weight(i) * pairwise_sum(buf);
    }
    return pairwise_sum(rows);
}

double nonlinear_sli(const StaticSystem& st, const StaticSystem& s, const std::vector<int>& omega_t,
                     const std::vector<int>& omega)
{
    return nonlinear_sli(st, s, membership_of(st.size(), omega_t), membership_of(s.size(), omega),
                         cross_table(st, s));
}

namespace {

void finish(MassReport& r, const MassOptions& opt)
{
    r.value = r.partials.empty() ? 0.0 : r.partials.back();
    const int k = std::min<int>(opt.last, static_cast<int>(r.partials.size()));
    double lo = r.value, hi = r.value;
    for (int q = 0; q < k; ++q) {
        const double v = r.partials[r.partials.size() - 1 - q];
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    r.cauchy_gap = hi - lo;
    r.converged = r.cauchy_gap <= opt.gap * (1.0 + std::abs(r.value));
    if (!r.volume.empty()) r.volume_mismatch = r.volume_tilde.back() - r.volume.back();
}

} // namespace

MassReport total_mass_general(const StaticSystem& st, const StaticSystem& s, const Exhaustion& e,
                              const Exhaustion& et, const PairTable& cross, const MassOptions& opt)
{
    check_exhaustion(s, e);
    check_exhaustion(st, et);
    check_compatible(st, s);
    MassReport r;
    const RVec full_t = RVec::Ones(st.size());
    const double vol_t = st.measure.volume();
    // inner limit over Omega~ is attained at the full support
    for (double v : e.cut_points) {
        const RVec om = membership(s, e, v);
        const double mu = volume_of(s, om);
        r.partials.push_back(-s.s_param * (vol_t - mu) + nonlinear_sli(st, s, full_t, om, cross));
        r.volume.push_back(mu);
        r.volume_tilde.push_back(vol_t);
    }
    finish(r, opt);
    // reversed order: Omega first, then Omega~
    const RVec full = RVec::Ones(s.size());
    const double vol = s.measure.volume();
    double rev = 0.0;
    for (double v : et.cut_points) {
        const RVec omt = membership(st, et, v);
        rev = -s.s_param * (volume_of(st, omt) - vol) + nonlinear_sli(st, s, omt, full, cross);
    }
    r.reversed_gap = std::abs(rev - r.value);
    return r;
}

MassReport total_mass_general(const StaticSystem& st, const StaticSystem& s, const Exhaustion& e,
                              const Exhaustion& et, const MassOptions& opt)
{
    return total_mass_general(st, s, e, et, cross_table(st, s, opt.exec), opt);
}

double spatial_integral_form(const StaticSystem& st, const StaticSystem& s, const PairTable& cross)
{
    check_compatible(st, s);
    const RMat K = cross.kappa(s.kappa());
    const RVec nt = weighted_rows(K, s.measure.weights);              // n~ on the tilde support
    const RVec n = weighted_rows(K.transpose(), st.measure.weights);  // n on the support
    std::vector<double> a(st.size()), b(s.size());
    for (int i = 0; i < st.size(); ++i) a[i] = st.weight(i) * (nt(i) - s.s_param);
    for (int j = 0; j < s.size(); ++j) b[j] = s.weight(j) * (n(j) - s.s_param);
    return pairwise_sum(a) - pairwise_sum(b);
}

double spatial_integral_form(const StaticSystem& st, const StaticSystem& s)
{
    return spatial_integral_form(st, s, cross_table(st, s));
}

MassReport total_mass_matched(const StaticSystem& st, const StaticSystem& s, const Exhaustion& e,
                              const Exhaustion& et, const PairTable& cross, const MassOptions& opt)
{
    check_exhaustion(s, e);
    check_exhaustion(st, et);
    check_compatible(st, s);
    const double vol = s.measure.volume(), vol_t = st.measure.volume();
    if (std::abs(vol - vol_t) > 1e-12 * std::max(vol, vol_t))
        throw Error(ErrorKind::invariant, "matched mass: total volumes differ, volume matching is infeasible");
    std::vector<double> cuts = e.cut_points;
    cuts.insert(cuts.end(), et.cut_points.begin(), et.cut_points.end());
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end(),
                           [&](double a, double b) { return std::abs(a - b) <= 1e-14 * vol; }),
               cuts.end());
    MassReport r;
    for (double v : cuts) {
        const RVec om = membership(s, e, v), omt = membership(st, et, v);
        r.partials.push_back(nonlinear_sli(st, s, omt, om, cross));
        r.volume.push_back(volume_of(s, om));
        r.volume_tilde.push_back(volume_of(st, omt));
    }
    finish(r, opt);
    return r;
}

MassReport total_mass_matched(const StaticSystem& st, const StaticSystem& s, const Exhaustion& e,
                              const Exhaustion& et, const MassOptions& opt)
{
    return total_mass_matched(st, s, e, et, cross_table(st, s, opt.exec), opt);
}

CutIdentity cut_identity(const StaticSystem& st, const StaticSystem& s, const Exhaustion& e, const Exhaustion& et,
                         const PairTable& cross)
{
    const CorrelationData c = correlations(s, st, PairTable{cross.L.transpose(), cross.T.transpose()});
    CutIdentity out;
    const std::size_t m = std::max(e.cut_points.size(), et.cut_points.size());
    for (std::size_t k = 0; k < m; ++k) {
        const double v = e.cut_points[std::min(k, e.cut_points.size() - 1)];
        const double vt = et.cut_points[std::min(k, et.cut_points.size() - 1)];
        const RVec om = membership(s, e, v), omt = membership(st, et, vt);
        const double dmu = volume_of(st, omt) - volume_of(s, om);
        out.bracket.push_back(-s.s_param * dmu + nonlinear_sli(st, s, omt, om, cross));
        std::vector<double> a(st.size()), b(s.size());
        for (int i = 0; i < st.size(); ++i) a[i] = omt(i) * c.nu_tilde_weights(i);
        for (int j = 0; j < s.size(); ++j) b[j] = om(j) * c.nu_weights(j);
        out.correlation.push_back(pairwise_sum(a) - pairwise_sum(b) - s.s_param * dmu);
        out.max_gap = std::max(out.max_gap, std::abs(out.bracket.back() - out.correlation.back()));
    }
    return out;
}

double total_mass_excised(const StaticSystem& st, const StaticSystem& s, const std::vector<int>& inner_t,
                          const std::vector<int>& inner, const PairTable& cross)
{
    check_compatible(st, s);
    const RVec in_t = membership_of(st.size(), inner_t), in = membership_of(s.size(), inner);
    const RMat K = cross.kappa(s.kappa());
    std::vector<double> wt(st.size()), w(s.size());
    for (int i = 0; i < st.size(); ++i) wt[i] = st.weight(i) * (1.0 - in_t(i));
    for (int j = 0; j < s.size(); ++j) w[j] = s.weight(j) * (1.0 - in(j));
    const RVec nt_i = weighted_rows(K, w);              // n~_I
    const RVec n_it = weighted_rows(K.transpose(), wt); // n_I~
    std::vector<double> a(st.size()), b(s.size());
    for (int i = 0; i < st.size(); ++i) a[i] = wt[i] * (nt_i(i) - s.s_param);
    for (int j = 0; j < s.size(); ++j) b[j] = w[j] * (n_it(j) - s.s_param);
    return pairwise_sum(a) - pairwise_sum(b);
}

double total_mass_excised(const StaticSystem& st, const StaticSystem& s, const std::vector<int>& inner_t,
                          const std::vector<int>& inner)
{
    return total_mass_excised(st, s, inner_t, inner, cross_table(st, s));
}

ExcisionReport excision_identity(const StaticSystem& st, const StaticSystem& s, const std::vector<int>& inner_t,
                                 const std::vector<int>& inner)
{
    const PairTable cross = cross_table(st, s);
    ExcisionReport r;
    r.excised = total_mass_excised(st, s, inner_t, inner, cross);
    r.mass = spatial_integral_form(st, s, cross);
    r.correction = s.s_param * (volume_of(st, membership_of(st.size(), inner_t)) -
                                volume_of(s, membership_of(s.size(), inner)));
    r.gap = std::abs(r.excised - r.mass - r.correction);
    return r;
}

Mat unitary_from(const Mat& a, double theta)
{
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(a));
    CVec ph(a.rows());
    for (int k = 0; k < a.rows(); ++k) ph(k) = std::exp(cplx(0.0, theta * es.eigenvalues()(k)));
    return es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
}

UnitaryReport unitary_invariance_check(const StaticSystem& st, const StaticSystem& s, const Mat& w, double tolerance)
{
    const Mat& h = s.model.group.generator;
    if (w.rows() != h.rows() || w.cols() != h.cols()) throw Error(ErrorKind::schema, "unitary check: dimension");
    if ((w.adjoint() * w - Mat::Identity(w.rows(), w.cols())).norm() > 1e-10)
        throw Error(ErrorKind::invariant, "unitary check: W is not unitary");
    UnitaryReport r;
    r.commutator = op_norm(w * h - h * w);
    r.static_w = r.commutator <= tolerance * std::max(1.0, op_norm(h));
    StaticSystem wt = pushforward([&](const Mat& x) -> Mat { return hermitian_part(w * x * w.adjoint()); }, st);
    const PairTable c0 = cross_table(st, s), c1 = cross_table(wt, s);
    const Exhaustion e = exhaustion_by_radius(s, s.point(0).matrix);
    const Exhaustion et0 = exhaustion_by_radius(st, s.point(0).matrix);
    const Exhaustion et1 = exhaustion_by_radius(wt, s.point(0).matrix);
    r.mass = total_mass_general(st, s, e, et0, c0).value;
    r.mass_transformed = total_mass_general(wt, s, e, et1, c1).value;
    r.gap = std::abs(r.mass - r.mass_transformed);
    r.table_change = (c1.kappa(s.kappa()) - c0.kappa(s.kappa())).cwiseAbs().maxCoeff();
    return r;
}

} // namespace cvp
