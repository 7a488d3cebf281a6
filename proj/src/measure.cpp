#include "cvp/measure.hpp"
#include "cvp/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace cvp {

namespace {

template <class F>
double sum_over(const Mat& x, const StaticSystem& s, F&& pick)
{
    const Mat xr = rotate_in(x, s.model.group);
    std::vector<double> terms(s.size());
    for (int j = 0; j < s.size(); ++j)
        terms[j] = s.weight(j) * pick(static_pair_rotated(xr, orbit_frame(s.point(j), s.model.group), s.model));
    return pairwise_sum(terms);
}

} // namespace

double ell(const Mat& x, const StaticSystem& s)
{
    return sum_over(x, s, [](const StaticValue& v) { return v.lagrangian; }) - s.s_param;
}

double frak_t(const Mat& x, const StaticSystem& s)
{
    return sum_over(x, s, [](const StaticValue& v) { return v.boundedness; });
}

double ell_kappa(const Mat& x, const StaticSystem& s)
{
    const double k = s.kappa();
    return sum_over(x, s, [k](const StaticValue& v) { return v.kappa(k); }) - s.s_param;
}

RVec ell_values(const StaticSystem& s, const PairTable& t)
{
    return weighted_rows(t.L, s.measure.weights).array() - s.s_param;
}

RVec frak_t_values(const StaticSystem& s, const PairTable& t) { return weighted_rows(t.T, s.measure.weights); }

RVec ell_kappa_values(const StaticSystem& s, const PairTable& t)
{
    return weighted_rows(t.kappa(s.kappa()), s.measure.weights).array() - s.s_param;
}

ElResidual el_residual(const StaticSystem& s, const std::vector<Jet>& tests, const FDScheme& fd)
{
    check_system(s);
    ElResidual r;
    if (s.size() == 0) return r;
    const PairTable t = self_table(s);
    const RVec lk = ell_kappa_values(s, t);
    r.minimum = lk(0);
    for (int i = 1; i < lk.size(); ++i)
        if (lk(i) < r.minimum) {
            r.minimum = lk(i);
            r.argmin = i;
        }
    r.scalar = (lk.array() - r.minimum).abs().maxCoeff();
    // the weak equations test ell_kappa - inf, i.e. the calibrated function
    for (std::size_t q = 0; q < tests.size(); ++q) {
        const Jet& u = tests[q];
        const RVec d = d_ell_kappa(s, u, fd);
        for (int i = 0; i < s.size(); ++i) {
            const double v = std::abs(u.scalars(i) * (lk(i) - r.minimum) + d(i));
            if (v > r.derivative) {
                r.derivative = v;
                r.worst_jet = static_cast<int>(q);
            }
        }
    }
    r.total = r.scalar + r.derivative;
    return r;
}

ElResidual el_residual(const StaticSystem& s, const FDScheme& fd) { return el_residual(s, test_basis(s), fd); }

CorrelationData correlations(const StaticSystem& s, const StaticSystem& st, const PairTable& cross)
{
    const double k = s.kappa();
    const RMat K = cross.kappa(k);
    CorrelationData c;
    c.n_values = weighted_rows(K, st.measure.weights);
    c.n_tilde_values = weighted_rows(K.transpose(), s.measure.weights);
    c.nu_weights.resize(s.size());
    c.nu_tilde_weights.resize(st.size());
    for (int i = 0; i < s.size(); ++i) c.nu_weights(i) = c.n_values(i) * s.weight(i);
    for (int j = 0; j < st.size(); ++j) c.nu_tilde_weights(j) = c.n_tilde_values(j) * st.weight(j);
    return c;
}

CorrelationData correlations(const StaticSystem& s, const StaticSystem& st)
{
    if (st.size() == 0 || s.size() == 0) {
        CorrelationData c;
        c.n_values = RVec::Zero(s.size());
        c.n_tilde_values = RVec::Zero(st.size());
        c.nu_weights = RVec::Zero(s.size());
        c.nu_tilde_weights = RVec::Zero(st.size());
        return c;
    }
    return correlations(s, st, pair_table(s, st));
}

namespace {

std::vector<double> shell_sums(const StaticSystem& s, const Exhaustion& e, const RVec& dens)
{
    std::vector<double> out;
    RVec prev = RVec::Zero(s.size());
    for (double v : e.cut_points) {
        RVec m = membership(s, e, v);
        std::vector<double> buf(s.size());
        for (int i = 0; i < s.size(); ++i) buf[i] = (m(i) - prev(i)) * s.weight(i) * std::abs(dens(i));
        out.push_back(pairwise_sum(buf));
        prev = m;
    }
    return out;
}

} // namespace

ClosenessReport asymptotic_closeness(const StaticSystem& s, const StaticSystem& st, const Exhaustion& e,
                                     const Exhaustion& et)
{
    check_exhaustion(s, e);
    check_exhaustion(st, et);
    CorrelationData c = correlations(s, st);
    ClosenessReport r;
    const RVec dn = c.n_values.array() - s.s_param;
    const RVec dt = c.n_tilde_values.array() - st.s_param;
    r.shells = shell_sums(s, e, dn);
    r.shells_tilde = shell_sums(st, et, dt);
    r.sum = pairwise_sum(r.shells);
    r.sum_tilde = pairwise_sum(r.shells_tilde);
    auto decays = [](const std::vector<double>& v) {
        if (v.size() < 4) return true;
        const std::size_t h = v.size() / 2;
        double inner = 0.0, outer = 0.0;
        for (std::size_t k = 0; k < h; ++k) inner += v[k];
        for (std::size_t k = h; k < v.size(); ++k) outer += v[k];
        return outer <= inner;
    };
    r.decaying = decays(r.shells) && decays(r.shells_tilde);
    return r;
}

StaticSystem pushforward(const std::function<Mat(const Mat&)>& map, const StaticSystem& s)
{
    StaticSystem out = s;
    for (int i = 0; i < s.size(); ++i)
        out.measure.points[i] = validate_point(map(s.point(i).matrix), s.model.kernel);
    return out;
}

} // namespace cvp
