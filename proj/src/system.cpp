#include "cvp/system.hpp"
#include "cvp/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>

namespace cvp {

double DiscreteMeasure::volume() const { return pairwise_sum(weights); }

void check_system(const StaticSystem& s)
{
    const auto& m = s.measure;
    if (m.points.size() != m.weights.size())
        throw Error(ErrorKind::schema, "system: number of points and weights differ");
    const int f = s.model.group.dim();
    for (int i = 0; i < s.size(); ++i) {
        if (!(m.weights[i] > 0.0) || !std::isfinite(m.weights[i]))
            throw Error(ErrorKind::invariant, "system: weights must be positive and finite");
        if (m.points[i].dim() != f) throw Error(ErrorKind::schema, "system: point dimension differs from generator");
        if (m.points[i].range.cols() != 2 * s.model.kernel.spin_dimension)
            throw Error(ErrorKind::schema, "system: point factor does not match the spin dimension");
    }
    for (int k : s.inner_region)
        if (k < 0 || k >= s.size()) throw Error(ErrorKind::schema, "system: inner region index out of range");
}

void check_compatible(const StaticSystem& a, const StaticSystem& b)
{
    const auto& ka = a.model.kernel;
    const auto& kb = b.model.kernel;
    if (a.model.group.dim() != b.model.group.dim()) throw Error(ErrorKind::schema, "systems: ambient dimensions differ");
    if (ka.spin_dimension != kb.spin_dimension) throw Error(ErrorKind::schema, "systems: spin dimensions differ");
    if (ka.kappa != kb.kappa || a.s_param != b.s_param)
        throw Error(ErrorKind::invariant, "systems: Lagrange parameters (kappa, s) differ");
    const double d = (a.model.group.generator - b.model.group.generator).norm();
    if (d > 1e-12 * std::max(1.0, a.model.group.generator.norm()))
        throw Error(ErrorKind::invariant, "systems: generators of the time evolution differ");
}

namespace {

std::vector<OrbitFrame> frames_of(const StaticSystem& s)
{
    std::vector<OrbitFrame> out;
    out.reserve(s.size());
    for (const auto& p : s.measure.points) out.push_back(orbit_frame(p, s.model.group));
    return out;
}

// Runs body(k) for k in [0, count). Each k writes its own slot, so the
// parallel and serial variants give identical bits.
template <class Body>
void for_pairs(int count, Exec exec, Body&& body)
{
    if (exec == Exec::serial) {
        for (int k = 0; k < count; ++k) body(k);
        return;
    }
    std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 4)
    for (int k = 0; k < count; ++k) {
        try {
            body(k);
        } catch (...) {
#pragma omp critical(cvp_pair_error)
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

} // namespace

PairTable pair_table(const StaticSystem& a, const StaticSystem& b, Exec exec)
{
    check_compatible(a, b);
    const int na = a.size(), nb = b.size();
    PairTable t{RMat::Zero(na, nb), RMat::Zero(na, nb)};
    auto fb = frames_of(b);
    std::vector<Mat> ra(na);
    for (int i = 0; i < na; ++i) ra[i] = rotate_in(a.point(i).matrix, a.model.group);
    for_pairs(na * nb, exec, [&](int k) {
        const int i = k / nb, j = k % nb;
        StaticValue v = static_pair_rotated(ra[i], fb[j], a.model);
        t.L(i, j) = v.lagrangian;
        t.T(i, j) = v.boundedness;
    });
    return t;
}

PairTable self_table(const StaticSystem& s, Exec exec)
{
    const int n = s.size();
    PairTable t{RMat::Zero(n, n), RMat::Zero(n, n)};
    auto fr = frames_of(s);
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) pairs.emplace_back(i, j);
    for_pairs(static_cast<int>(pairs.size()), exec, [&](int k) {
        auto [i, j] = pairs[k];
        StaticValue v = static_pair_rotated(fr[i].rotated, fr[j], s.model);
        t.L(i, j) = t.L(j, i) = v.lagrangian;
        t.T(i, j) = t.T(j, i) = v.boundedness;
    });
    return t;
}

RVec weighted_rows(const RMat& k, const std::vector<double>& w)
{
    if (k.cols() != static_cast<int>(w.size())) throw Error(ErrorKind::schema, "weighted_rows: size mismatch");
    RVec out(k.rows());
    std::vector<double> buf(k.cols());
    for (int i = 0; i < k.rows(); ++i) {
        for (int j = 0; j < k.cols(); ++j) buf[j] = w[j] * k(i, j);
        out(i) = pairwise_sum(buf);
    }
    return out;
}

std::vector<double> radii_from(const StaticSystem& s, const Mat& center)
{
    std::vector<double> r(s.size());
    for (int i = 0; i < s.size(); ++i) r[i] = op_norm(s.point(i).matrix - center);
    return r;
}

Exhaustion exhaustion_by_radius(const StaticSystem& s, const std::vector<double>& radii)
{
    if (static_cast<int>(radii.size()) != s.size()) throw Error(ErrorKind::schema, "exhaustion: radius list size");
    Exhaustion e;
    e.order.resize(s.size());
    std::iota(e.order.begin(), e.order.end(), 0);
    std::stable_sort(e.order.begin(), e.order.end(), [&](int a, int b) { return radii[a] < radii[b]; });
    std::vector<double> w;
    for (int k : e.order) {
        w.push_back(s.weight(k));
        e.cut_points.push_back(pairwise_sum(w));
    }
    return e;
}

Exhaustion exhaustion_by_radius(const StaticSystem& s, const Mat& center)
{
    return exhaustion_by_radius(s, radii_from(s, center));
}

Exhaustion exhaustion_at_volumes(const std::vector<int>& order, std::vector<double> volumes)
{
    Exhaustion e{order, std::move(volumes)};
    for (std::size_t k = 1; k < e.cut_points.size(); ++k)
        if (!(e.cut_points[k] >= e.cut_points[k - 1])) throw Error(ErrorKind::invariant, "exhaustion: cuts not nested");
    return e;
}

RVec membership(const StaticSystem& s, const Exhaustion& e, double volume)
{
    RVec a = RVec::Zero(s.size());
    double acc = 0.0;
    const double total = s.measure.volume();
    if (volume >= total * (1.0 - 1e-15)) return RVec::Ones(s.size());
    for (int k : e.order) {
        const double w = s.weight(k);
        if (acc + w <= volume) {
            a(k) = 1.0;
            acc += w;
        } else {
            a(k) = std::max(0.0, (volume - acc) / w);
            break;
        }
    }
    return a;
}

RVec membership_of(int n, const std::vector<int>& indices)
{
    RVec a = RVec::Zero(n);
    for (int k : indices) {
        if (k < 0 || k >= n) throw Error(ErrorKind::schema, "index set: index out of range");
        a(k) = 1.0;
    }
    return a;
}

void check_exhaustion(const StaticSystem& s, const Exhaustion& e)
{
    std::vector<int> seen(s.size(), 0);
    for (int k : e.order) {
        if (k < 0 || k >= s.size()) throw Error(ErrorKind::schema, "exhaustion: index out of range");
        if (seen[k]++) throw Error(ErrorKind::invariant, "exhaustion: index repeated");
    }
    if (static_cast<int>(e.order.size()) != s.size())
        throw Error(ErrorKind::invariant, "exhaustion: union does not cover the support");
    for (std::size_t k = 1; k < e.cut_points.size(); ++k)
        if (!(e.cut_points[k] >= e.cut_points[k - 1])) throw Error(ErrorKind::invariant, "exhaustion: cuts not nested");
    if (e.cut_points.empty() || std::abs(e.cut_points.back() - s.measure.volume()) > 1e-12 * s.measure.volume())
        throw Error(ErrorKind::invariant, "exhaustion: last cut must equal the total volume");
}

} // namespace cvp
