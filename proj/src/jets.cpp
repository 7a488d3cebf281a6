#include "cvp/jets.hpp"
#include "cvp/numeric.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <exception>
#include <numbers>
#include <set>

namespace cvp {

Jet zero_jet(int n, int f)
{
    Jet j;
    j.scalars = RVec::Zero(n);
    j.directions.assign(n, Mat::Zero(f, f));
    return j;
}

Jet scalar_jet(int n, int f, int at, double a)
{
    Jet j = zero_jet(n, f);
    j.scalars(at) = a;
    return j;
}

Jet direction_jet(int n, int f, int at, const Mat& u)
{
    Jet j = zero_jet(n, f);
    j.directions[at] = u;
    return j;
}

Jet operator+(const Jet& a, const Jet& b)
{
    if (a.size() != b.size()) throw Error(ErrorKind::schema, "jet: size mismatch");
    Jet r = a;
    r.scalars += b.scalars;
    for (int i = 0; i < a.size(); ++i) r.directions[i] += b.directions[i];
    return r;
}

Jet operator*(double s, const Jet& a)
{
    Jet r = a;
    r.scalars *= s;
    for (auto& d : r.directions) d *= s;
    return r;
}

void check_jet(const Jet& j, const StaticSystem& s)
{
    if (j.size() != s.size() || static_cast<int>(j.directions.size()) != s.size())
        throw Error(ErrorKind::schema, "jet: number of entries differs from the support");
    const int f = s.model.group.dim();
    for (int i = 0; i < j.size(); ++i) {
        const Mat& u = j.directions[i];
        if (u.rows() != f || u.cols() != f) throw Error(ErrorKind::schema, "jet: direction has wrong dimension");
        const double scale = std::max(1.0, u.norm());
        if (herm_defect(u) > 1e-10 * scale) throw Error(ErrorKind::invariant, "jet: direction is not Hermitian");
        if (s.model.kernel.trace_constraint && std::abs(u.trace().real()) > 1e-10 * scale)
            throw Error(ErrorKind::invariant, "jet: direction violates the trace constraint");
    }
}

namespace {

// range columns with nonzero eigenvalue, completed to a unitary
void split_range(const OperatorPoint& x, Mat& ur, Mat& up)
{
    std::vector<int> cols;
    for (int k = 0; k < x.range_eigs.size(); ++k)
        if (x.range_eigs(k) != 0.0) cols.push_back(k);
    const int f = x.dim(), r = static_cast<int>(cols.size());
    ur.resize(f, r);
    for (int k = 0; k < r; ++k) ur.col(k) = x.range.col(cols[k]);
    Mat proj = Mat::Identity(f, f) - ur * ur.adjoint();
    Eigen::SelfAdjointEigenSolver<Mat> es(hermitian_part(proj));
    // eigenvalue 1 block spans the complement
    up = es.eigenvectors().rightCols(f - r);
}

} // namespace

std::vector<Mat> tangent_basis(const OperatorPoint& x, const KernelSpec& spec)
{
    Mat ur, up;
    split_range(x, ur, up);
    const int r = static_cast<int>(ur.cols()), q = static_cast<int>(up.cols());
    const double rs = 1.0 / std::sqrt(2.0);
    const cplx I(0.0, 1.0);
    std::vector<Mat> out;
    auto outer = [](const CVec& a, const CVec& b) -> Mat { return a * b.adjoint(); };
    for (int a = 0; a < r; ++a)
        for (int b = a + 1; b < r; ++b) {
            out.push_back(rs * (outer(ur.col(a), ur.col(b)) + outer(ur.col(b), ur.col(a))));
            out.push_back(rs * I * (outer(ur.col(a), ur.col(b)) - outer(ur.col(b), ur.col(a))));
        }
    // diagonal of K: Helmert basis of the trace-free part, plus the trace
    // direction when unconstrained
    for (int k = 1; k < r; ++k) {
        Mat d = Mat::Zero(x.dim(), x.dim());
        const double nrm = std::sqrt(static_cast<double>(k) * (k + 1));
        for (int a = 0; a < k; ++a) d += outer(ur.col(a), ur.col(a)) / nrm;
        d -= static_cast<double>(k) / nrm * outer(ur.col(k), ur.col(k));
        out.push_back(d);
    }
    if (!spec.trace_constraint && r > 0) out.push_back(ur * ur.adjoint() / std::sqrt(static_cast<double>(r)));
    for (int a = 0; a < r; ++a)
        for (int c = 0; c < q; ++c) {
            out.push_back(rs * (outer(ur.col(a), up.col(c)) + outer(up.col(c), ur.col(a))));
            out.push_back(rs * I * (outer(ur.col(a), up.col(c)) - outer(up.col(c), ur.col(a))));
        }
    return out;
}

Mat project_tangent(const OperatorPoint& x, const Mat& u, const KernelSpec& spec)
{
    Mat ur, up;
    split_range(x, ur, up);
    Mat h = hermitian_part(u);
    Mat pp = up * up.adjoint();
    Mat t = h - pp * h * pp;
    if (spec.trace_constraint && ur.cols() > 0) {
        const double tr = t.trace().real();
        t -= (tr / ur.cols()) * (ur * ur.adjoint());
    }
    return hermitian_part(t);
}

FDValue directional(const std::function<double(const Mat&)>& f, const Mat& x, const Mat& u, const FDScheme& fd)
{
    const double un = u.norm();
    if (un == 0.0) return {};
    const double eps = fd.step * std::max(op_norm(x), 1e-300);
    const Mat e = u / un;
    auto central = [&](double h) { return (f(x + h * e) - f(x - h * e)) / (2.0 * h); };
    const double d1 = central(eps), d2 = central(2.0 * eps);
    return {un * d1, un * std::abs(d1 - d2) / 3.0};
}

double nabla(double a, const Mat& u, const std::function<double(const Mat&)>& f, const Mat& x, const FDScheme& fd)
{
    double r = a == 0.0 ? 0.0 : a * f(x);
    return r + directional(f, x, u, fd).value;
}

namespace {

FDValue d1_kappa(const Mat& x, const OrbitFrame& fy, const Mat& u, const Model& m, const FDScheme& fd)
{
    if (u.norm() == 0.0) return {};
    const double k = m.kernel.kappa;
    if (fd.analytic) {
        StaticGradient g = static_pair_gradient(rotate_in(x, m.group), fy, m);
        return {frob_dot(g.d_lagrangian + k * g.d_boundedness, u), 0.0};
    }
    auto f = [&](const Mat& xx) { return static_pair_rotated(rotate_in(xx, m.group), fy, m).kappa(k); };
    return directional(f, x, u, fd);
}

} // namespace

FDValue dL(const OperatorPoint& x, const OperatorPoint& y, const Mat& u, const Mat& v, Slot which, const Model& m,
           const FDScheme& fd)
{
    FDValue a, b;
    if (which != Slot::d2) a = d1_kappa(x.matrix, orbit_frame(y, m.group), u, m, fd);
    if (which != Slot::d1) b = d1_kappa(y.matrix, orbit_frame(x, m.group), v, m, fd);
    switch (which) {
    case Slot::d1: return a;
    case Slot::d2: return b;
    case Slot::sum: return {a.value + b.value, a.error + b.error};
    case Slot::difference: return {a.value - b.value, a.error + b.error};
    }
    return {};
}

JetTable jet_table(const StaticSystem& s, const Jet& u, const FDScheme& fd, Exec exec)
{
    check_jet(u, s);
    const int n = s.size();
    JetTable t{RMat::Zero(n, n), RMat::Zero(n, n)};
    std::vector<OrbitFrame> fr;
    for (int i = 0; i < n; ++i) fr.push_back(orbit_frame(s.point(i), s.model.group));
    std::vector<std::pair<int, int>> work;
    for (int i = 0; i < n; ++i)
        if (u.directions[i].norm() != 0.0)
            for (int j = 0; j < n; ++j) work.emplace_back(i, j);
    auto body = [&](int k) {
        auto [i, j] = work[k];
        FDValue d = d1_kappa(s.point(i).matrix, fr[j], u.directions[i], s.model, fd);
        t.G(i, j) = d.value;
        t.err(i, j) = d.error;
    };
    const int count = static_cast<int>(work.size());
    if (exec == Exec::serial) {
        for (int k = 0; k < count; ++k) body(k);
    } else {
        std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 2)
        for (int k = 0; k < count; ++k) {
            try {
                body(k);
            } catch (...) {
#pragma omp critical(cvp_jet_error)
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
    }
    return t;
}

RVec d_ell_kappa(const StaticSystem& s, const Jet& u, const FDScheme& fd, Exec exec)
{
    return weighted_rows(jet_table(s, u, fd, exec).G, s.measure.weights);
}

double laplacian_pairing(const Jet& u, const Jet& v, const StaticSystem& s, int i, const FDScheme& fd)
{
    check_jet(u, s);
    check_jet(v, s);
    const Model& m = s.model;
    const double k = m.kernel.kappa;
    const int n = s.size();
    const int spin = m.kernel.spin_dimension;
    std::vector<OrbitFrame> fr, fr_plus, fr_minus;
    std::vector<double> dstep(n, 0.0);
    for (int j = 0; j < n; ++j) {
        fr.push_back(orbit_frame(s.point(j), m.group));
        const Mat& vj = v.directions[j];
        if (vj.norm() == 0.0) {
            fr_plus.push_back(fr.back());
            fr_minus.push_back(fr.back());
            continue;
        }
        // second slot moves along v_j; refactor the perturbed point
        dstep[j] = fd.step * op_norm(s.point(j).matrix) / vj.norm();
        fr_plus.push_back(orbit_frame(make_point(s.point(j).matrix + dstep[j] * vj, spin, true), m.group));
        fr_minus.push_back(orbit_frame(make_point(s.point(j).matrix - dstep[j] * vj, spin, true), m.group));
    }
    const double bi = v.scalars(i);
    auto g = [&](const Mat& x) {
        const Mat xr = rotate_in(x, m.group);
        std::vector<double> terms(n);
        for (int j = 0; j < n; ++j) {
            double t = 0.0;
            const double bj = v.scalars(j);
            if (bi + bj != 0.0) t += (bi + bj) * static_pair_rotated(xr, fr[j], m).kappa(k);
            t += d1_kappa(x, fr[j], v.directions[i], m, fd).value;
            if (dstep[j] != 0.0) {
                const double lp = static_pair_rotated(xr, fr_plus[j], m).kappa(k);
                const double lm = static_pair_rotated(xr, fr_minus[j], m).kappa(k);
                t += (lp - lm) / (2.0 * dstep[j]);
            }
            terms[j] = s.weight(j) * t;
        }
        return pairwise_sum(terms) - bi * s.s_param;
    };
    const Mat& xi = s.point(i).matrix;
    double r = u.scalars(i) == 0.0 ? 0.0 : u.scalars(i) * g(xi);
    return r + directional(g, xi, u.directions[i], fd).value;
}

double gamma_sli(const StaticSystem& s, const RVec& omega, const Jet& u, const JetTable& t, const PairTable& k)
{
    const int n = s.size();
    if (omega.size() != n) throw Error(ErrorKind::schema, "gamma: membership size mismatch");
    const RMat K = k.kappa(s.kappa());
    std::vector<double> rows(n);
    std::vector<double> buf(n);
    for (int i = 0; i < n; ++i) {
        if (omega(i) == 0.0) {
            rows[i] = 0.0;
            continue;
        }
        for (int j = 0; j < n; ++j) {
            const double out = 1.0 - omega(j);
            buf[j] = out == 0.0 ? 0.0
                                : s.weight(j) * out *
                                      ((u.scalars(i) - u.scalars(j)) * K(i, j) + t.G(i, j) - t.G(j, i));
        }
        rows[i] = s.weight(i) * omega(i) * pairwise_sum(buf);
    }
    return pairwise_sum(rows);
}

double gamma_sli(const StaticSystem& s, const RVec& omega, const Jet& u, const FDScheme& fd)
{
    return gamma_sli(s, omega, u, jet_table(s, u, fd), self_table(s));
}

RVec linearized_residual(const StaticSystem& s, const Jet& u, const JetTable& t, const PairTable& k)
{
    const int n = s.size();
    const RMat K = k.kappa(s.kappa());
    RVec r(n);
    std::vector<double> buf(n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            buf[j] = s.weight(j) * ((u.scalars(i) + u.scalars(j)) * K(i, j) + t.G(i, j) + t.G(j, i));
        r(i) = pairwise_sum(buf) - u.scalars(i) * s.s_param;
    }
    return r;
}

double fd_tolerance(const StaticSystem& s, const PairTable& k, const JetTable& t, const FDScheme& fd)
{
    const RMat K = k.kappa(s.kappa());
    double scale = 0.0, rich = 0.0;
    for (int i = 0; i < s.size(); ++i)
        for (int j = 0; j < s.size(); ++j) {
            const double ww = s.weight(i) * s.weight(j);
            scale += ww * (std::abs(K(i, j)) + std::abs(t.G(i, j)));
            rich += ww * t.err(i, j);
        }
    return fd.step * fd.step * scale + rich;
}

ConservationReport conservation_check(const StaticSystem& s, const Jet& u, const Exhaustion& e, const FDScheme& fd)
{
    check_exhaustion(s, e);
    const PairTable k = self_table(s);
    const JetTable t = jet_table(s, u, fd);
    ConservationReport rep;
    for (double vol : e.cut_points) {
        RVec om = membership(s, e, vol);
        const double g = gamma_sli(s, om, u, t, k);
        std::vector<double> buf(s.size());
        for (int i = 0; i < s.size(); ++i) buf[i] = s.weight(i) * om(i) * u.scalars(i);
        const double ex = s.s_param * pairwise_sum(buf);
        rep.volumes.push_back(vol);
        rep.gamma.push_back(g);
        rep.expected.push_back(ex);
        rep.gap.push_back(std::abs(g - ex));
        rep.max_gap = std::max(rep.max_gap, rep.gap.back());
    }
    rep.residual = linearized_residual(s, u, t, k).cwiseAbs().maxCoeff();
    rep.fd_tolerance = fd_tolerance(s, k, t, fd);
    return rep;
}

Jet commutator_jet(const Mat& a, const StaticSystem& s, double tolerance)
{
    const Mat& h = s.model.group.generator;
    if (a.rows() != h.rows() || a.cols() != h.cols()) throw Error(ErrorKind::schema, "commutator jet: dimension mismatch");
    if (herm_defect(a) > 1e-10 * std::max(1.0, a.norm()))
        throw Error(ErrorKind::invariant, "commutator jet: generator is not Hermitian");
    const double c = op_norm(a * h - h * a);
    if (c > tolerance * std::max(1.0, op_norm(a) * op_norm(h)))
        throw Error(ErrorKind::invariant, "commutator jet: generator does not commute with the time evolution");
    const int n = s.size(), f = s.model.group.dim();
    Jet j = zero_jet(n, f);
    const cplx I(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        const Mat& x = s.point(i).matrix;
        j.directions[i] = hermitian_part(I * (a * x - x * a));
    }
    return j;
}

std::vector<Mat> commutant_basis(const StaticGroup& g)
{
    const int f = g.dim();
    const double tol = 1e-9 * std::max(1.0, g.freq.cwiseAbs().maxCoeff());
    std::vector<Mat> out;
    const double rs = 1.0 / std::sqrt(2.0);
    const cplx I(0.0, 1.0);
    int start = 0;
    while (start < f) {
        int end = start + 1;
        while (end < f && g.freq(end) - g.freq(end - 1) <= tol) ++end;
        for (int a = start; a < end; ++a) {
            const CVec va = g.basis.col(a);
            out.push_back(va * va.adjoint());
            for (int b = a + 1; b < end; ++b) {
                const CVec vb = g.basis.col(b);
                out.push_back(rs * (va * vb.adjoint() + vb * va.adjoint()));
                out.push_back(rs * I * (va * vb.adjoint() - vb * va.adjoint()));
            }
        }
        start = end;
    }
    return out;
}

std::vector<Jet> test_basis(const StaticSystem& s, const TestBasisOptions& opt)
{
    const int n = s.size(), f = s.model.group.dim();
    std::vector<Jet> out;
    if (opt.scalars)
        for (int i = 0; i < n; ++i) out.push_back(scalar_jet(n, f, i));
    if (opt.commutators)
        for (const Mat& a : commutant_basis(s.model.group)) {
            Jet j = commutator_jet(a, s);
            double nrm = 0.0;
            for (const auto& d : j.directions) nrm = std::max(nrm, d.norm());
            if (nrm > 1e-12) out.push_back(std::move(j));
        }
    if (opt.tangents)
        for (int i = 0; i < n; ++i) {
            const double scale = op_norm(s.point(i).matrix);
            for (const Mat& b : tangent_basis(s.point(i), s.model.kernel))
                out.push_back(direction_jet(n, f, i, scale * b));
        }
    return out;
}

Graph knn_graph(const std::vector<double>& weights, const RMat& distance, int k, const std::vector<int>& ends)
{
    const int n = static_cast<int>(weights.size());
    if (distance.rows() != n || distance.cols() != n) throw Error(ErrorKind::schema, "graph: distance matrix size");
    if (k < 0) k = std::min(6, n - 1);
    std::set<std::pair<int, int>> es;
    for (int i = 0; i < n; ++i) {
        std::vector<int> idx;
        for (int j = 0; j < n; ++j)
            if (j != i) idx.push_back(j);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return distance(i, a) < distance(i, b); });
        for (int m = 0; m < k && m < static_cast<int>(idx.size()); ++m)
            es.emplace(std::min(i, idx[m]), std::max(i, idx[m]));
    }
    Graph g;
    g.nodes = n;
    g.node_weight = weights;
    for (auto [i, j] : es) {
        g.edges.emplace_back(i, j);
        g.conductance.push_back(0.5 * (weights[i] + weights[j]));
    }
    for (int e : ends) {
        if (e < 0 || e >= n) throw Error(ErrorKind::schema, "graph: end node out of range");
        g.sinks.push_back(e);
        g.sink_conductance.push_back(weights[e]);
    }
    return g;
}

Graph knn_graph(const StaticSystem& s, int k, const std::vector<int>& ends)
{
    const int n = s.size();
    RMat d = RMat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = op_norm(s.point(i).matrix - s.point(j).matrix);
    return knn_graph(s.measure.weights, d, k, ends);
}

RVec divergence(const EdgeField& v, const Graph& g)
{
    if (v.flow.size() != g.edges.size() || v.sink_flow.size() != g.sinks.size())
        throw Error(ErrorKind::schema, "divergence: field does not match the graph");
    RVec d = RVec::Zero(g.nodes);
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto [i, j] = g.edges[e];
        const double q = g.conductance[e] * v.flow[e];
        d(i) += q;
        d(j) -= q;
    }
    for (std::size_t e = 0; e < g.sinks.size(); ++e) d(g.sinks[e]) += g.sink_conductance[e] * v.sink_flow[e];
    for (int i = 0; i < g.nodes; ++i) d(i) /= g.node_weight[i];
    return d;
}

double boundary_flux(const EdgeField& v, const Graph& g)
{
    std::vector<double> q(g.sinks.size());
    for (std::size_t e = 0; e < g.sinks.size(); ++e) q[e] = g.sink_conductance[e] * v.sink_flow[e];
    return pairwise_sum(q);
}

namespace {

bool connected(const Graph& g)
{
    if (g.nodes == 0) return true;
    std::vector<std::vector<int>> adj(g.nodes);
    for (auto [i, j] : g.edges) {
        adj[i].push_back(j);
        adj[j].push_back(i);
    }
    // the virtual end joins all sinks
    for (std::size_t a = 1; a < g.sinks.size(); ++a) {
        adj[g.sinks[0]].push_back(g.sinks[a]);
        adj[g.sinks[a]].push_back(g.sinks[0]);
    }
    std::vector<int> seen(g.nodes, 0), stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        for (int j : adj[i])
            if (!seen[j]) {
                seen[j] = 1;
                ++count;
                stack.push_back(j);
            }
    }
    return count == g.nodes;
}

} // namespace

DivergenceSolution solve_divergence(const RVec& a, const Graph& g)
{
    const int n = g.nodes;
    if (a.size() != n) throw Error(ErrorKind::schema, "divergence solve: size mismatch");
    if (!connected(g)) throw Error(ErrorKind::invariant, "divergence solve: graph is disconnected");
    std::vector<double> wa(n), wabs(n);
    for (int i = 0; i < n; ++i) {
        wa[i] = g.node_weight[i] * a(i);
        wabs[i] = std::abs(wa[i]);
    }
    const bool grounded = !g.sinks.empty();
    if (!grounded && std::abs(pairwise_sum(wa)) > 1e-12 * std::max(pairwise_sum(wabs), 1e-300))
        throw Error(ErrorKind::invariant,
                    "divergence solve: weighted total of a is nonzero and no asymptotic end is designated");

    // (L + C_end) phi = -W a, with phi_0 = 0 when nothing is grounded
    const int off = grounded ? 0 : 1;
    const int m = n - off;
    std::vector<Eigen::Triplet<double>> trip;
    auto add = [&](int i, int j, double v) {
        if (i >= off && j >= off) trip.emplace_back(i - off, j - off, v);
    };
    for (std::size_t e = 0; e < g.edges.size(); ++e) {
        auto [i, j] = g.edges[e];
        const double c = g.conductance[e];
        add(i, i, c);
        add(j, j, c);
        add(i, j, -c);
        add(j, i, -c);
    }
    for (std::size_t e = 0; e < g.sinks.size(); ++e) add(g.sinks[e], g.sinks[e], g.sink_conductance[e]);
    Eigen::SparseMatrix<double> lap(m, m);
    lap.setFromTriplets(trip.begin(), trip.end());
    RVec rhs(m);
    for (int i = off; i < n; ++i) rhs(i - off) = -wa[i];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(lap);
    if (solver.info() != Eigen::Success) throw Error(ErrorKind::convergence, "divergence solve: factorization failed");
    RVec sol = solver.solve(rhs);
    // one step of iterative refinement
    RVec corr = solver.solve(rhs - lap * sol);
    sol += corr;

    DivergenceSolution out;
    out.potential = RVec::Zero(n);
    out.potential.tail(m) = sol;
    for (auto [i, j] : g.edges) out.field.flow.push_back(out.potential(j) - out.potential(i));
    for (int sk : g.sinks) out.field.sink_flow.push_back(-out.potential(sk));
    out.residual = (divergence(out.field, g) - a).cwiseAbs().maxCoeff();
    out.flux = boundary_flux(out.field, g);
    return out;
}

} // namespace cvp
