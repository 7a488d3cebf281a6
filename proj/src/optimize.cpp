#include "cvp/optimize.hpp"
#include "cvp/build.hpp"
#include "cvp/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

namespace cvp {

double action(const StaticSystem& s, const PairTable& t)
{
    const RVec rows = weighted_rows(t.kappa(s.kappa()), s.measure.weights);
    std::vector<double> buf(s.size());
    for (int i = 0; i < s.size(); ++i) buf[i] = s.weight(i) * rows(i);
    return pairwise_sum(buf);
}

double action(const StaticSystem& s)
{
    if (s.size() == 0) return 0.0;
    return action(s, self_table(s));
}

double action_scale(const StaticSystem& s)
{
    const double v = s.measure.volume();
    return v > 0.0 ? action(s) / v : 0.0;
}

StaticSystem calibrate_s(StaticSystem s)
{
    if (s.size() == 0) return s;
    const RVec rows = weighted_rows(self_table(s).kappa(s.kappa()), s.measure.weights);
    double m = rows(0);
    for (int i = 1; i < rows.size(); ++i)
        if (rows(i) < m) m = rows(i);
    s.s_param = m;
    return s;
}

RescaleResult rescale(const StaticSystem& s, double lambda, double sigma)
{
    if (!(lambda > 0.0) || !(sigma > 0.0)) throw Error(ErrorKind::invariant, "rescale: parameters must be positive");
    RescaleResult r;
    r.system = s;
    r.system.model.kernel.trace_constant = lambda * s.model.kernel.trace_constant;
    for (int i = 0; i < s.size(); ++i) {
        OperatorPoint& p = r.system.measure.points[i];
        p.matrix *= lambda;
        p.spectrum *= lambda;
        p.range_eigs *= lambda;
        r.system.measure.weights[i] *= sigma;
    }
    r.system.s_param = sigma * std::pow(lambda, 4) * s.s_param;
    r.trace_constant = r.system.model.kernel.trace_constant;
    r.s_param = r.system.s_param;
    return r;
}

StaticSystem random_system(const SystemSpec& spec)
{
    std::mt19937_64 rng(spec.seed);
    StaticSystem s;
    s.model.kernel.spin_dimension = spec.spin;
    s.model.kernel.kappa = spec.kappa;
    s.model.kernel.trace_constant = spec.trace;
    s.model.group = StaticGroup::from_generator(integer_generator(spec.ambient, rng));
    s.model.quad = spec.quad;
    std::vector<double> w;
    for (int i = 0; i < spec.points; ++i) {
        s.measure.points.push_back(
            validate_point(random_point_matrix(spec.ambient, spec.spin, spec.trace, rng), s.model.kernel));
        w.push_back(uniform(rng, 0.5, 1.5));
    }
    const double tot = pairwise_sum(w);
    for (double& x : w) x *= spec.volume / tot;
    s.measure.weights = w;
    return s;
}

namespace {

struct State {
    RMat K;                // L_kappa table (row i from the gradient call at x_i)
    std::vector<Mat> grad; // sum_j w_j grad_1 L_kappa(x_i, x_j), projected
};

State evaluate(const StaticSystem& s, Exec exec)
{
    const int n = s.size();
    const double k = s.kappa();
    const Model& m = s.model;
    std::vector<OrbitFrame> fr;
    for (int i = 0; i < n; ++i) fr.push_back(orbit_frame(s.point(i), m.group));
    State st;
    st.K = RMat::Zero(n, n);
    std::vector<Mat> pg(n * n);
    auto body = [&](int q) {
        const int i = q / n, j = q % n;
        StaticGradient g = static_pair_gradient(fr[i].rotated, fr[j], m);
        st.K(i, j) = g.value.kappa(k);
        pg[q] = g.d_lagrangian + k * g.d_boundedness;
    };
    if (exec == Exec::serial) {
        for (int q = 0; q < n * n; ++q) body(q);
    } else {
        std::exception_ptr err;
#pragma omp parallel for schedule(dynamic, 2)
        for (int q = 0; q < n * n; ++q) {
            try {
                body(q);
            } catch (...) {
#pragma omp critical(cvp_opt_error)
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
    }
    // symmetrize the table; the two orders differ by quadrature round-off
    st.K = 0.5 * (st.K + st.K.transpose()).eval();
    st.grad.resize(n);
    for (int i = 0; i < n; ++i) {
        Mat g = Mat::Zero(s.model.group.dim(), s.model.group.dim());
        for (int j = 0; j < n; ++j) g += s.weight(j) * pg[i * n + j];
        st.grad[i] = project_tangent(s.point(i), g, s.model.kernel);
    }
    return st;
}

double quad_form(const RMat& K, const std::vector<double>& w)
{
    std::vector<double> rows(w.size()), buf(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        for (std::size_t j = 0; j < w.size(); ++j) buf[j] = w[j] * K(i, j);
        rows[i] = w[i] * pairwise_sum(buf);
    }
    return pairwise_sum(rows);
}

// Exponentiated-gradient steps on the free weights with the kernel held fixed;
// the free volume is preserved.
void weight_steps(const RMat& K, std::vector<double>& w, const std::vector<char>& frozen, double& rate, int steps)
{
    const int n = static_cast<int>(w.size());
    std::vector<double> fw;
    for (int i = 0; i < n; ++i)
        if (!frozen[i]) fw.push_back(w[i]);
    const double free_volume = pairwise_sum(fw);
    if (fw.size() < 2 || !(free_volume > 0.0)) return;
    double cur = quad_form(K, w);
    std::vector<double> buf(n);
    for (int it = 0; it < steps; ++it) {
        RVec ell = RVec::Zero(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ell(i) += K(i, j) * w[j];
        for (int i = 0; i < n; ++i) buf[i] = frozen[i] ? 0.0 : w[i] * ell(i);
        const double mean = pairwise_sum(buf) / free_volume;
        if (!(mean > 0.0)) return;
        double spread = 0.0;
        for (int i = 0; i < n; ++i)
            if (!frozen[i]) spread = std::max(spread, std::abs(ell(i) - mean));
        if (spread <= 1e-15 * mean) return;
        bool accepted = false;
        double eta = rate;
        for (int tries = 0; tries < 40 && !accepted; ++tries) {
            std::vector<double> nw = w;
            for (int i = 0; i < n; ++i) {
                buf[i] = 0.0;
                if (frozen[i]) continue;
                nw[i] = w[i] * std::exp(-eta * (ell(i) - mean) / mean);
                buf[i] = nw[i];
            }
            const double tot = pairwise_sum(buf);
            for (int i = 0; i < n; ++i)
                if (!frozen[i]) nw[i] *= free_volume / tot;
            const double val = quad_form(K, nw);
            if (val <= cur) {
                w = nw;
                cur = val;
                rate = std::min(eta * 1.5, 1e6);
                accepted = true;
            } else {
                eta *= 0.5;
            }
        }
        // a failure here is round-off near the optimum; keep the rate for the next kernel
        if (!accepted) return;
    }
}

double trace_drift(const StaticSystem& s)
{
    if (!s.model.kernel.trace_constraint) return 0.0;
    double d = 0.0;
    for (const auto& p : s.measure.points)
        d = std::max(d, std::abs(p.matrix.trace().real() - s.model.kernel.trace_constant));
    return d;
}

} // namespace

StaticSystem minimize(const StaticSystem& start, const OptimizeOptions& opt, OptimizeReport* report)
{
    check_system(start);
    StaticSystem s = start;
    OptimizeReport rep;
    const double volume = s.measure.volume();
    std::mt19937_64 rng(opt.seed);
    double rate = opt.weight_rate;
    double alpha = -1.0;
    std::vector<Mat> prev_x, prev_g;
    std::vector<char> frozen(s.size(), 0);
    for (int i : opt.frozen) {
        if (i < 0 || i >= s.size()) throw Error(ErrorKind::schema, "minimize: frozen index out of range");
        frozen[i] = 1;
    }

    State st = evaluate(s, opt.exec);
    double cur = quad_form(st.K, s.measure.weights);
    rep.action_initial = cur;
    rep.history.push_back(cur);

    for (int it = 0; it < opt.iterations; ++it) {
        rep.iterations = it + 1;
        // weights, kernel fixed
        weight_steps(st.K, s.measure.weights, frozen, rate, opt.weight_inner);
        // prune atoms that carry no weight
        std::vector<int> keep;
        for (int i = 0; i < s.size(); ++i)
            if (frozen[i] || s.weight(i) > opt.prune * volume) keep.push_back(i);
        if (static_cast<int>(keep.size()) < s.size()) {
            StaticSystem t = s;
            t.measure.points.clear();
            t.measure.weights.clear();
            std::vector<int> where(s.size(), -1);
            std::vector<char> fz;
            for (int i : keep) {
                where[i] = t.size();
                t.measure.points.push_back(s.point(i));
                t.measure.weights.push_back(s.weight(i));
                fz.push_back(frozen[i]);
            }
            std::vector<int> inner;
            for (int i : s.inner_region)
                if (where[i] >= 0) inner.push_back(where[i]);
            t.inner_region = inner;
            // pruned atoms carry at most prune * volume; restore the free volume
            std::vector<double> fw, lost;
            for (int i = 0; i < s.size(); ++i) (where[i] >= 0 ? fw : lost).push_back(frozen[i] ? 0.0 : s.weight(i));
            const double free_before = pairwise_sum(fw) + pairwise_sum(lost), free_after = pairwise_sum(fw);
            frozen = fz;
            for (int i = 0; i < t.size(); ++i)
                if (!frozen[i]) t.measure.weights[i] *= free_before / free_after;
            rep.pruned += s.size() - t.size();
            s = std::move(t);
            st = evaluate(s, opt.exec);
            prev_x.clear();
            alpha = -1.0;
        }
        const double wcur = quad_form(st.K, s.measure.weights);
        if (wcur > cur * (1.0 + 1e-14)) rep.monotone = false;
        cur = wcur;

        // stationarity
        const int n = s.size();
        const double scale = cur / volume;
        RVec ell = RVec::Zero(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) ell(i) += st.K(i, j) * s.weight(j);
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (int i = 0; i < n; ++i)
            if (!frozen[i]) {
                lo = std::min(lo, ell(i));
                hi = std::max(hi, ell(i));
            }
        rep.weight_stationarity = hi > lo ? (hi - lo) / scale : 0.0;
        for (int i = 0; i < n; ++i)
            if (frozen[i]) st.grad[i].setZero();
        double gnorm2 = 0.0, pst = 0.0;
        for (int i = 0; i < n; ++i) {
            gnorm2 += s.weight(i) * st.grad[i].squaredNorm();
            pst = std::max(pst, st.grad[i].norm() * op_norm(s.point(i).matrix) / scale);
        }
        rep.point_stationarity = pst;
        if (std::max(rep.weight_stationarity, rep.point_stationarity) < opt.tolerance) break;

        // point step along the projected gradient, Barzilai-Borwein initial step
        std::vector<Mat> cur_x(n);
        for (int i = 0; i < n; ++i) cur_x[i] = s.point(i).matrix;
        if (!prev_x.empty() && static_cast<int>(prev_x.size()) == n) {
            double ss = 0.0, sy = 0.0;
            for (int i = 0; i < n; ++i) {
                Mat dx = cur_x[i] - prev_x[i], dg = st.grad[i] - prev_g[i];
                ss += s.weight(i) * dx.squaredNorm();
                sy += s.weight(i) * frob_dot(dx, dg);
            }
            if (sy > 0.0) alpha = ss / sy;
        }
        if (!(alpha > 0.0)) {
            double xn = 0.0;
            for (int i = 0; i < n; ++i) xn = std::max(xn, op_norm(cur_x[i]));
            alpha = opt.point_step * xn / std::max(std::sqrt(gnorm2 / volume), 1e-300);
        }
        std::vector<Mat> kick(n);
        const bool annealing = opt.anneal > 0.0 && it < opt.anneal_steps;
        for (int i = 0; i < n; ++i) {
            kick[i] = Mat::Zero(cur_x[i].rows(), cur_x[i].cols());
            if (annealing && !frozen[i]) {
                const double temp = opt.anneal * (1.0 - static_cast<double>(it) / opt.anneal_steps);
                kick[i] = temp * op_norm(cur_x[i]) * project_tangent(s.point(i), random_hermitian(cur_x[i].rows(), rng),
                                                                      s.model.kernel);
            }
        }
        bool accepted = false;
        for (int tries = 0; tries < 40 && !accepted; ++tries) {
            StaticSystem trial = s;
            bool feasible = true;
            try {
                for (int i = 0; i < n; ++i)
                    if (!frozen[i])
                        trial.measure.points[i] = retract(cur_x[i] - alpha * st.grad[i] + kick[i], s.model.kernel);
            } catch (const Error&) {
                feasible = false;
                ++rep.rejected;
            }
            if (feasible) {
                const double val = action(trial, self_table(trial, opt.exec));
                if (val <= cur - 1e-4 * alpha * 2.0 * gnorm2 && std::isfinite(val)) {
                    prev_x = cur_x;
                    prev_g = st.grad;
                    s = std::move(trial);
                    st = evaluate(s, opt.exec);
                    const double nv = quad_form(st.K, s.measure.weights);
                    if (nv > cur * (1.0 + 1e-14)) rep.monotone = false;
                    cur = nv;
                    accepted = true;
                    break;
                }
            }
            alpha *= 0.5;
            for (auto& k : kick) k *= 0.5;
        }
        rep.history.push_back(cur);
        // stalled at the noise level of the quadrature
        const std::size_t hs = rep.history.size();
        if (opt.stall > 0 && hs > static_cast<std::size_t>(opt.stall) &&
            rep.history[hs - 1 - opt.stall] - cur <= 1e-14 * std::abs(cur))
            break;
        if (!accepted) {
            // no decrease along the gradient at any step size: stationary up to round-off
            alpha = -1.0;
            prev_x.clear();
            if (rep.weight_stationarity < opt.tolerance) break;
        }
    }
    if (opt.calibrate) s = calibrate_s(s);
    rep.action_final = action(s);
    rep.volume_drift = std::abs(s.measure.volume() - volume);
    rep.trace_drift = trace_drift(s);
    if (report) *report = rep;
    return s;
}

} // namespace cvp
