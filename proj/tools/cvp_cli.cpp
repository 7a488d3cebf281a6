// cvp: command line front end. Every command writes a JSON report (stdout or
// --out) and optionally a CSV series (--csv).
#include "cvp/build.hpp"
#include "cvp/io.hpp"
#include "cvp/lingrav.hpp"
#include "cvp/numeric.hpp"
#include "cvp/optimize.hpp"
#include "cvp/schwarzschild.hpp"
#include "cvp/verify.hpp"

#include <CLI11.hpp>
#include <fmt/core.h>

#include <cstdlib>
#include <functional>
#include <iostream>
#include <optional>
#include <random>

using namespace cvp;
using io::json;

namespace {

struct Output {
    json report = json::object();
    std::optional<io::Table> csv;
    bool ok = true;
    ErrorKind failure = ErrorKind::invariant;
    std::string message;
};

struct Globals {
    std::string config_path, out, csv;
    int threads = 0;
    std::optional<std::uint64_t> seed;
    std::optional<double> tolerance;
    json config = json::object();
};

Globals G;

template <class T>
T cfg(const std::string& section, const std::string& key, const T& fallback)
{
    if (G.config.contains(section)) return io::value_or<T>(G.config.at(section), key, fallback);
    return fallback;
}

std::uint64_t seed_or(const std::string& section, std::uint64_t fallback)
{
    if (G.seed) return *G.seed;
    return cfg<std::uint64_t>(section, "seed", io::value_or<std::uint64_t>(G.config, "seed", fallback));
}

double tolerance_or(const std::string& section, double fallback)
{
    if (G.tolerance) return *G.tolerance;
    return cfg<double>(section, "tolerance", io::value_or<double>(G.config, "tolerance", fallback));
}

void fail_if(Output& o, bool bad, const std::string& why, ErrorKind kind = ErrorKind::invariant)
{
    if (bad && o.ok) {
        o.ok = false;
        o.failure = kind;
        o.message = why;
    }
}

json vec(const RVec& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Exhaustion default_exhaustion(const StaticSystem& s, const Mat& center) { return exhaustion_by_radius(s, center); }

double scale_of(const StaticSystem& st, const StaticSystem& s, const PairTable& cross)
{
    const RMat K = cross.kappa(s.kappa());
    const RVec nt = weighted_rows(K, s.measure.weights);
    const RVec n = weighted_rows(K.transpose(), st.measure.weights);
    double a = 0.0;
    for (int i = 0; i < st.size(); ++i) a += st.weight(i) * std::abs(nt(i) - s.s_param);
    for (int j = 0; j < s.size(); ++j) a += s.weight(j) * std::abs(n(j) - s.s_param);
    // critical pairs have n close to s everywhere; keep a floor at the size of the constraint term
    return a + s.s_param * std::min(s.measure.volume(), st.measure.volume());
}

std::pair<StaticSystem, StaticSystem> load_pair(const std::string& a, const std::string& b)
{
    StaticSystem s = io::load_system(a), st = io::load_system(b);
    check_compatible(s, st);
    return {std::move(s), std::move(st)};
}

Mat commutant_element(const StaticGroup& g, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    Mat a = Mat::Zero(g.dim(), g.dim());
    for (const auto& b : commutant_basis(g)) a += normal(rng) * b;
    return a;
}

// ---- system

struct SystemArgs {
    std::string system, save;
    int points = 8, ambient = 4, spin = 1;
    double kappa = 0.1, trace = 1.0, volume = 1.0, lambda = 1.0, sigma = 1.0;
};

Output system_validate(const SystemArgs& a)
{
    Output o;
    const StaticSystem s = io::load_system(a.system);
    const auto& g = s.model.group;
    o.report = {{"command", "system validate"}, {"points", s.size()},          {"ambient_dim", g.dim()},
                {"spin_dim", s.model.kernel.spin_dimension}, {"kappa", s.kappa()}, {"s_param", s.s_param},
                {"volume", s.measure.volume()},  {"period", g.period},          {"central", g.central},
                {"inner_region", s.inner_region}};
    fail_if(o, g.central, "generator is central: the static reduction needs a non-trivial time evolution");
    return o;
}

Output system_build(const SystemArgs& a)
{
    SystemSpec sp;
    sp.points = cfg("system", "points", a.points);
    sp.ambient = cfg("system", "ambient", a.ambient);
    sp.spin = cfg("system", "spin", a.spin);
    sp.kappa = cfg("system", "kappa", a.kappa);
    sp.trace = cfg("system", "trace", a.trace);
    sp.volume = cfg("system", "volume", a.volume);
    sp.seed = seed_or("system", 1);
    const StaticSystem s = calibrate_s(random_system(sp));
    if (!a.save.empty()) io::save_system(a.save, s);
    Output o;
    o.report = {{"command", "system build"}, {"points", s.size()},     {"ambient_dim", sp.ambient},
                {"seed", sp.seed},           {"s_param", s.s_param},   {"action", action(s)},
                {"saved", a.save}};
    return o;
}

Output system_perturb(const SystemArgs& a)
{
    const StaticSystem s = io::load_system(a.system);
    const StaticSystem st = verify::partner_system(s, seed_or("system", 1));
    if (!a.save.empty()) io::save_system(a.save, st);
    Output o;
    o.report = {{"command", "system perturb"}, {"points", st.size()}, {"volume", st.measure.volume()}, {"saved", a.save}};
    return o;
}

Output system_rescale(const SystemArgs& a)
{
    const StaticSystem s = io::load_system(a.system);
    const RescaleResult r = rescale(s, a.lambda, a.sigma);
    if (!a.save.empty()) io::save_system(a.save, r.system);
    Output o;
    o.report = {{"command", "system rescale"},     {"lambda", a.lambda},   {"sigma", a.sigma},
                {"trace_constant", r.trace_constant}, {"s_param", r.s_param}, {"saved", a.save}};
    return o;
}

// ---- measure

struct PairArgs {
    std::string a, b, jet, save;
    int center = 0;
    std::vector<int> inner_a, inner_b;
    bool inner_given = false;
    double theta = 1.0;
    bool generic = false;
};

Output measure_el(const PairArgs& a)
{
    const StaticSystem s = io::load_system(a.a);
    const ElResidual r = el_residual(s);
    const double scale = action_scale(s), tol = tolerance_or("measure", 1e-4);
    Output o;
    o.report = {{"command", "measure el-residual"}, {"scalar", r.scalar},     {"derivative", r.derivative},
                {"total", r.total},                 {"minimum", r.minimum},   {"argmin", r.argmin},
                {"action_scale", scale},            {"relative", r.total / scale}, {"tolerance", tol}};
    fail_if(o, r.total > tol * scale, fmt::format("EL residual {:.3e} exceeds {:.1e} of the action scale", r.total / scale, tol));
    return o;
}

Output measure_corr(const PairArgs& a)
{
    const auto [s, st] = load_pair(a.a, a.b);
    const CorrelationData c = correlations(s, st);
    Output o;
    o.report = {{"command", "measure correlations"}, {"n", vec(c.n_values)}, {"n_tilde", vec(c.n_tilde_values)},
                {"nu", vec(c.nu_weights)},           {"nu_tilde", vec(c.nu_tilde_weights)}};
    io::Table t{{"system", "index", "n", "nu_weight"}, {}};
    for (int i = 0; i < c.n_values.size(); ++i) t.rows.push_back({0, double(i), c.n_values(i), c.nu_weights(i)});
    for (int i = 0; i < c.n_tilde_values.size(); ++i)
        t.rows.push_back({1, double(i), c.n_tilde_values(i), c.nu_tilde_weights(i)});
    o.csv = t;
    return o;
}

// ---- mass: --a is the reference system, --b the tilde system

Output mass_compute(const PairArgs& a, bool matched_only)
{
    const auto [s, st] = load_pair(a.a, a.b);
    const PairTable cross = cross_table(st, s);
    const Mat& c = s.point(a.center).matrix;
    const Exhaustion e = default_exhaustion(s, c), et = default_exhaustion(st, c);
    const double scale = scale_of(st, s, cross), tol = tolerance_or("mass", 1e-10);
    const double spatial = spatial_integral_form(st, s, cross);
    Output o;
    io::Table t{{"cut", "volume", "volume_tilde", "partial"}, {}};
    if (matched_only) {
        const MassReport m = total_mass_matched(st, s, e, et, cross);
        o.report = {{"command", "mass matched"}, {"value", m.value}, {"spatial", spatial},
                    {"cauchy_gap", m.cauchy_gap}, {"converged", m.converged}};
        for (std::size_t k = 0; k < m.partials.size(); ++k)
            t.rows.push_back({double(k), m.volume[k], m.volume_tilde[k], m.partials[k]});
        fail_if(o, std::abs(m.value - spatial) > tol * scale, "matched limit disagrees with the spatial form");
    } else {
        const MassReport g = total_mass_general(st, s, e, et, cross);
        o.report = {{"command", "mass compute"},       {"value", spatial},         {"general", g.value},
                    {"reversed_gap", g.reversed_gap},  {"cauchy_gap", g.cauchy_gap}, {"converged", g.converged},
                    {"volume", s.measure.volume()},    {"volume_tilde", st.measure.volume()}, {"scale", scale}};
        for (std::size_t k = 0; k < g.partials.size(); ++k)
            t.rows.push_back({double(k), g.volume[k], g.volume_tilde[k], g.partials[k]});
        fail_if(o, std::abs(g.value - spatial) > tol * scale, "general and spatial mass forms disagree");
        if (std::abs(s.measure.volume() - st.measure.volume()) <= 1e-12 * s.measure.volume()) {
            const double m = total_mass_matched(st, s, e, et, cross).value;
            o.report["matched"] = m;
            fail_if(o, std::abs(m - spatial) > tol * scale, "matched and spatial mass forms disagree");
        }
    }
    o.csv = t;
    return o;
}

Output mass_excised(const PairArgs& a)
{
    const auto [s, st] = load_pair(a.a, a.b);
    const auto in = a.inner_given ? a.inner_a : s.inner_region;
    const auto in_t = a.inner_given ? a.inner_b : st.inner_region;
    const ExcisionReport r = excision_identity(st, s, in_t, in);
    const double scale = scale_of(st, s, cross_table(st, s)) + std::abs(r.correction);
    const double tol = tolerance_or("mass", 1e-10);
    Output o;
    o.report = {{"command", "mass excised"}, {"excised", r.excised}, {"mass", r.mass},
                {"correction", r.correction}, {"gap", r.gap},        {"relative_gap", r.gap / scale}};
    fail_if(o, r.gap > tol * scale, "excision identity violated");
    return o;
}

Output mass_unitary(const PairArgs& a)
{
    const auto [s, st] = load_pair(a.a, a.b);
    const std::uint64_t seed = seed_or("mass", 1);
    Mat w;
    if (a.generic) {
        std::mt19937_64 rng(seed);
        w = random_unitary(s.model.group.dim(), rng);
    } else {
        w = unitary_from(commutant_element(s.model.group, seed), a.theta);
    }
    const UnitaryReport r = unitary_invariance_check(st, s, w);
    const double tol = tolerance_or("mass", s.model.quad.rel_tol);
    const double rel = r.gap / scale_of(st, s, cross_table(st, s));
    Output o;
    o.report = {{"command", "mass unitary-check"}, {"mass", r.mass},         {"mass_transformed", r.mass_transformed},
                {"gap", r.gap},                    {"relative_gap", rel},     {"commutator", r.commutator},
                {"static", r.static_w},            {"table_change", r.table_change}};
    fail_if(o, r.static_w && rel > tol, "mass changed under a unitary commuting with the time evolution");
    return o;
}

// ---- jets

struct JetArgs {
    std::string system, jet, source, save;
    int center = 0, ends = 3;
};

Output jets_gamma(const JetArgs& a)
{
    const StaticSystem s = io::load_system(a.system);
    const Jet u = io::load_jet(a.jet);
    check_jet(u, s);
    const Exhaustion e = default_exhaustion(s, s.point(a.center).matrix);
    const PairTable k = self_table(s);
    const JetTable t = jet_table(s, u);
    io::Table tab{{"cut", "volume", "gamma"}, {}};
    json g = json::array();
    for (std::size_t c = 0; c < e.cut_points.size(); ++c) {
        const double v = gamma_sli(s, membership(s, e, e.cut_points[c]), u, t, k);
        tab.rows.push_back({double(c), e.cut_points[c], v});
        g.push_back(v);
    }
    Output o;
    o.report = {{"command", "jets gamma"}, {"gamma", g}, {"fd_tolerance", fd_tolerance(s, k, t, {})}};
    o.csv = tab;
    return o;
}

Output jets_conservation(const JetArgs& a)
{
    const StaticSystem s = io::load_system(a.system);
    const Jet u = a.jet.empty() ? commutator_jet(commutant_element(s.model.group, seed_or("jets", 1)), s)
                                : io::load_jet(a.jet);
    check_jet(u, s);
    const Exhaustion e = default_exhaustion(s, s.point(a.center).matrix);
    const ConservationReport r = conservation_check(s, u, e);
    io::Table tab{{"cut", "volume", "gamma", "expected", "gap"}, {}};
    for (std::size_t c = 0; c < r.gap.size(); ++c)
        tab.rows.push_back({double(c), r.volumes[c], r.gamma[c], r.expected[c], r.gap[c]});
    const double factor = tolerance_or("jets", 10.0);
    Output o;
    o.report = {{"command", "jets conservation"}, {"max_gap", r.max_gap}, {"fd_tolerance", r.fd_tolerance},
                {"residual", r.residual},         {"gap_over_fd", r.max_gap / r.fd_tolerance}};
    o.csv = tab;
    fail_if(o, r.max_gap > factor * r.fd_tolerance,
            fmt::format("conservation gap {:.3e} exceeds {} x FD tolerance", r.max_gap, factor));
    return o;
}

Output jets_divsolve(const JetArgs& a)
{
    const StaticSystem s = io::load_system(a.system);
    const int n = s.size();
    RVec src(n);
    if (a.source.empty()) {
        std::mt19937_64 rng(seed_or("jets", 1));
        for (int i = 0; i < n; ++i) src(i) = normal(rng);
    } else {
        const json j = io::read_json(a.source);
        if (!j.is_array() || static_cast<int>(j.size()) != n) throw Error(ErrorKind::schema, "source: need one number per point");
        for (int i = 0; i < n; ++i) src(i) = j[i].get<double>();
    }
    std::vector<int> ends;
    if (a.ends > 0) {
        const auto r = radii_from(s, s.point(a.center).matrix);
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](int p, int q) { return r[p] > r[q]; });
        ends.assign(order.begin(), order.begin() + std::min(a.ends, n));
    }
    const Graph g = knn_graph(s, -1, ends);
    const DivergenceSolution sol = solve_divergence(src, g);
    double wa = 0.0;
    for (int i = 0; i < n; ++i) wa += g.node_weight[i] * src(i);
    const double flux = boundary_flux(sol.field, g), tol = tolerance_or("jets", 1e-10);
    Output o;
    o.report = {{"command", "jets divsolve"}, {"residual", sol.residual}, {"flux", flux},
                {"weighted_source", wa},      {"ends", ends},            {"edges", g.edges.size()}};
    io::Table tab{{"edge", "from", "to", "flow"}, {}};
    for (std::size_t e = 0; e < g.edges.size(); ++e)
        tab.rows.push_back({double(e), double(g.edges[e].first), double(g.edges[e].second), sol.field.flow[e]});
    o.csv = tab;
    fail_if(o, sol.residual > tol, "divergence residual above tolerance");
    fail_if(o, std::abs(flux - wa) > tol, "boundary flux differs from the weighted source");
    return o;
}

Output jets_commutator(const JetArgs& a)
{
    const StaticSystem s = io::load_system(a.system);
    const Mat am = commutant_element(s.model.group, seed_or("jets", 1));
    const Jet u = commutator_jet(am, s);
    if (!a.save.empty()) io::save_jet(a.save, u);
    Output o;
    o.report = {{"command", "jets commutator"}, {"generator", io::matrix_to_json(am)}, {"saved", a.save}};
    return o;
}

// ---- lingrav

struct LinArgs {
    std::string system, jet, save;
    std::optional<double> ell_inf;
    double g = 1.0, h = 1e-3;
    int center = 0;
    std::string minus, plus, tilde_minus, tilde_plus;
};

double ell_inf_of(const LinArgs& a, const StaticSystem& s) { return a.ell_inf ? *a.ell_inf : compatible_ell_infinity(s); }

Output lingrav_solve(const LinArgs& a)
{
    const StaticSystem s = io::load_system(a.system);
    const double li = ell_inf_of(a, s);
    const LinGravSolution sol = solve_lingrav(s, li);
    if (!a.save.empty()) io::save_jet(a.save, sol.v);
    const double tol = tolerance_or("lingrav", 1e-6);
    Output o;
    o.report = {{"command", "lingrav solve"}, {"ell_infinity", li},   {"relative_residual", sol.relative},
                {"rhs_norm", sol.rhs_norm},   {"rank", sol.rank},     {"columns", sol.columns},
                {"saved", a.save}};
    fail_if(o, sol.relative > tol, fmt::format("relative residual {:.2e} above {:.0e}", sol.relative, tol));
    return o;
}

Output lingrav_check(const LinArgs& a)
{
    const StaticSystem s = io::load_system(a.system);
    const double li = ell_inf_of(a, s);
    const Jet v = a.jet.empty() ? solve_lingrav(s, li).v : io::load_jet(a.jet);
    const Exhaustion e = default_exhaustion(s, s.point(a.center).matrix);
    const InhomReport r = prposinhom_check(s, v, e, li);
    io::Table tab{{"cut", "volume", "gamma", "ell_sum", "gap", "bound"}, {}};
    for (std::size_t k = 0; k < r.gap.size(); ++k)
        tab.rows.push_back({double(k), r.volumes[k], r.gamma[k], r.ell_sum[k], r.gap[k], r.bound[k]});
    Output o;
    o.report = {{"command", "lingrav check"}, {"ell_infinity", li}, {"max_gap", r.max_gap},
                {"residual", r.residual},     {"fd_tolerance", r.fd_tolerance}, {"within_bound", r.within_bound}};
    o.csv = tab;
    fail_if(o, !r.within_bound, "surface layer identity gap exceeds residual x volume + 10 x FD tolerance");
    return o;
}

Output lingrav_mass_identity(const LinArgs& a)
{
    const StaticSystem s = io::load_system(a.system);
    const RVec l = ell_values(s, self_table(s));
    const double li = a.ell_inf ? *a.ell_inf : l.minCoeff();
    const double m = mass_identity(s, a.g, li);
    const LocalEnergy le = local_energy_check(s, li);
    const double scale = action_scale(s) * s.measure.volume();
    Output o;
    o.report = {{"command", "lingrav mass-identity"}, {"g", a.g},  {"ell_infinity", li}, {"mass", m},
                {"local_energy", le.holds},           {"margin", le.margin}, {"scale", scale}};
    fail_if(o, le.holds && a.g > 0 && m < -1e-12 * scale, "negative mass under the local energy condition");
    return o;
}

Output lingrav_kappa_family(const LinArgs& a)
{
    const StaticSystem s = io::load_system(a.system);
    const Exhaustion e = default_exhaustion(s, s.point(a.center).matrix);
    Family f, ft;
    if (!a.minus.empty()) {
        if (a.plus.empty() || a.tilde_minus.empty() || a.tilde_plus.empty())
            throw Error(ErrorKind::schema, "kappa-family: give all four family files or none");
        f.h = ft.h = a.h;
        f.minus = {io::load_system(a.minus)};
        f.plus = {io::load_system(a.plus)};
        ft.minus = {io::load_system(a.tilde_minus)};
        ft.plus = {io::load_system(a.tilde_plus)};
    } else {
        std::mt19937_64 rng(seed_or("lingrav", 5));
        const int dim = s.point(0).dim();
        const Mat b1 = random_hermitian(dim, rng), b2 = random_hermitian(dim, rng);
        auto family = [&](const Mat& b) {
            return sample_family(
                s,
                [&](double t, const Mat& x) {
                    return retract(x + t * 0.1 * (b * x + x * b) + t * t * 0.05 * b * x * b, s.model.kernel).matrix;
                },
                a.h);
        };
        f = family(b1);
        ft = family(b2);
    }
    const KappaFamilyReport r = kappa_family_consistency(s, ft, s, f, a.g, e);
    io::Table tab{{"tau", "nonlinear", "linear", "error"}, {}};
    for (std::size_t k = 0; k < r.tau.size(); ++k) tab.rows.push_back({r.tau[k], r.nonlinear[k], r.linear[k], r.error[k]});
    Output o;
    o.report = {{"command", "lingrav kappa-family"}, {"order", r.order}, {"ratio", r.ratio},
                {"derivative_gap", r.derivative_gap}};
    o.csv = tab;
    fail_if(o, r.order < tolerance_or("lingrav", 1.8), fmt::format("measured order {:.3f} below 1.8", r.order));
    return o;
}

// ---- schwarzschild

struct SchwArgs {
    std::string profile = "gaussian", shape = "smooth";
    double width = 1.0, scale = 1.0, mass_s = 1.0, R = 15.0, r_min = 0.0, radius = 2.0, omega = 12.0;
    std::vector<double> radii{10, 12.5, 15, 17.5, 20}, windows{10, 20, 40}, tensor{3, -1, -1, -1}, center{0, 0, 0};
};

schw::Profile profile_of(const SchwArgs& a)
{
    return schw::Profile::parse(cfg<std::string>("schwarzschild", "profile", a.profile),
                                cfg("schwarzschild", "width", a.width), cfg("schwarzschild", "scale", a.scale));
}

Output schw_mass(const SchwArgs& a)
{
    const auto p = profile_of(a);
    const double closed = schw::mass_closed_form(p, a.mass_s), c = schw::constant_c(p);
    io::Table tab{{"R", "mass"}, {}};
    double gap = 0.0, lo = INFINITY, hi = -INFINITY;
    for (double R : a.radii) {
        const double m = schw::mass_MR(R, p, a.mass_s);
        tab.rows.push_back({R, m});
        gap = std::max(gap, std::abs(m - closed));
        lo = std::min(lo, m);
        hi = std::max(hi, m);
    }
    const double tol = tolerance_or("schwarzschild", 1e-3);
    const double denom = std::max(std::abs(closed), 1e-300);
    Output o;
    o.report = {{"command", "schwarzschild mass"}, {"profile", p.name()}, {"c", c},
                {"mass_closed_form", closed},     {"agreement_gap", gap}, {"relative_gap", closed == 0 ? gap : gap / denom},
                {"drift", hi - lo}};
    o.csv = tab;
    fail_if(o, closed != 0 && gap > tol * denom, "M(R) does not agree with the closed form");
    return o;
}

Output schw_constant(const SchwArgs& a)
{
    const auto p = profile_of(a);
    Output o;
    o.report = {{"command", "schwarzschild constant-c"}, {"profile", p.name()}, {"width", p.width}, {"c", schw::constant_c(p)}};
    return o;
}

Output schw_averaging(const SchwArgs& a)
{
    const auto p = profile_of(a);
    io::Table tab{{"window", "lhs", "t1", "t2", "t3", "t4", "gap", "full_gap"}, {}};
    for (double L : a.windows) {
        const auto r = schw::averaging_check(p, a.R, L, a.r_min);
        tab.rows.push_back({L, r.lhs, r.t1, r.t2, r.t3, r.t4, r.gap, r.full_gap});
    }
    Output o;
    o.report = {{"command", "schwarzschild averaging"}, {"profile", p.name()}, {"R", a.R}};
    if (p.scale > 0 && a.windows.size() >= 2) {
        const double k = schw::averaging_exponent(p, a.R, a.windows, a.r_min);
        o.report["exponent"] = k;
    }
    o.csv = tab;
    return o;
}

Output schw_tracefree(const SchwArgs& a)
{
    const auto p = profile_of(a);
    schw::MetricPerturbation h;
    if (a.tensor.size() == 4)
        h.tensor = Eigen::Vector4d(a.tensor[0], a.tensor[1], a.tensor[2], a.tensor[3]).asDiagonal();
    else if (a.tensor.size() == 16)
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) h.tensor(r, c) = a.tensor[4 * r + c];
    else
        throw Error(ErrorKind::schema, "tracefree: --tensor takes 4 diagonal or 16 row-major entries");
    if (a.center.size() != 3) throw Error(ErrorKind::schema, "tracefree: --center takes 3 numbers");
    h.center = schw::Vec3(a.center[0], a.center[1], a.center[2]);
    h.radius = a.radius;
    if (a.shape == "indicator")
        h.shape = schw::Shape::indicator;
    else if (a.shape == "smooth")
        h.shape = schw::Shape::smooth;
    else if (a.shape == "bump")
        h.shape = schw::Shape::bump;
    else
        throw Error(ErrorKind::schema, "tracefree: unknown shape '" + a.shape + "'");
    const auto r = schw::tracefree_vanishing(h, p, a.omega);
    schw::MetricPerturbation ctrl = h;
    ctrl.tensor = schw::Mat4::Identity();
    const double control = schw::tracefree_vanishing(ctrl, p, a.omega).integral;
    const double ratio = std::abs(r.integral) / std::abs(control);
    Output o;
    o.report = {{"command", "schwarzschild tracefree"}, {"integral", r.integral}, {"trace", r.trace},
                {"control", control},                  {"ratio", ratio},        {"min_r0", r.min_r0}};
    fail_if(o, std::abs(r.trace) <= 1e-14 && ratio > tolerance_or("schwarzschild", 1e-3),
            "trace-free perturbation gives a non-vanishing contribution");
    return o;
}

// ---- optimize

struct OptArgs {
    std::string system, save;
    int points = 8, ambient = 4, iterations = 2000, anneal_steps = 0;
    double kappa = 0.1, anneal = 0.0;
    std::vector<int> frozen;
};

Output optimize_run(const OptArgs& a)
{
    StaticSystem s0;
    const std::uint64_t seed = seed_or("optimize", 1);
    if (!a.system.empty()) {
        s0 = io::load_system(a.system);
    } else {
        SystemSpec sp;
        sp.points = cfg("optimize", "points", a.points);
        sp.ambient = cfg("optimize", "ambient", a.ambient);
        sp.kappa = cfg("optimize", "kappa", a.kappa);
        sp.seed = seed;
        s0 = random_system(sp);
    }
    OptimizeOptions o;
    o.iterations = cfg("optimize", "iterations", a.iterations);
    o.anneal = cfg("optimize", "anneal", a.anneal);
    o.anneal_steps = cfg("optimize", "anneal_steps", a.anneal_steps);
    o.point_step = cfg("optimize", "point_step", o.point_step);
    o.weight_rate = cfg("optimize", "weight_rate", o.weight_rate);
    o.seed = seed;
    o.frozen = cfg("optimize", "frozen", a.frozen);
    if (!o.frozen.empty() && a.system.empty()) s0.inner_region = o.frozen;
    OptimizeReport r;
    const StaticSystem s = minimize(s0, o, &r);
    if (!a.save.empty()) io::save_system(a.save, s);
    const double res = el_residual(s).total / action_scale(s);
    const double tol = tolerance_or("optimize", 1e-4);
    Output out;
    out.report = {{"command", "optimize run"},      {"points", s.size()},
                  {"action_initial", r.action_initial}, {"action_final", r.action_final},
                  {"iterations", r.iterations},     {"rejected", r.rejected},
                  {"pruned", r.pruned},             {"weight_stationarity", r.weight_stationarity},
                  {"point_stationarity", r.point_stationarity}, {"el_residual", res},
                  {"volume_drift", r.volume_drift}, {"trace_drift", r.trace_drift},
                  {"monotone", r.monotone},         {"s_param", s.s_param},
                  {"saved", a.save}};
    io::Table tab{{"iteration", "action"}, {}};
    for (std::size_t k = 0; k < r.history.size(); ++k) tab.rows.push_back({double(k), r.history[k]});
    out.csv = tab;
    fail_if(out, r.volume_drift > 1e-12 || r.trace_drift > 1e-12, "constraints drifted");
    // frozen bodies are not critical in their own position; only the free part is judged
    if (o.frozen.empty())
        fail_if(out, res > tol, fmt::format("EL residual {:.2e} of the action scale above {:.0e}", res, tol),
                ErrorKind::convergence);
    return out;
}

// ---- verify

struct VerifyArgs {
    std::string suite = "desk", fixtures;
    std::vector<int> only;
};

Output verify_all(const VerifyArgs& a)
{
    if (a.suite != "desk") throw Error(ErrorKind::schema, "verify: the only suite is 'desk'");
    verify::SuiteOptions opt;
    opt.fixtures = a.fixtures;
#ifdef CVP_FIXTURE_DIR
    if (opt.fixtures.empty()) opt.fixtures = CVP_FIXTURE_DIR;
#endif
    opt.only = a.only;
    std::vector<verify::Check> checks;
    for (int id = 1; id <= verify::criteria; ++id) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
        checks.push_back(verify::run_check(id, opt));
        std::cerr << verify::summary_line(checks.back()) << std::endl;
    }
    Output o;
    o.report = verify::to_json(checks);
    bool all = true;
    for (const auto& c : checks) all = all && c.passed;
    fail_if(o, !all, "some acceptance checks failed");
    return o;
}

void emit(const Output& o)
{
    if (G.out.empty())
        std::cout << o.report.dump(2) << '\n';
    else
        io::write_json(G.out, o.report);
    if (o.csv && !G.csv.empty()) io::write_csv(G.csv, *o.csv);
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"cvp: causal variational principles on finite static measures"};
    app.footer("Exit codes:\n  0  success\n  2  schema error (bad input file, flag or missing file)\n"
               "  3  invariant violated (a checked identity or bound failed)\n  4  convergence failure\n"
               "Environment: CVP_THREADS sets the thread count when --threads is not given.");
    app.require_subcommand(1);
    app.fallthrough();
    app.add_option("--config", G.config_path, "run config (JSON)");
    app.add_option("--threads", G.threads, "worker threads");
    app.add_option("--seed", G.seed, "random seed");
    app.add_option("--tolerance", G.tolerance, "acceptance tolerance of the command");
    app.add_option("--out", G.out, "JSON report path (default stdout)");
    app.add_option("--csv", G.csv, "CSV series path");

    std::function<Output()> run;
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, std::function<Output()> f) {
        auto* c = parent->add_subcommand(name, help);
        c->callback([&run, f] { run = f; });
        return c;
    };

    SystemArgs sa;
    auto* sys = app.add_subcommand("system", "system files")->require_subcommand(1);
    auto* sv = leaf(sys, "validate", "check a system file", [&] { return system_validate(sa); });
    sv->add_option("--system", sa.system)->required();
    auto* sb = leaf(sys, "build", "random feasible system", [&] { return system_build(sa); });
    sb->add_option("--points", sa.points);
    sb->add_option("--ambient", sa.ambient);
    sb->add_option("--spin", sa.spin);
    sb->add_option("--kappa", sa.kappa);
    sb->add_option("--trace", sa.trace);
    sb->add_option("--volume", sa.volume);
    sb->add_option("--save", sa.save, "system output file");
    auto* sp = leaf(sys, "perturb", "nearby system with the same model and volume", [&] { return system_perturb(sa); });
    sp->add_option("--system", sa.system)->required();
    sp->add_option("--save", sa.save);
    auto* sr = leaf(sys, "rescale", "x -> lambda x, w -> sigma w", [&] { return system_rescale(sa); });
    sr->add_option("--system", sa.system)->required();
    sr->add_option("--lambda", sa.lambda);
    sr->add_option("--sigma", sa.sigma);
    sr->add_option("--save", sa.save);

    PairArgs pa;
    auto* meas = app.add_subcommand("measure", "functions of a measure")->require_subcommand(1);
    auto* me = leaf(meas, "el-residual", "EL residual against the test jets", [&] { return measure_el(pa); });
    me->add_option("--system,--a", pa.a)->required();
    auto* mc = leaf(meas, "correlations", "n, n~ and the correlation weights", [&] { return measure_corr(pa); });
    mc->add_option("--a", pa.a)->required();
    mc->add_option("--b", pa.b)->required();

    auto* mass = app.add_subcommand("mass", "total mass (--a reference, --b tilde system)")->require_subcommand(1);
    auto pair_opts = [&](CLI::App* c) {
        c->add_option("--a", pa.a)->required();
        c->add_option("--b", pa.b)->required();
        c->add_option("--center", pa.center, "index of the exhaustion center in --a");
    };
    pair_opts(leaf(mass, "compute", "general, spatial and matched forms", [&] { return mass_compute(pa, false); }));
    pair_opts(leaf(mass, "matched", "limit along equal-volume cuts", [&] { return mass_compute(pa, true); }));
    auto* mx = leaf(mass, "excised", "excision identity", [&] {
        pa.inner_given = !pa.inner_a.empty() || !pa.inner_b.empty();
        return mass_excised(pa);
    });
    pair_opts(mx);
    mx->add_option("--inner-a", pa.inner_a);
    mx->add_option("--inner-b", pa.inner_b);
    auto* mu = leaf(mass, "unitary-check", "invariance under W commuting with H", [&] { return mass_unitary(pa); });
    pair_opts(mu);
    mu->add_option("--theta", pa.theta);
    mu->add_flag("--generic", pa.generic, "use a non-commuting W (diagnostic)");

    JetArgs ja;
    auto* jets = app.add_subcommand("jets", "jets and surface layer integrals")->require_subcommand(1);
    auto* jg = leaf(jets, "gamma", "gamma^Omega along the exhaustion", [&] { return jets_gamma(ja); });
    jg->add_option("--system", ja.system)->required();
    jg->add_option("--jet", ja.jet)->required();
    jg->add_option("--center", ja.center);
    auto* jc = leaf(jets, "conservation", "conservation law (commutator jet if no --jet)", [&] { return jets_conservation(ja); });
    jc->add_option("--system", ja.system)->required();
    jc->add_option("--jet", ja.jet);
    jc->add_option("--center", ja.center);
    auto* jd = leaf(jets, "divsolve", "solve div v = a on the neighbour graph", [&] { return jets_divsolve(ja); });
    jd->add_option("--system", ja.system)->required();
    jd->add_option("--source", ja.source, "JSON array, one value per point (random if absent)");
    jd->add_option("--ends", ja.ends, "outermost atoms joined to the end (0: balanced source)");
    jd->add_option("--center", ja.center);
    auto* jm = leaf(jets, "commutator", "random commutator jet", [&] { return jets_commutator(ja); });
    jm->add_option("--system", ja.system)->required();
    jm->add_option("--save", ja.save);

    LinArgs la;
    auto* lin = app.add_subcommand("lingrav", "linearized gravity")->require_subcommand(1);
    auto lin_opts = [&](CLI::App* c) {
        c->add_option("--system", la.system)->required();
        c->add_option("--ell-inf", la.ell_inf);
        c->add_option("--center", la.center);
    };
    auto* ls = leaf(lin, "solve", "solve the linearized equations", [&] { return lingrav_solve(la); });
    lin_opts(ls);
    ls->add_option("--save", la.save, "solution jet");
    auto* lc = leaf(lin, "check", "surface layer identity for a solution", [&] { return lingrav_check(la); });
    lin_opts(lc);
    lc->add_option("--jet", la.jet);
    auto* lm = leaf(lin, "mass-identity", "g sum w (ell - ell_inf)", [&] { return lingrav_mass_identity(la); });
    lin_opts(lm);
    lm->add_option("--g", la.g);
    auto* lk = leaf(lin, "kappa-family", "nonlinear vs linearized mass along families", [&] { return lingrav_kappa_family(la); });
    lin_opts(lk);
    lk->add_option("--g", la.g);
    lk->add_option("--step", la.h, "family step h");
    lk->add_option("--minus", la.minus);
    lk->add_option("--plus", la.plus);
    lk->add_option("--tilde-minus", la.tilde_minus);
    lk->add_option("--tilde-plus", la.tilde_plus);

    SchwArgs wa;
    auto* sw = app.add_subcommand("schwarzschild", "explicit profile integrals")->require_subcommand(1);
    auto prof = [&](CLI::App* c) {
        c->add_option("--profile", wa.profile, "gaussian, exponential or bump");
        c->add_option("--width", wa.width);
        c->add_option("--scale", wa.scale);
    };
    auto* wm = leaf(sw, "mass", "M(R) and the closed form", [&] { return schw_mass(wa); });
    prof(wm);
    wm->add_option("--mass-s", wa.mass_s);
    wm->add_option("--radii", wa.radii);
    prof(leaf(sw, "constant-c", "the constant c", [&] { return schw_constant(wa); }));
    auto* wv = leaf(sw, "averaging", "averaging identity at finite windows", [&] { return schw_averaging(wa); });
    prof(wv);
    wv->add_option("--R", wa.R);
    wv->add_option("--r-min", wa.r_min);
    wv->add_option("--windows", wa.windows);
    auto* wt = leaf(sw, "tracefree", "contribution of a static perturbation", [&] { return schw_tracefree(wa); });
    prof(wt);
    wt->add_option("--tensor", wa.tensor, "4 diagonal or 16 row-major entries of h^i_j");
    wt->add_option("--shape", wa.shape, "indicator, smooth or bump");
    wt->add_option("--radius", wa.radius);
    wt->add_option("--center", wa.center);
    wt->add_option("--omega", wa.omega, "radius of Omega");

    OptArgs oa;
    auto* opt = app.add_subcommand("optimize", "minimize the static action")->require_subcommand(1);
    auto* orun = leaf(opt, "run", "projected descent from a start system", [&] { return optimize_run(oa); });
    orun->add_option("--system", oa.system, "start system (random if absent)");
    orun->add_option("--points", oa.points);
    orun->add_option("--ambient", oa.ambient);
    orun->add_option("--kappa", oa.kappa);
    orun->add_option("--iterations", oa.iterations);
    orun->add_option("--anneal", oa.anneal);
    orun->add_option("--anneal-steps", oa.anneal_steps);
    orun->add_option("--frozen", oa.frozen, "points kept fixed (bodies)");
    orun->add_option("--save", oa.save);

    VerifyArgs va;
    auto* ver = app.add_subcommand("verify", "acceptance checks")->require_subcommand(1);
    auto* vall = leaf(ver, "all", "run the acceptance suite", [&] { return verify_all(va); });
    vall->add_option("--suite", va.suite);
    vall->add_option("--fixtures", va.fixtures);
    vall->add_option("--only", va.only, "criterion ids");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(ErrorKind::schema);
    }

    try {
        if (!G.config_path.empty()) G.config = io::read_json(G.config_path);
        int threads = G.threads;
        if (threads <= 0) threads = io::value_or<int>(G.config, "threads", 0);
        if (threads <= 0)
            if (const char* env = std::getenv("CVP_THREADS")) threads = std::atoi(env);
        if (threads > 0) set_threads(threads);
        const Output o = run();
        emit(o);
        if (!o.ok) {
            std::cerr << "cvp: " << o.message << '\n';
            return static_cast<int>(o.failure);
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << "cvp: " << e.what() << '\n';
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "cvp: " << e.what() << '\n';
        return static_cast<int>(ErrorKind::schema);
    }
}
