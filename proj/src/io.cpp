#include "cvp/io.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

namespace cvp::io {

namespace {

[[noreturn]] void bad(const std::string& msg) { throw Error(ErrorKind::schema, msg); }

const json& field(const json& j, const char* key, const std::string& where)
{
    if (!j.is_object() || !j.contains(key)) bad(where + ": missing field '" + key + "'");
    return j.at(key);
}

double number(const json& j, const std::string& what)
{
    if (!j.is_number()) bad(what + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad(what + ": value is not finite");
    return v;
}

int integer(const json& j, const std::string& what)
{
    if (!j.is_number_integer()) bad(what + ": expected an integer");
    return j.get<int>();
}

} // namespace

json matrix_to_json(const Mat& m)
{
    json rows = json::array();
    for (int r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

Mat matrix_from_json(const json& j, const std::string& what)
{
    if (!j.is_array() || j.empty()) bad(what + ": expected a nonempty array of rows");
    const int n = static_cast<int>(j.size());
    const int m = j[0].is_array() ? static_cast<int>(j[0].size()) : 0;
    if (m == 0) bad(what + ": rows must be nonempty arrays");
    Mat out(n, m);
    for (int r = 0; r < n; ++r) {
        if (!j[r].is_array() || static_cast<int>(j[r].size()) != m) bad(what + ": ragged rows");
        for (int c = 0; c < m; ++c) {
            const json& e = j[r][c];
            if (!e.is_array() || e.size() != 2) bad(what + ": entries must be [re, im] pairs");
            out(r, c) = cplx(number(e[0], what), number(e[1], what));
        }
    }
    return out;
}

json system_to_json(const StaticSystem& s)
{
    const auto& k = s.model.kernel;
    const auto& q = s.model.quad;
    json j;
    j["schema"] = system_schema;
    j["ambient_dim"] = s.model.group.dim();
    j["spin_dim"] = k.spin_dimension;
    j["kappa"] = k.kappa;
    j["trace_constant"] = k.trace_constant;
    j["trace_constraint"] = k.trace_constraint;
    j["s_param"] = s.s_param;
    j["generator"] = matrix_to_json(s.model.group.generator);
    json pts = json::array();
    for (const auto& p : s.measure.points) pts.push_back(matrix_to_json(p.matrix));
    j["points"] = std::move(pts);
    j["weights"] = s.measure.weights;
    j["inner_region"] = s.inner_region;
    j["quadrature"] = {{"half_width", q.half_width},       {"node_count", q.node_count},
                       {"tail_tolerance", q.tail_tolerance}, {"rel_tol", q.rel_tol},
                       {"max_depth", q.max_depth}};
    return j;
}

StaticSystem system_from_json(const json& j)
{
    const std::string where = "system file";
    if (!j.is_object()) bad(where + ": top level must be an object");
    const json& tag = field(j, "schema", where);
    if (!tag.is_string() || tag.get<std::string>() != system_schema)
        bad(where + ": schema tag must be \"" + std::string(system_schema) + "\"");

    StaticSystem s;
    auto& k = s.model.kernel;
    k.spin_dimension = integer(field(j, "spin_dim", where), "spin_dim");
    k.kappa = number(field(j, "kappa", where), "kappa");
    k.trace_constant = number(field(j, "trace_constant", where), "trace_constant");
    k.trace_constraint = value_or<bool>(j, "trace_constraint", true);
    if (k.spin_dimension < 1) bad(where + ": spin_dim must be >= 1");
    if (k.kappa < 0.0) bad(where + ": kappa must be nonnegative");
    s.s_param = number(field(j, "s_param", where), "s_param");

    const int f = integer(field(j, "ambient_dim", where), "ambient_dim");
    const Mat h = matrix_from_json(field(j, "generator", where), "generator");
    if (h.rows() != f || h.cols() != f) bad(where + ": generator is not ambient_dim x ambient_dim");
    if (2 * k.spin_dimension > f) bad(where + ": ambient_dim must be at least 2 spin_dim");
    s.model.group = StaticGroup::from_generator(h);

    if (j.contains("quadrature")) {
        const json& q = j.at("quadrature");
        auto& qs = s.model.quad;
        qs.half_width = value_or(q, "half_width", qs.half_width);
        qs.node_count = value_or(q, "node_count", qs.node_count);
        qs.tail_tolerance = value_or(q, "tail_tolerance", qs.tail_tolerance);
        qs.rel_tol = value_or(q, "rel_tol", qs.rel_tol);
        qs.max_depth = value_or(q, "max_depth", qs.max_depth);
    }

    const json& pts = field(j, "points", where);
    const json& ws = field(j, "weights", where);
    if (!pts.is_array() || !ws.is_array()) bad(where + ": points and weights must be arrays");
    if (pts.size() != ws.size()) bad(where + ": number of points and weights differ");
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string what = fmt::format("point {}", i);
        const Mat m = matrix_from_json(pts[i], what);
        if (m.rows() != f || m.cols() != f) bad(what + ": dimension differs from ambient_dim");
        s.measure.points.push_back(validate_point(m, k));
        s.measure.weights.push_back(number(ws[i], fmt::format("weight {}", i)));
    }
    if (j.contains("inner_region")) {
        const json& in = j.at("inner_region");
        if (!in.is_array()) bad(where + ": inner_region must be an array");
        for (const auto& v : in) s.inner_region.push_back(integer(v, "inner_region"));
    }
    check_system(s);
    return s;
}

json jet_to_json(const Jet& u)
{
    json pts = json::array();
    for (int i = 0; i < u.size(); ++i) pts.push_back({{"a", u.scalars(i)}, {"u", matrix_to_json(u.directions[i])}});
    return {{"schema", jet_schema}, {"points", std::move(pts)}};
}

Jet jet_from_json(const json& j)
{
    const std::string where = "jet file";
    const json& tag = field(j, "schema", where);
    if (!tag.is_string() || tag.get<std::string>() != jet_schema)
        bad(where + ": schema tag must be \"" + std::string(jet_schema) + "\"");
    const json& pts = field(j, "points", where);
    if (!pts.is_array()) bad(where + ": points must be an array");
    Jet u;
    u.scalars.resize(static_cast<int>(pts.size()));
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const std::string what = fmt::format("jet point {}", i);
        u.scalars(static_cast<int>(i)) = number(field(pts[i], "a", what), what);
        u.directions.push_back(matrix_from_json(field(pts[i], "u", what), what));
    }
    return u;
}

json read_json(const std::string& path)
{
    std::ifstream in(path);
    if (!in) bad("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        bad("'" + path + "' is not valid JSON: " + e.what());
    }
}

void write_json(const std::string& path, const json& j)
{
    std::ofstream out(path);
    if (!out) bad("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

StaticSystem load_system(const std::string& path) { return system_from_json(read_json(path)); }
void save_system(const std::string& path, const StaticSystem& s) { write_json(path, system_to_json(s)); }
Jet load_jet(const std::string& path) { return jet_from_json(read_json(path)); }
void save_jet(const std::string& path, const Jet& u) { write_json(path, jet_to_json(u)); }

std::string to_csv(const Table& t)
{
    std::ostringstream os;
    for (std::size_t c = 0; c < t.header.size(); ++c) os << (c ? "," : "") << t.header[c];
    os << '\n';
    for (const auto& row : t.rows) {
        if (row.size() != t.header.size()) bad("csv: row length differs from the header");
        for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << fmt::format("{}", row[c]);
        os << '\n';
    }
    return os.str();
}

void write_csv(const std::string& path, const Table& t)
{
    std::ofstream out(path);
    if (!out) bad("cannot write '" + path + "'");
    out << to_csv(t);
}

} // namespace cvp::io
