#include <doctest.h>

#include "cvp/io.hpp"
#include "fixtures.hpp"

#include <cstdio>
#include <filesystem>

using namespace cvp;
using io::json;

namespace {

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::invariant;
}

} // namespace

TEST_SUITE("io")
{
    TEST_CASE("system round trip is exact")
    {
        const auto s = testing::load("body.json");
        const json j = io::system_to_json(s);
        const auto t = io::system_from_json(j);
        CHECK(io::system_to_json(t).dump() == j.dump());
        CHECK(t.inner_region == s.inner_region);
        for (int i = 0; i < s.size(); ++i) CHECK((t.point(i).matrix - s.point(i).matrix).norm() == 0.0);
        const auto path = (std::filesystem::temp_directory_path() / "cvp_io_test.json").string();
        io::save_system(path, s);
        CHECK(io::system_to_json(io::load_system(path)).dump() == j.dump());
        std::remove(path.c_str());
    }

    TEST_CASE("jet round trip")
    {
        const auto s = testing::load("vac.json");
        Jet u = scalar_jet(s.size(), s.model.group.dim(), 2, 0.25);
        u.directions[1] = s.point(1).matrix;
        const auto v = io::jet_from_json(io::jet_to_json(u));
        CHECK(v.scalars == u.scalars);
        CHECK((v.directions[1] - u.directions[1]).norm() == 0.0);
    }

    TEST_CASE("schema errors")
    {
        json j = io::system_to_json(testing::load("vac.json"));
        json bad = j;
        bad["schema"] = "cvp-system/0";
        CHECK(kind_of([&] { io::system_from_json(bad); }) == ErrorKind::schema);
        bad = j;
        bad.erase("weights");
        CHECK(kind_of([&] { io::system_from_json(bad); }) == ErrorKind::schema);
        bad = j;
        bad["points"][0][0][0] = json::array({1.0});
        CHECK(kind_of([&] { io::system_from_json(bad); }) == ErrorKind::schema);
        bad = j;
        bad["weights"][0] = "heavy";
        CHECK(kind_of([&] { io::system_from_json(bad); }) == ErrorKind::schema);
        CHECK(kind_of([&] { io::read_json("/nonexistent/cvp.json"); }) == ErrorKind::schema);
        CHECK(kind_of([&] { io::value_or<int>(json{{"n", "x"}}, "n", 1); }) == ErrorKind::schema);
        CHECK(io::value_or<int>(json{{"m", 2}}, "n", 1) == 1);
    }

    TEST_CASE("csv")
    {
        io::Table t{{"a", "b"}, {{1.0, 0.5}, {2.0, 1e-20}}};
        CHECK(io::to_csv(t) == "a,b\n1,0.5\n2,1e-20\n");
        t.rows.push_back({1.0});
        CHECK_THROWS_AS(io::to_csv(t), Error);
    }

    TEST_CASE("matrices")
    {
        Mat m(2, 2);
        m << cplx(1, 0), cplx(0, -2), cplx(0, 2), cplx(-3, 0);
        CHECK((io::matrix_from_json(io::matrix_to_json(m), "m") - m).norm() == 0.0);
        CHECK_THROWS_AS(io::matrix_from_json(json::array(), "m"), Error);
    }
}
