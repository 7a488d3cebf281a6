#include <doctest.h>

#include "fixtures.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

namespace {

int cli(const std::string& args)
{
    const std::string cmd = std::string(CVP_CLI) + " " + args + " > /dev/null 2>&1";
    const int r = std::system(cmd.c_str());
    return WIFEXITED(r) ? WEXITSTATUS(r) : -1;
}

std::string slurp(const std::string& path)
{
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string tmp(const std::string& name) { return (std::filesystem::temp_directory_path() / name).string(); }

} // namespace

TEST_SUITE("cli")
{
    TEST_CASE("exit codes")
    {
        const auto vac = testing::fixture("vac.json");
        CHECK(cli("system validate --system " + vac) == 0);
        CHECK(cli("system validate --system /nonexistent.json") == 2);
        CHECK(cli("system validate") == 2);
        CHECK(cli("frobnicate") == 2);
        CHECK(cli("--help") == 0);
        CHECK(cli("mass compute --a " + vac + " --b " + testing::fixture("body.json")) == 2);
        CHECK(cli("mass compute --a " + vac + " --b " + vac) == 0);
        // a short run cannot reach the stationarity target
        CHECK(cli("optimize run --points 5 --iterations 20") == 4);
        // an incompatible ell_inf breaks the solve
        CHECK(cli("lingrav solve --system " + vac + " --ell-inf 0.5") == 3);
    }

    TEST_CASE("reports")
    {
        const auto out = tmp("cvp_cli_c.json");
        REQUIRE(cli("schwarzschild constant-c --profile gaussian --out " + out) == 0);
        const auto j = cvp::io::read_json(out);
        CHECK(j.at("c").get<double>() == doctest::Approx(9.42477796076938).epsilon(1e-12));

        const auto csv = tmp("cvp_cli_m.csv");
        REQUIRE(cli("schwarzschild mass --radii 10 20 --out " + out + " --csv " + csv) == 0);
        CHECK(slurp(csv).rfind("R,mass\n10,", 0) == 0);
        CHECK(cvp::io::read_json(out).contains("agreement_gap"));

        const auto a = tmp("cvp_cli_a.json"), b = tmp("cvp_cli_b.json");
        const std::string mass = "mass compute --a " + testing::fixture("vac.json") + " --b " +
                                 testing::fixture("vac_tilde.json") + " --threads 2 --out ";
        REQUIRE(cli(mass + a) == 0);
        REQUIRE(cli(mass + b) == 0);
        CHECK(slurp(a) == slurp(b));
        for (const auto& p : {out, csv, a, b}) std::remove(p.c_str());
    }

    TEST_CASE("config sections")
    {
        const auto cfg = tmp("cvp_cli_cfg.json"), out = tmp("cvp_cli_cfg_out.json");
        std::ofstream(cfg) << R"({"schwarzschild": {"profile": "bump", "width": 2.0}})";
        REQUIRE(cli("--config " + cfg + " schwarzschild constant-c --out " + out) == 0);
        CHECK(cvp::io::read_json(out).at("profile") == "bump");
        std::ofstream(cfg) << R"({"schwarzschild": {"width": "wide"}})";
        CHECK(cli("--config " + cfg + " schwarzschild constant-c") == 2);
        std::remove(cfg.c_str());
        std::remove(out.c_str());
    }
}
