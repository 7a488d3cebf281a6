#pragma once

#include "cvp/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cvp::verify {

struct Check {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
    double time_limit = 0.0; // 0 when the criterion has no runtime bound
    io::json data;
};

struct SuiteOptions {
    std::string fixtures;      // directory with body.json and vac.json; empty means build them
    std::uint64_t seed = 1;
    std::vector<int> only;     // criterion ids; empty runs all
};

std::vector<Check> run_suite(const SuiteOptions& opt);
Check run_check(int id, const SuiteOptions& opt);

io::json to_json(const std::vector<Check>& checks);
std::string summary_line(const Check& c);

// The critical systems the suite works on.
StaticSystem body_system(int points, int ambient, std::uint64_t seed);
StaticSystem vacuum_system(int points, int ambient, std::uint64_t seed);
// Same model, s and volume; points moved slightly, weights redistributed, atom 0 split.
StaticSystem partner_system(const StaticSystem& s, std::uint64_t seed);

inline constexpr int criteria = 14;

} // namespace cvp::verify
