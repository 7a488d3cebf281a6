// One line per acceptance criterion; exit status 1 if any fails.
#include "cvp/verify.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv)
{
    cvp::verify::SuiteOptions opt;
    if (const char* dir = std::getenv("CVP_FIXTURES")) opt.fixtures = dir;
#ifdef CVP_FIXTURE_DIR
    if (opt.fixtures.empty()) opt.fixtures = CVP_FIXTURE_DIR;
#endif
    for (int i = 1; i < argc; ++i) opt.only.push_back(std::stoi(argv[i]));
    bool ok = true;
    for (int id = 1; id <= cvp::verify::criteria; ++id) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
        const auto c = cvp::verify::run_check(id, opt);
        std::printf("%s\n", cvp::verify::summary_line(c).c_str());
        std::fflush(stdout);
        ok = ok && c.passed;
    }
    return ok ? 0 : 1;
}
