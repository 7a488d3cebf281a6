#pragma once

#include "cvp/io.hpp"

#include <string>

namespace testing {

inline std::string fixture(const std::string& name) { return std::string(CVP_FIXTURE_DIR) + "/" + name; }
inline cvp::StaticSystem load(const std::string& name) { return cvp::io::load_system(fixture(name)); }

} // namespace testing
