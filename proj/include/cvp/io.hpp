#pragma once

#include "cvp/jets.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace cvp::io {

using json = nlohmann::json;

inline constexpr const char* system_schema = "cvp-system/1";
inline constexpr const char* jet_schema = "cvp-jet/1";

// Complex matrices are row-major arrays of rows, each entry a [re, im] pair.
json matrix_to_json(const Mat& m);
Mat matrix_from_json(const json& j, const std::string& what);

json system_to_json(const StaticSystem& s);
// Points are re-validated against the kernel spec on load.
StaticSystem system_from_json(const json& j);

json jet_to_json(const Jet& u);
Jet jet_from_json(const json& j);

json read_json(const std::string& path);
// Two-space indentation and shortest round-trip doubles, so reruns give
// byte-identical files.
void write_json(const std::string& path, const json& j);

StaticSystem load_system(const std::string& path);
void save_system(const std::string& path, const StaticSystem& s);
Jet load_jet(const std::string& path);
void save_jet(const std::string& path, const Jet& u);

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};
std::string to_csv(const Table& t);
void write_csv(const std::string& path, const Table& t);

// Typed lookup with a default; wrong types are schema errors.
template <class T>
T value_or(const json& j, const std::string& key, const T& fallback)
{
    if (!j.is_object() || !j.contains(key) || j.at(key).is_null()) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorKind::schema, "config: key '" + key + "' has the wrong type");
    }
}

} // namespace cvp::io
