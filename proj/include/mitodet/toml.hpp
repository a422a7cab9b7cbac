#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace mitodet {

// Minimal TOML reader covering what the pipeline config uses: [table] and
// [[array-of-tables]] headers (dotted paths), bare or quoted keys, basic
// strings, integers, floats, booleans, single-line arrays, and # comments.
// Parsed into a JSON tree. Datetimes, inline tables and multi-line strings
// are not supported and raise BadInput.
nlohmann::json parse_toml(const std::string& text);
nlohmann::json parse_toml_file(const std::filesystem::path& path);

}  // namespace mitodet
