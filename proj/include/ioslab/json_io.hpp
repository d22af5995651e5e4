#pragma once

#include <json.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace ioslab {

using Json = nlohmann::json;

/// Formats a double with 17 significant digits ("%.17g").
std::string format_double(double value);

/// Canonical rendering: keys sorted, doubles at 17 significant digits,
/// non-finite doubles as null, two-space indentation, trailing newline.
std::string canonical_json(const Json& doc);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

Json to_json_array(std::span<const double> values);
std::vector<double> doubles_from_json(const Json& array);

}  // namespace ioslab
