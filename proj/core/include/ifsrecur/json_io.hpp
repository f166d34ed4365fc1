#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace ifsrecur {

using Json = nlohmann::ordered_json;

/// Serializes with every floating-point value printed to 17 significant
/// digits, so parsing the text back reproduces the exact doubles.
std::string dump_json(const Json& value, int indent = 2);

/// Formats one double the same way dump_json does.
std::string format_double(double value);

Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace ifsrecur
