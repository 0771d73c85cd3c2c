#pragma once

#include <json.hpp>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <istream>
#include <string>
#include <string_view>

namespace newsfuse::jsonl {

// Calls visit(line_number, record) for every non-blank line. line_number is 1-based.
// Malformed JSON raises Error("<source>:<line>: malformed record: ...").
void for_each_record(std::istream& in, std::string_view source,
                     const std::function<void(std::size_t, const nlohmann::json&)>& visit);

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

std::string read_file(const std::filesystem::path& path);

// Writes to a sibling temporary file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Field accessors that report the source location on a missing/mistyped field.
std::string require_string(const nlohmann::json& record, const char* field, std::string_view where);
std::size_t require_index(const nlohmann::json& record, const char* field, std::string_view where);
double require_number(const nlohmann::json& record, const char* field, std::string_view where);

std::string location(std::string_view source, std::size_t line);

}  // namespace newsfuse::jsonl
