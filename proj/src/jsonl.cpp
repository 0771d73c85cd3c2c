#include "newsfuse/jsonl.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "newsfuse/types.hpp"

namespace newsfuse::jsonl {

namespace fs = std::filesystem;

std::string location(std::string_view source, std::size_t line) {
  return std::string(source) + ":" + std::to_string(line);
}

void for_each_record(std::istream& in, std::string_view source,
                     const std::function<void(std::size_t, const nlohmann::json&)>& visit) {
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error(location(source, line_number) + ": malformed record: " + e.what());
    }
    if (!record.is_object()) {
      throw Error(location(source, line_number) + ": malformed record: expected a JSON object");
    }
    visit(line_number, record);
  }
}

std::string format_double(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw Error("cannot format floating-point value");
  return std::string(buf, end);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write '" + tmp.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string require_string(const nlohmann::json& record, const char* field, std::string_view where) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw Error(std::string(where) + ": malformed record: field '" + field + "' must be a string");
  }
  return it->get<std::string>();
}

std::size_t require_index(const nlohmann::json& record, const char* field, std::string_view where) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_number_unsigned()) {
    throw Error(std::string(where) + ": malformed record: field '" + field + "' must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

double require_number(const nlohmann::json& record, const char* field, std::string_view where) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_number()) {
    throw Error(std::string(where) + ": malformed record: field '" + field + "' must be a number");
  }
  return it->get<double>();
}

}  // namespace newsfuse::jsonl
