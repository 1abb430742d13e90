#pragma once

#include <fstream>
#include <json.hpp>
#include <string>
#include <vector>

namespace lqft::io {

using json = nlohmann::ordered_json;

// Round-trip decimal (17 significant digits).
std::string fmt17(double x);

// Minimal CSV writer: header once, then rows of preformatted cells.
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::vector<std::string>& header);
  void row(const std::vector<std::string>& cells);
  template <typename... T>
  void values(const T&... v) {
    row({cell(v)...});
  }

 private:
  static std::string cell(double v) { return fmt17(v); }
  static std::string cell(int v) { return std::to_string(v); }
  static std::string cell(long v) { return std::to_string(v); }
  static std::string cell(long long v) { return std::to_string(v); }
  static std::string cell(unsigned long v) { return std::to_string(v); }
  static std::string cell(unsigned long long v) { return std::to_string(v); }
  static std::string cell(const std::string& v) { return v; }
  std::ofstream out_;
};

void write_json(const std::string& path, const json& j);
std::string sha256_file(const std::string& path);
std::string sha256_string(const std::string& data);

}  // namespace lqft::io
