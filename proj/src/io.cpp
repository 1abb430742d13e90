#include "lqft/io.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <iterator>

#include "lqft/common.hpp"

namespace lqft::io {

std::string fmt17(double x) { return fmt::format("{:.17g}", x); }

CsvWriter::CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
  if (!out_) fail(ErrorKind::config, "cannot open " + path + " for writing");
  row(header);
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ << ',';
    out_ << cells[i];
  }
  out_ << '\n';
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::config, "cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
}

namespace {

std::string hex_digest(const unsigned char* md, unsigned len) {
  std::string s;
  for (unsigned i = 0; i < len; ++i) s += fmt::format("{:02x}", md[i]);
  return s;
}

}  // namespace

std::string sha256_string(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
  return hex_digest(md, len);
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::config, "cannot read " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return sha256_string(data);
}

}  // namespace lqft::io
