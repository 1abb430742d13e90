#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "lqft/common.hpp"
#include "lqft/io.hpp"

namespace lqft::cli {

using json = io::json;

// Reads one JSON object with defaults. Every key read is echoed into resolved(),
// so the summary records the full effective configuration.
class Params {
 public:
  explicit Params(json block, std::string where = "config");

  double real(const std::string& key, double def);
  long integer(const std::string& key, long def);
  bool flag(const std::string& key, bool def);
  std::string text(const std::string& key, const std::string& def);
  std::vector<double> reals(const std::string& key, const std::vector<double>& def);
  std::vector<long> integers(const std::string& key, const std::vector<long>& def);
  // Raw sub-document; the caller resolves it and hands back the resolved form.
  json raw(const std::string& key, const json& def);
  void set_resolved(const std::string& key, json value);
  Params child(const std::string& key);
  void adopt(const std::string& key, const Params& child);

  bool has(const std::string& key) const { return in_.contains(key); }
  const json& resolved() const { return resolved_; }
  // Unknown keys are a configuration error (typos must not pass silently).
  void finish() const;

 private:
  const json* lookup(const std::string& key);
  [[noreturn]] void bad(const std::string& key, const std::string& want) const;

  json in_;
  json resolved_ = json::object();
  std::set<std::string> seen_;
  std::string where_;
};

struct Settings {
  std::string command;
  json config = json::object();
  std::uint64_t seed = 0;
  std::string seed_source;
  int workers = 1;
  std::filesystem::path out;
};

// Output directory with every artifact tracked for the manifest.
class Run {
 public:
  explicit Run(const Settings& s);

  const Settings& settings() const { return s_; }
  std::uint64_t seed() const { return s_.seed; }
  int workers() const { return s_.workers; }

  // Path of a new artifact; registers it for the manifest.
  std::string artifact(const std::string& name);
  void write_json(const std::string& name, const json& j);

  // summary.json and manifest.json. Wall-clock goes only into the manifest, so
  // every other file is byte-identical across reruns.
  void finish(json summary, const json& resolved_config);

 private:
  Settings s_;
  std::vector<std::string> files_;
  double t0_;
};

std::string config_hash(const std::string& command, const json& resolved, std::uint64_t seed);

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitAdmissibility = 3;
inline constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind);

// Raised by the driver when an insertion set fails the Seiberg bounds; carries the verdict.
class Rejection : public Error {
 public:
  Rejection(const std::string& what, json verdict) : Error(ErrorKind::admissibility, what), verdict_(std::move(verdict)) {}
  const json& verdict() const { return verdict_; }

 private:
  json verdict_;
};

}  // namespace lqft::cli
