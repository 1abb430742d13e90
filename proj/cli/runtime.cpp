#include "runtime.hpp"

#include <fmt/format.h>

#include <chrono>

namespace lqft::cli {

namespace {

double now_s() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch()).count();
}

}  // namespace

Params::Params(json block, std::string where) : in_(std::move(block)), where_(std::move(where)) {
  if (in_.is_null()) in_ = json::object();
  if (!in_.is_object()) fail(ErrorKind::config, where_ + ": expected a JSON object");
}

const json* Params::lookup(const std::string& key) {
  seen_.insert(key);
  auto it = in_.find(key);
  return it == in_.end() || it->is_null() ? nullptr : &*it;
}

void Params::bad(const std::string& key, const std::string& want) const {
  fail(ErrorKind::config, fmt::format("{}.{}: expected {}", where_, key, want));
}

double Params::real(const std::string& key, double def) {
  double v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_number()) bad(key, "a number");
    v = j->get<double>();
  }
  resolved_[key] = v;
  return v;
}

long Params::integer(const std::string& key, long def) {
  long v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_number_integer()) bad(key, "an integer");
    v = j->get<long>();
  }
  resolved_[key] = v;
  return v;
}

bool Params::flag(const std::string& key, bool def) {
  bool v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_boolean()) bad(key, "true or false");
    v = j->get<bool>();
  }
  resolved_[key] = v;
  return v;
}

std::string Params::text(const std::string& key, const std::string& def) {
  std::string v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_string()) bad(key, "a string");
    v = j->get<std::string>();
  }
  resolved_[key] = v;
  return v;
}

std::vector<double> Params::reals(const std::string& key, const std::vector<double>& def) {
  std::vector<double> v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_array()) bad(key, "an array of numbers");
    v.clear();
    for (const auto& e : *j) {
      if (!e.is_number()) bad(key, "an array of numbers");
      v.push_back(e.get<double>());
    }
  }
  resolved_[key] = v;
  return v;
}

std::vector<long> Params::integers(const std::string& key, const std::vector<long>& def) {
  std::vector<long> v = def;
  if (const json* j = lookup(key)) {
    if (!j->is_array()) bad(key, "an array of integers");
    v.clear();
    for (const auto& e : *j) {
      if (!e.is_number_integer()) bad(key, "an array of integers");
      v.push_back(e.get<long>());
    }
  }
  resolved_[key] = v;
  return v;
}

json Params::raw(const std::string& key, const json& def) {
  const json* j = lookup(key);
  return j ? *j : def;
}

void Params::set_resolved(const std::string& key, json value) { resolved_[key] = std::move(value); }

Params Params::child(const std::string& key) {
  const json* j = lookup(key);
  return Params(j ? *j : json::object(), where_ + "." + key);
}

void Params::adopt(const std::string& key, const Params& child) {
  child.finish();
  resolved_[key] = child.resolved();
}

void Params::finish() const {
  std::vector<std::string> unknown;
  for (auto it = in_.begin(); it != in_.end(); ++it)
    if (!seen_.count(it.key())) unknown.push_back(it.key());
  if (!unknown.empty()) fail(ErrorKind::config, fmt::format("{}: unknown key(s) {}", where_, fmt::join(unknown, ", ")));
}

Run::Run(const Settings& s) : s_(s), t0_(now_s()) {
  std::error_code ec;
  std::filesystem::create_directories(s_.out, ec);
  if (ec) fail(ErrorKind::config, "cannot create output directory " + s_.out.string() + ": " + ec.message());
}

std::string Run::artifact(const std::string& name) {
  files_.push_back(name);
  return (s_.out / name).string();
}

void Run::write_json(const std::string& name, const json& j) { io::write_json(artifact(name), j); }

std::string config_hash(const std::string& command, const json& resolved, std::uint64_t seed) {
  return io::sha256_string(command + "\n" + resolved.dump() + "\n" + std::to_string(seed));
}

void Run::finish(json summary, const json& resolved_config) {
  json full;
  full["command"] = s_.command;
  for (auto it = summary.begin(); it != summary.end(); ++it) full[it.key()] = it.value();
  full["seed"] = s_.seed;
  full["config"] = resolved_config;
  write_json("summary.json", full);

  json m;
  m["command"] = s_.command;
  m["config_hash"] = config_hash(s_.command, resolved_config, s_.seed);
  m["seed"] = s_.seed;
  m["seed_source"] = s_.seed_source;
  m["workers"] = s_.workers;
  json files = json::array();
  for (const auto& f : files_) {
    const auto p = s_.out / f;
    files.push_back({{"path", f}, {"sha256", io::sha256_file(p.string())}, {"bytes", std::filesystem::file_size(p)}});
  }
  m["files"] = files;
  m["wall_clock_s"] = now_s() - t0_;
  json est;
  for (const char* k : {"anchor", "estimator", "estimate", "stderr", "replicas"})
    if (summary.contains(k)) est[k] = summary[k];
  m["summary"] = est;
  io::write_json((s_.out / "manifest.json").string(), m);
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::admissibility:
      return kExitAdmissibility;
    case ErrorKind::numeric:
    case ErrorKind::factorization:
      return kExitNumeric;
    default:
      return kExitConfig;
  }
}

}  // namespace lqft::cli
