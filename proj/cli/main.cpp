#include <fmt/format.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"

using namespace lqft;
using namespace lqft::cli;

namespace {

void emit(const json& j) { std::cout << j.dump(2) << std::endl; }

int report(const Error& e) {
  const int code = exit_code(e.kind());
  json j = {{"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}, {"exit_code", code}};
  if (const auto* r = dynamic_cast<const Rejection*>(&e)) j["verdict"] = r->verdict();
  emit(j);
  return code;
}

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::config, fmt::format("config {} is not valid JSON: {}", path, e.what()));
  }
  if (!j.is_object()) fail(ErrorKind::config, "config must be a JSON object");
  return j;
}

std::uint64_t parse_seed(const std::string& text, const std::string& from) {
  try {
    size_t pos = 0;
    if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
    const unsigned long long v = std::stoull(text, &pos, 0);
    if (pos != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    fail(ErrorKind::config, fmt::format("{}: '{}' is not an unsigned 64-bit seed", from, text));
  }
}

struct Flags {
  std::string config_path, seed, out;
  int workers = 0;
};

// Driver keys live beside the command block: seed, n_workers, output_dir.
// Precedence: flag, then config, then LQG_SEED (seed only), then defaults.
Settings resolve(const std::string& command, const Flags& f) {
  Settings s;
  s.command = command;
  json cfg = read_config(f.config_path);
  if (cfg.contains("command")) {
    if (!cfg["command"].is_string() || cfg["command"].get<std::string>() != command)
      fail(ErrorKind::config, "config.command does not match the subcommand " + command);
    cfg.erase("command");
  }
  std::optional<std::uint64_t> cfg_seed;
  if (cfg.contains("seed")) {
    const json& j = cfg["seed"];
    if (j.is_number_unsigned()) cfg_seed = j.get<std::uint64_t>();
    else if (j.is_string()) cfg_seed = parse_seed(j.get<std::string>(), "config.seed");
    else fail(ErrorKind::config, "config.seed: expected an unsigned integer");
    cfg.erase("seed");
  }
  int cfg_workers = 0;
  if (cfg.contains("n_workers")) {
    if (!cfg["n_workers"].is_number_integer() || cfg["n_workers"].get<long>() < 1)
      fail(ErrorKind::config, "config.n_workers: expected a positive integer");
    cfg_workers = cfg["n_workers"].get<int>();
    cfg.erase("n_workers");
  }
  std::string cfg_out;
  if (cfg.contains("output_dir")) {
    if (!cfg["output_dir"].is_string()) fail(ErrorKind::config, "config.output_dir: expected a path");
    cfg_out = cfg["output_dir"].get<std::string>();
    cfg.erase("output_dir");
  }
  s.config = cfg;

  if (!f.seed.empty()) {
    s.seed = parse_seed(f.seed, "--seed");
    s.seed_source = "flag";
  } else if (cfg_seed) {
    s.seed = *cfg_seed;
    s.seed_source = "config";
  } else if (const char* env = std::getenv("LQG_SEED"); env && *env) {
    s.seed = parse_seed(env, "LQG_SEED");
    s.seed_source = "env";
  } else {
    s.seed = 1;
    s.seed_source = "default";
  }
  if (f.workers < 0) fail(ErrorKind::config, "--workers must be positive");
  s.workers = f.workers > 0 ? f.workers : cfg_workers > 0 ? cfg_workers : 1;
  s.out = !f.out.empty() ? f.out : !cfg_out.empty() ? cfg_out : "out/" + command;
  return s;
}

int run_command(const Command& cmd, const Flags& f) {
  try {
    const Settings s = resolve(cmd.name, f);
    Params p(s.config);
    Run run(s);
    json summary = cmd.run(p, run);
    run.finish(summary, p.resolved());
    emit({{"command", cmd.name}, {"status", "ok"}, {"out", s.out.string()}, {"seed", s.seed},
          {"estimate", summary.value("estimate", json())}, {"stderr", summary.value("stderr", json())}});
    return kExitOk;
  } catch (const Error& e) {
    return report(e);
  } catch (const std::bad_alloc&) {
    return report(Error(ErrorKind::numeric, "out of memory"));
  } catch (const std::exception& e) {
    return report(Error(ErrorKind::numeric, e.what()));
  }
}

// Never fails: configuration errors are findings too.
int run_validate(const Command& cmd, const Flags& f) {
  std::vector<std::string> findings;
  try {
    const Settings s = resolve(cmd.name, f);
    Params p(s.config);
    findings = cmd.check(p);
  } catch (const std::exception& e) {
    findings.push_back(e.what());
  }
  emit({{"command", cmd.name}, {"valid", findings.empty()}, {"findings", findings}});
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Liouville quantum field theory on the disk: experiment driver"};
  app.require_subcommand(1);
  Flags flags;
  std::string validate_target;
  std::vector<std::pair<CLI::App*, const Command*>> subs;

  auto add_flags = [&](CLI::App* sub, bool run_flags) {
    sub->add_option("--config", flags.config_path, "JSON parameter block");
    if (!run_flags) return;
    sub->add_option("--seed", flags.seed, "64-bit seed (fallback: config seed, then LQG_SEED)");
    sub->add_option("--workers", flags.workers, "worker threads (outputs do not depend on it)");
    sub->add_option("--out", flags.out, "output directory");
  };
  for (const auto& c : commands()) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_flags(sub, true);
    subs.emplace_back(sub, &c);
  }
  auto* val = app.add_subcommand("validate", "List violated preconditions of a config without running");
  val->add_option("command", validate_target, "subcommand the config is meant for")->required();
  add_flags(val, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report(Error(ErrorKind::config, e.what()));
  }

  if (val->parsed()) {
    const Command* c = find_command(validate_target);
    if (!c) {
      emit({{"command", validate_target}, {"valid", false}, {"findings", {"unknown subcommand " + validate_target}}});
      return kExitOk;
    }
    return run_validate(*c, flags);
  }
  for (auto [sub, c] : subs)
    if (sub->parsed()) return run_command(*c, flags);
  return kExitConfig;
}
