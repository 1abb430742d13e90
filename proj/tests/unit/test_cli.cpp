#ifdef LQFT_CLI_PATH

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"
#include "lqft/io.hpp"

using lqft::io::json;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "lqft_unit_cli";

struct Result {
  int code;
  std::string out;
};

Result run_cli(const std::string& args) {
  const std::string cmd = std::string(LQFT_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::string out;
  char buf[4096];
  while (const size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
  const int status = pclose(p);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string config(const std::string& name, const json& j) {
  fs::create_directories(kRoot);
  const auto path = kRoot / (name + ".json");
  std::ofstream(path) << j.dump();
  return path.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& p) { return json::parse(slurp(p)); }

std::string out_dir(const std::string& name) {
  const auto d = kRoot / name;
  fs::remove_all(d);
  return d.string();
}

}  // namespace

TEST_CASE("cli: green-selftest residuals and manifest") {
  const auto dir = out_dir("selftest");
  const auto r = run_cli("green-selftest --seed 5 --out " + dir);
  REQUIRE(r.code == 0);
  const auto s = read_json(fs::path(dir) / "summary.json");
  CHECK(s["estimate"].get<double>() < 1e-12);
  for (const char* k : {"anchor", "estimator", "estimate", "stderr", "replicas"}) CHECK(s.contains(k));

  const auto m = read_json(fs::path(dir) / "manifest.json");
  CHECK(m["seed"] == 5);
  CHECK(m["seed_source"] == "flag");
  CHECK(m["config_hash"].get<std::string>().size() == 64);
  std::set<std::string> listed;
  for (const auto& f : m["files"]) {
    listed.insert(f["path"].get<std::string>());
    CHECK(f["sha256"] == lqft::io::sha256_file((fs::path(dir) / f["path"].get<std::string>()).string()));
  }
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().filename() != "manifest.json") CHECK(listed.count(e.path().filename().string()) == 1);

  std::istringstream csv(slurp(fs::path(dir) / "residuals.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "identity,max_residual,samples");
}

TEST_CASE("cli: seed falls back to LQG_SEED") {
  const auto dir = out_dir("envseed");
  const auto r = run_cli("green-selftest --out " + dir);
  REQUIRE(r.code == 0);
  const auto plain = read_json(fs::path(dir) / "manifest.json");
  ::setenv("LQG_SEED", "123", 1);
  const auto dir2 = out_dir("envseed2");
  REQUIRE(run_cli("green-selftest --out " + dir2).code == 0);
  ::unsetenv("LQG_SEED");
  const auto m = read_json(fs::path(dir2) / "manifest.json");
  CHECK(m["seed"] == 123);
  CHECK(m["seed_source"] == "env");
  CHECK(plain["seed_source"] != "env");
}

TEST_CASE("cli: volume-law gamma shape") {
  const auto dir = out_dir("volume");
  const auto cfg = config("volume", {{"n_replicas", 256}, {"n_draws", 1000}});
  REQUIRE(run_cli("volume-law --seed 3 --config " + cfg + " --out " + dir).code == 0);
  const auto s = read_json(fs::path(dir) / "summary.json");
  CHECK(std::abs(s["diagnostics"]["gamma_shape"].get<double>() - 0.25) < 1e-12);
  CHECK(s["replicas"] == 256);
}

TEST_CASE("cli: output bytes do not depend on the worker count") {
  const auto cfg = config("gmc", {{"gamma", 1.0}, {"n_replicas", 60}});
  std::vector<std::string> sums;
  for (int w : {1, 3}) {
    const auto dir = out_dir("workers" + std::to_string(w));
    REQUIRE(run_cli("gmc-bulk --seed 8 --workers " + std::to_string(w) + " --config " + cfg + " --out " + dir).code == 0);
    sums.push_back(slurp(fs::path(dir) / "totals.csv"));
    CHECK(!sums.back().empty());
  }
  CHECK(sums[0] == sums[1]);
}

TEST_CASE("cli: validate reports findings without running") {
  const double gamma = std::sqrt(8.0 / 3.0), Q = 2 / gamma + gamma / 2;
  const auto bad = config("alphaQ", {{"insertions",
                                      {{{"kind", "bulk"}, {"position", {0.0, 0.0}}, {"weight", Q}},
                                       {{"kind", "boundary"}, {"angle", 0.0}, {"weight", 1.0}}}}});
  auto r = run_cli("validate seiberg-validate --config " + bad);
  CHECK(r.code == 0);
  auto j = json::parse(r.out);
  CHECK(j["valid"] == false);
  REQUIRE(j["findings"].size() >= 1);
  CHECK(j["findings"][0].get<std::string>().find("bound2 violated") == 0);

  const auto overlap = config("overlap", {{"spacing", 0.05}, {"eps", 0.05}});
  j = json::parse(run_cli("validate field-sample --config " + overlap).out);
  CHECK(j["valid"] == false);
  CHECK(j["findings"][0].get<std::string>().find("separation rule") == 0);

  const auto good = config("good", {{"gamma", 1.0}, {"n_replicas", 10}});
  j = json::parse(run_cli("validate gmc-bulk --config " + good).out);
  CHECK(j["valid"] == true);
  CHECK(j["findings"].empty());
}

TEST_CASE("cli: exit codes") {
  const double gamma = std::sqrt(8.0 / 3.0), Q = 2 / gamma + gamma / 2;
  const auto unknown = config("unknown", {{"gama", 1.0}});
  auto r = run_cli("gmc-bulk --config " + unknown + " --out " + out_dir("x2"));
  CHECK(r.code == 2);
  CHECK(json::parse(r.out).contains("error"));
  CHECK(run_cli("gmc-bulk --config " + config("super", {{"gamma", 2.5}}) + " --out " + out_dir("x3")).code == 2);
  CHECK(run_cli("gmc-bulk --no-such-flag").code == 2);

  const auto bad = config("alphaQ2", {{"insertions",
                                       {{{"kind", "bulk"}, {"position", {0.0, 0.0}}, {"weight", Q}},
                                        {{"kind", "boundary"}, {"angle", 0.0}, {"weight", 1.0}}}}});
  r = run_cli("seiberg-validate --config " + bad + " --out " + out_dir("x4"));
  CHECK(r.code == 3);
  const auto v = read_json(kRoot / "x4" / "verdict.json");
  CHECK(v["admissible"] == false);
  CHECK(run_cli("partition --config " + bad + " --out " + out_dir("x5")).code == 3);

  CHECK(run_cli("seiberg-validate --out " + out_dir("x6")).code == 0);
}

TEST_CASE("cli: maps-count matches the exact formula") {
  const auto dir = out_dir("count");
  const auto cfg = config("count", {{"pairs", {{0, 1}, {1, 1}, {2, 1}}}});
  REQUIRE(run_cli("maps-count --config " + cfg + " --out " + dir).code == 0);
  const auto csv = slurp(fs::path(dir) / "counts.csv");
  CHECK(csv.find("\n0,1,1,") != std::string::npos);
  CHECK(csv.find("\n1,1,2,") != std::string::npos);
  // 17 significant digits: log 2
  CHECK(csv.find(",0.69314718055994529,") != std::string::npos);
}

TEST_CASE("cli: shipped example configs validate") {
  int seen = 0;
  for (const auto& e : fs::directory_iterator(LQFT_CONFIG_DIR)) {
    if (e.path().extension() != ".json") continue;
    ++seen;
    const auto r = run_cli("validate " + e.path().stem().string() + " --config " + e.path().string());
    CAPTURE(e.path().string());
    CHECK(r.code == 0);
    CHECK(json::parse(r.out)["valid"] == true);
  }
  CHECK(seen == 13);
}

#endif
