// Copyright 2026 The mixlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mixlab/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? v : fallback;
}

const std::string kBin = env_or("MIXLAB_BIN", "mixlab");
const fs::path kDocs = env_or("MIXLAB_DOCS", "docs");

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mixlab_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result sh(const std::string& args, const fs::path& dir) {
  const fs::path o = dir / "stdout.txt";
  const fs::path e = dir / "stderr.txt";
  const std::string cmd = "'" + kBin + "' " + args + " >'" + o.string() + "' 2>'" + e.string() + "'";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
}

fs::path write_config(const fs::path& dir, const json& j) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << j.dump(2);
  return p;
}

json full2_pressure() {
  return {{"experiment", "pressure"},
          {"seed", 1},
          {"system", {{"transition", {{1, 1}, {1, 1}}}, {"roof", 1.0}}}};
}

}  // namespace

TEST_CASE("pressure of the full two-shift") {
  const auto dir = scratch("pressure");
  const auto cfg = write_config(dir, full2_pressure());
  const auto r = sh("run '" + cfg.string() + "' --out '" + (dir / "out").string() + "'", dir);
  REQUIRE(r.code == 0);
  const json j = json::parse(slurp(dir / "out" / "pressure.json"));
  CHECK(std::abs(j["pressure"].get<double>() - 0.6931471805599453) <= 1e-13);
  const json m = json::parse(slurp(dir / "out" / "manifest.json"));
  CHECK(m["seed"] == 1);
  CHECK(m["experiment"] == "pressure");
  CHECK(m.contains("wall_time_s"));
  CHECK(m["config_fnv1a"].get<std::string>().size() == 16);
  // Every artifact is listed in the manifest, and nothing else sits in the directory.
  std::set<std::string> listed{"manifest.json"};
  for (const auto& f : m["files"]) listed.insert(f["name"].get<std::string>());
  std::set<std::string> present;
  for (const auto& e : fs::directory_iterator(dir / "out")) present.insert(e.path().filename().string());
  CHECK(listed == present);
}

TEST_CASE("missing roof value names the word") {
  const auto dir = scratch("missing_roof");
  json j = full2_pressure();
  j["system"]["roof"] = {{"depth", 1}, {"values", {{"0", 1.0}}}};
  const auto cfg = write_config(dir, j);
  const auto r = sh("run '" + cfg.string() + "' --out '" + (dir / "out").string() + "'", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("'1'") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "out"));
}

TEST_CASE("config errors map to exit code 2") {
  const auto dir = scratch("errors");
  json j = full2_pressure();
  j["experiment"] = "spectral";
  auto r = sh("run '" + write_config(dir, j).string() + "'", dir);
  CHECK(r.code == 2);
  for (const auto& e : mixlab::cli::experiments()) CHECK(r.err.find(e.name) != std::string::npos);

  j = full2_pressure();
  j["system"]["transition"] = {{0, 1}, {1, 0}};
  CHECK(sh("run '" + write_config(dir, j).string() + "'", dir).code == 2);

  j = full2_pressure();
  j["parameters"] = {{"bogus", 1}};
  r = sh("run '" + write_config(dir, j).string() + "'", dir);
  CHECK(r.code == 2);
  CHECK(r.err.find("bogus") != std::string::npos);

  CHECK(sh("run '" + (dir / "nope.json").string() + "'", dir).code == 2);
  std::ofstream(dir / "broken.json") << "{\"experiment\": ";
  CHECK(sh("run '" + (dir / "broken.json").string() + "'", dir).code == 2);
}

TEST_CASE("budget exhaustion maps to exit code 4") {
  const auto dir = scratch("budget");
  json j = full2_pressure();
  j["experiment"] = "equidistribution";
  j["parameters"] = {{"t_max", 30}, {"irreps", {1}}, {"budget", 100}};
  CHECK(sh("run '" + write_config(dir, j).string() + "' --out '" + (dir / "o").string() + "'", dir).code == 4);
}

TEST_CASE("experiment listing") {
  const auto dir = scratch("list");
  const auto plain = sh("list", dir);
  REQUIRE(plain.code == 0);
  int lines = 0;
  for (char ch : plain.out) lines += ch == '\n';
  CHECK(lines == 8);
  const auto js = sh("list --json", dir);
  REQUIRE(js.code == 0);
  const json arr = json::parse(js.out);
  REQUIRE(arr.is_array());
  CHECK(arr.size() == 8);
  const std::vector<std::string> names{"pressure", "gibbs", "correlations", "dolgopyat",
                                       "diophantine", "brin", "equidistribution", "lfunction"};
  for (std::size_t i = 0; i < names.size(); ++i) CHECK(arr[i]["name"] == names[i]);
}

TEST_CASE("round-trip number formatting") {
  for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 0.6931471805599453}) {
    const std::string s = mixlab::cli::format_double(v);
    CHECK(std::stod(s) == v);
  }
  CHECK(mixlab::cli::format_double(0.5) == "0.5");
}

TEST_CASE("documented examples run and are deterministic") {
  const auto dir = scratch("examples");
  for (const auto& info : mixlab::cli::experiments()) {
    const fs::path cfg = kDocs / "examples" / (info.name + ".json");
    REQUIRE(fs::exists(cfg));
    std::map<std::string, std::string> first;
    for (const char* threads : {"1", "4", "1"}) {
      const fs::path out = dir / (info.name + "_" + threads);
      fs::remove_all(out);
      const auto r = sh("run '" + cfg.string() + "' --threads " + threads + " --out '" + out.string() + "'", dir);
      INFO(info.name << ": " << r.err);
      REQUIRE(r.code == 0);
      for (const auto& e : fs::directory_iterator(out)) {
        const std::string name = e.path().filename().string();
        if (name == "manifest.json") continue;
        const std::string body = slurp(e.path());
        if (!first.count(name)) first[name] = body;
        CHECK(first[name] == body);
      }
    }
    CHECK_FALSE(first.empty());
  }
}

TEST_CASE("seed override changes Monte Carlo output only through the seed") {
  const auto dir = scratch("seed");
  const fs::path cfg = kDocs / "examples" / "correlations.json";
  auto body = [&](const std::string& extra, const std::string& tag) {
    const fs::path out = dir / tag;
    REQUIRE(sh("run '" + cfg.string() + "' " + extra + " --out '" + out.string() + "'", dir).code == 0);
    return slurp(out / "correlations.csv");
  };
  const std::string a = body("--seed 11", "a");
  CHECK(a == body("--seed 11", "b"));
  CHECK(a != body("--seed 12", "c"));
}
