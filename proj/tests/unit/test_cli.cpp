#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "cli.hpp"
#include "copo/harness.hpp"
#include "temp_dir.hpp"

using namespace copo;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result call(std::vector<std::string> args) {
  args.insert(args.begin(), "copo");
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

std::map<std::string, double> parse_lines(const std::string& text) {
  std::map<std::string, double> m;
  std::istringstream in(text);
  std::string key, value;
  while (in >> key >> value) {
    try {
      m[key] = std::stod(value);
    } catch (...) {
    }
  }
  return m;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors") {
  CHECK(call({}).code == cli::usage_error);
  CHECK(call({"frobnicate"}).code == cli::usage_error);
  CHECK(call({"run", "--no-such-flag"}).code == cli::usage_error);
  CHECK(call({"run", "--T", "abc"}).code == cli::usage_error);
  CHECK(call({"bound", "--T", "10"}).code == cli::usage_error);
  CHECK(call({"run", "--algo", "ucb", "--T", "5"}).code == cli::usage_error);
}

TEST_CASE("zero horizon is refused before any output") {
  test::TempDir dir("cli_t0");
  const auto out = dir.path() / "o";
  const auto r = call({"run", "--T", "0", "--out", out.string()});
  CHECK(r.code == cli::usage_error);
  CHECK_FALSE(r.err.empty());
  CHECK_FALSE(std::filesystem::exists(out));
}

TEST_CASE("help lists the flags") {
  const auto r = call({"run", "--help"});
  CHECK(r.code == 0);
  for (const char* flag : {"--env", "--T", "--delta", "--seeds", "--algo", "--alpha", "--budget-mode",
                           "--d2-mode", "--out", "--config", "--checkpoint"}) {
    CHECK_MESSAGE(r.out.find(flag) != std::string::npos, flag);
  }
  CHECK(call({"--help"}).out.find("sweep") != std::string::npos);
}

TEST_CASE("bound matches the library") {
  const auto r = call({"bound", "--case", "discrete", "--T", "2000", "--K", "5", "--v-eps", "2",
                       "--delta", "0.1", "--alpha", "0.1", "--mu-b", "0.7", "--gap", "0.1"});
  REQUIRE(r.code == 0);
  BoundConstants c;
  c.v_eps = 2.0;
  c.delta = 0.1;
  c.alpha = 0.1;
  c.baseline_mu = 0.7;
  c.baseline_gap = 0.1;
  c.arm_count = 5;
  const auto m = parse_lines(r.out);
  CHECK(m.at("bound") == theoretical_bound(c, 2000, BoundCase::discrete));
  CHECK(m.at("L") == bound_constant_discrete(c, 2000));

  const auto rc = call({"bound", "--case", "compact", "--T", "100", "--d", "1", "--P", "0.4",
                        "--mu-b", "0.5", "--alpha", "0.2"});
  REQUIRE(rc.code == 0);
  CHECK(parse_lines(rc.out).count("L'") == 1);
  CHECK(call({"bound", "--T", "10", "--mu-b", "0.5", "--alpha", "0"}).code == cli::usage_error);
}

TEST_CASE("run exports traces and a summary") {
  test::TempDir dir("cli_run");
  const auto out = dir.path() / "o";
  const auto r = call({"run", "--env", "synthetic", "--algo", "icopo", "--T", "20", "--seeds", "2",
                       "--out", out.string()});
  CHECK(r.code == 0);
  CHECK(std::filesystem::exists(out / "icopo_alpha0.1_seed0.csv"));
  CHECK(std::filesystem::exists(out / "icopo_alpha0.1_seed1.csv"));
  CHECK(std::filesystem::exists(out / "summary.json"));

  const auto s = call({"summarize", "--dir", out.string(), "--env", "synthetic"});
  CHECK(s.code == 0);
}

TEST_CASE("sweep crosses algorithms and alphas") {
  test::TempDir dir("cli_sweep");
  const auto out = dir.path() / "o";
  const auto r = call({"sweep", "--algos", "copo,baseline", "--alphas", "0.1,0.2", "--T", "10",
                       "--seed-list", "4", "--out", out.string()});
  CHECK(r.code == 0);
  for (const char* f : {"copo_alpha0.1_seed4.csv", "copo_alpha0.2_seed4.csv",
                        "baseline_alpha0.1_seed4.csv", "baseline_alpha0.2_seed4.csv"}) {
    CHECK_MESSAGE(std::filesystem::exists(out / f), f);
  }
}

TEST_CASE("config file supplies defaults and flags override it") {
  test::TempDir dir("cli_cfg");
  const auto cfg = dir.path() / "exp.cfg";
  std::ofstream(cfg) << "env = synthetic\nalgo = copo\nT = 12\nseeds = 1\nalpha = 0.3\n"
                        "synthetic.arms = 0, 0.5\nsynthetic.baseline = 0.5\n";
  const auto out = dir.path() / "o";
  CHECK(call({"run", "--config", cfg.string(), "--out", out.string()}).code == 0);
  CHECK(std::filesystem::exists(out / "copo_alpha0.3_seed0.csv"));
  CHECK(call({"run", "--config", cfg.string(), "--alpha", "0.4", "--out", out.string()}).code == 0);
  CHECK(std::filesystem::exists(out / "copo_alpha0.4_seed0.csv"));
  CHECK(call({"run", "--config", (dir.path() / "missing.cfg").string()}).code != 0);
}

}  // TEST_SUITE
