// Copyright 2026 The fwlab Authors
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

#include <gtest/gtest.h>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fwlab/cli.hpp"

using namespace fwlab::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// rho_F^2(delta_0, delta_1) in d = 1 with the default Fourier configuration.
constexpr double kRhoSqDirac01 = 0.0289262640970132;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fwlab_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

json metric_scenario() {
  return json::parse(R"({
    "schema": 1, "name": "diracs", "target": "metric",
    "params": {"dim": 1, "cases": [
      {"id": "d01", "mu": {"dim": 1, "atoms": [[0, 1]]}, "nu": {"dim": 1, "atoms": [[1, 1]]}}]}
  })");
}

json game_scenario() {
  return json::parse(R"({
    "schema": 1, "name": "game", "target": "game-sim", "seed": 3,
    "params": {"K": 2, "T": [2, 3], "forecaster": "uniform", "adversary": "uniform", "runs": 400}
  })");
}

RunOptions in(const fs::path& dir) {
  RunOptions o;
  o.out_dir = dir;
  return o;
}

std::vector<std::string> data_rows(const fs::path& csv) {
  std::ifstream is(csv);
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  return rows;
}

std::vector<std::string> cells(const std::string& row) {
  std::vector<std::string> out;
  std::stringstream ss(row);
  std::string c;
  while (std::getline(ss, c, ',')) out.push_back(c);
  return out;
}

}  // namespace

TEST(Cli, MetricDiracRow) {
  const fs::path dir = scratch("metric");
  const RunResult r = run(metric_scenario(), in(dir));
  ASSERT_EQ(r.status, kExitOk) << r.message;
  const auto rows = data_rows(dir / "diracs.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "case,inputs_hash,rho_F,d_F,config_id");
  const auto c = cells(rows[1]);
  ASSERT_EQ(c.size(), 5u);
  EXPECT_EQ(c[0], "d01");
  const double rho = std::stod(c[2]);
  EXPECT_NEAR(rho * rho, kRhoSqDirac01, 1e-9);
  EXPECT_EQ(c[2], c[3]);  // t = s, m = n = 0
  const json summary = json::parse(slurp(dir / "diracs.json"));
  EXPECT_EQ(summary.at("status"), "pass");
  EXPECT_EQ(summary.at("config_hash"), r.config_hash);
  EXPECT_EQ(summary.at("tool"), "fwlab");
}

TEST(Cli, MalformedJsonIsInputError) {
  const fs::path dir = scratch("malformed");
  std::ofstream(dir / "bad.json") << "{\"target\": ";
  const RunResult r = run_file(dir / "bad.json", in(dir));
  EXPECT_EQ(r.status, kExitInputError);
  EXPECT_NE(r.message.find("malformed"), std::string::npos);
  EXPECT_EQ(run_file(dir / "missing.json", in(dir)).status, kExitInputError);
  EXPECT_TRUE(r.files.empty());
}

TEST(Cli, UnknownTargetAndKeysAreNamed) {
  const fs::path dir = scratch("unknown");
  json s = metric_scenario();
  s["target"] = "nope";
  RunResult r = run(s, in(dir));
  EXPECT_EQ(r.status, kExitInputError);
  EXPECT_NE(r.message.find("nope"), std::string::npos);

  s = metric_scenario();
  s["params"]["bogus_key"] = 1;
  r = run(s, in(dir));
  EXPECT_EQ(r.status, kExitInputError);
  EXPECT_NE(r.message.find("bogus_key"), std::string::npos);

  s = metric_scenario();
  s["extra"] = true;
  r = run(s, in(dir));
  EXPECT_EQ(r.status, kExitInputError);
  EXPECT_NE(r.message.find("extra"), std::string::npos);
  EXPECT_TRUE(fs::is_empty(dir));
}

TEST(Cli, StochasticTargetsNeedSeed) {
  const fs::path dir = scratch("seed");
  json s = game_scenario();
  s.erase("seed");
  const RunResult r = run(s, in(dir));
  EXPECT_EQ(r.status, kExitInputError);
  EXPECT_NE(r.message.find("seed"), std::string::npos);
}

TEST(Cli, SubcommandMustMatchScenarioTarget) {
  const fs::path dir = scratch("subcommand");
  RunOptions o = in(dir);
  o.target = "dp-value";
  EXPECT_EQ(run(metric_scenario(), o).status, kExitInputError);
  o.target = "metric";
  EXPECT_EQ(run(metric_scenario(), o).status, kExitOk);
  json bare = metric_scenario();
  bare.erase("target");
  EXPECT_EQ(run(bare, o).status, kExitOk);
}

TEST(Cli, FailedCheckExitsTwo) {
  const fs::path dir = scratch("failed");
  const json s = json::parse(R"({
    "schema": 1, "name": "comm", "target": "commutator-check", "seed": 4,
    "params": {"n": 32, "cases": 5, "modes": 6, "max_ratio": 1e-30}
  })");
  const RunResult r = run(s, in(dir));
  EXPECT_EQ(r.status, kExitFailedCheck);
  const json summary = json::parse(slurp(dir / "comm.json"));
  EXPECT_EQ(summary.at("status"), "failed-check");
  EXPECT_TRUE(summary.contains("detail"));
  // outputs are still written
  EXPECT_TRUE(fs::exists(dir / "comm.csv"));
}

TEST(Cli, HamiltonianScaledConstantFails) {
  const fs::path dir = scratch("hamiltonian");
  json s = json::parse(R"({
    "schema": 1, "name": "ham", "target": "hamiltonian", "seed": 14,
    "params": {"coeffs": "lq1d-sat", "check": "assumption-i", "samples": 20, "holdout": 20}
  })");
  EXPECT_EQ(run(s, in(dir)).status, kExitOk);
  s["params"]["lipschitz_scale"] = 0.01;
  EXPECT_EQ(run(s, in(dir)).status, kExitFailedCheck);
  s["params"]["lipschitz_scale"] = 0.0;
  EXPECT_EQ(run(s, in(dir)).status, kExitInputError);
}

TEST(Cli, RerunIsByteIdenticalAcrossThreadCounts) {
  const fs::path a = scratch("rerun_a"), b = scratch("rerun_b");
  RunOptions oa = in(a), ob = in(b);
  oa.threads = 1;
  ob.threads = 2;
  ASSERT_EQ(run(game_scenario(), oa).status, kExitOk);
  ASSERT_EQ(run(game_scenario(), ob).status, kExitOk);
  EXPECT_EQ(slurp(a / "game.csv"), slurp(b / "game.csv"));
  EXPECT_EQ(slurp(a / "game.json"), slurp(b / "game.json"));
  EXPECT_EQ(data_rows(a / "game.csv").size(), 3u);
}

TEST(Cli, ConfigHashRoundTrip) {
  const fs::path dir = scratch("hash");
  const RunResult r = run(game_scenario(), in(dir));
  ASSERT_EQ(r.status, kExitOk);
  EXPECT_EQ(r.config_hash.size(), 16u);
  EXPECT_EQ(read_csv_config_hash(dir / "game.csv"), r.config_hash);
  EXPECT_EQ(config_hash(parse_scenario(game_scenario())), r.config_hash);

  json other = game_scenario();
  other["seed"] = 4;
  EXPECT_NE(config_hash(parse_scenario(other)), r.config_hash);
  other = game_scenario();
  other["params"]["runs"] = 401;
  EXPECT_NE(config_hash(parse_scenario(other)), r.config_hash);

  const std::string head = slurp(dir / "game.csv");
  EXPECT_EQ(head.rfind("# tool: fwlab " + tool_version() + "\n", 0), 0u);
  EXPECT_NE(head.find("# seed: 3\n"), std::string::npos);
  EXPECT_EQ(head.find('\r'), std::string::npos);
}

TEST(Cli, Overrides) {
  json s = game_scenario();
  apply_override(s, "runs=10");
  apply_override(s, "seed=9");
  apply_override(s, "forecaster=greedy");
  apply_override(s, "T=[4,5]");
  apply_override(s, "outputs.csv=x.csv");
  apply_override(s, "sim.dt=0.5");
  EXPECT_EQ(s["params"]["runs"], 10);
  EXPECT_EQ(s["seed"], 9);
  EXPECT_EQ(s["params"]["forecaster"], "greedy");
  EXPECT_EQ(s["params"]["T"], json::parse("[4,5]"));
  EXPECT_EQ(s["outputs"]["csv"], "x.csv");
  EXPECT_EQ(s["params"]["sim"]["dt"], 0.5);
  EXPECT_THROW(apply_override(s, "noequals"), std::exception);
  EXPECT_THROW(apply_override(s, "=3"), std::exception);

  const fs::path dir = scratch("overrides");
  RunOptions o = in(dir);
  o.overrides = {"runs=50", "name=short"};
  const RunResult r = run(game_scenario(), o);
  ASSERT_EQ(r.status, kExitOk) << r.message;
  EXPECT_TRUE(fs::exists(dir / "short.csv"));
  const json summary = json::parse(slurp(dir / "short.json"));
  EXPECT_EQ(summary.at("result").at("runs"), 50);
}

TEST(Cli, DumpOnlyWhenRequested) {
  const json s = json::parse(R"({
    "schema": 1, "name": "dp", "target": "dp-value", "params": {"K": 2, "T": [1, 2]}
  })");
  const fs::path dir = scratch("dump");
  RunOptions o = in(dir);
  ASSERT_EQ(run(s, o).status, kExitOk);
  EXPECT_FALSE(fs::exists(dir / "dp.dump.json"));
  o.dump = true;
  const RunResult r = run(s, o);
  ASSERT_EQ(r.status, kExitOk);
  ASSERT_TRUE(fs::exists(dir / "dp.dump.json"));
  const json d = json::parse(slurp(dir / "dp.dump.json"));
  EXPECT_EQ(d.at("config_hash"), r.config_hash);
  EXPECT_EQ(d.at("table").at("tables").size(), 2u);
  EXPECT_FALSE(d.at("table").at("tables")[1].at("entries").empty());
  const auto rows = data_rows(dir / "dp.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(cells(rows[1])[1], "0.5");
}

TEST(Cli, CsvFieldQuoting) {
  EXPECT_EQ(csv_field("plain"), "plain");
  EXPECT_EQ(csv_field("a,b"), "\"a,b\"");
  EXPECT_EQ(csv_field("say \"hi\""), "\"say \"\"hi\"\"\"");
  EXPECT_EQ(csv_field("two\nlines"), "\"two\nlines\"");
}

TEST(Cli, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 1e300, 0.0, 123456789.0}) {
    const std::string s = format_double(x);
    double y = 0.0;
    std::from_chars(s.data(), s.data() + s.size(), y);
    EXPECT_EQ(x, y) << s;
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(std::nan("")), "nan");
  EXPECT_EQ(format_double(-HUGE_VAL), "-inf");
}

TEST(Cli, ComparisonDoublingSingleEps) {
  const json s = json::parse(R"({
    "schema": 1, "name": "dbl", "target": "comparison-doubling", "seed": 5,
    "params": {"u": {"name": "constant", "value": 1.0}, "v": {"name": "constant", "value": 1.0},
               "support": [0.0, 0.3], "eps": 0.1, "delta": 0.2,
               "doubling": {"starts": 4, "diagonal_probes": 16, "m_radius": 0.3}}
  })");
  const fs::path dir = scratch("doubling");
  const RunResult r = run(s, in(dir));
  ASSERT_EQ(r.status, kExitOk) << r.message;
  const auto rows = data_rows(dir / "dbl.csv");
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_LE(std::stod(cells(rows[1])[2]), 1e-12);  // penalty
  // decreasing eps is required for the decay check
  json bad = s;
  bad["params"]["eps"] = {0.1, 0.5};
  EXPECT_EQ(run(bad, in(dir)).status, kExitInputError);
}
