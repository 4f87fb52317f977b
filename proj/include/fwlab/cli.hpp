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

#pragma once

// Scenario files, overrides, dispatch to module operations and result
// emission for the fwlab command-line tool.
//
// Scenario (schema 1):
//   {"schema": 1, "name": "...", "target": "<subcommand>", "seed": 7,
//    "params": {...}, "outputs": {"csv": "a.csv", "json": "a.json", "dump": "a.dump.json"}}
// Output names default to <name>.csv, <name>.json and <name>.dump.json.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace fwlab::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitFailedCheck = 2;
inline constexpr int kSchemaVersion = 1;

std::string tool_version();

/// metric, sobolev-check, commutator-check, dissipation-check, hamiltonian,
/// filter-sim, game-sim, dp-value, comparison-doubling.
const std::vector<std::string>& targets();

struct Scenario {
  std::string name;
  std::string target;
  nlohmann::json params = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
  std::string csv_path, json_path, dump_path;  // relative to the output directory
};

/// Validates top-level keys and the target; params are checked by the target.
Scenario parse_scenario(const nlohmann::json& j);

/// "a.b.c=value": the path is relative to the scenario root when its first
/// segment is a top-level key (name, target, seed, outputs, params), and to
/// params otherwise. The value is parsed as JSON, falling back to a string.
void apply_override(nlohmann::json& scenario, const std::string& assignment);

/// FNV-1a over the tool version and the canonical dump of
/// {name, target, seed, params}, as 16 hex digits.
std::string config_hash(const Scenario& s);

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::vector<std::string> overrides;
  std::optional<std::string> target;  // subcommand given on the command line
  unsigned threads = 0;               // 0: no cap
  bool dump = false;
};

struct RunResult {
  int status = kExitOk;
  std::string message;
  std::string config_hash;
  std::vector<std::filesystem::path> files;
};

/// Never throws: input errors map to status 1, failed checks to status 2.
RunResult run(nlohmann::json scenario, const RunOptions& opts);
RunResult run_file(const std::filesystem::path& scenario_path, const RunOptions& opts);

/// RFC 4180 field quoting and locale-independent shortest round-trip doubles.
std::string csv_field(const std::string& s);
std::string format_double(double x);

/// Reads the "# config_hash: ..." line of an emitted CSV file.
std::optional<std::string> read_csv_config_hash(const std::filesystem::path& csv);

}  // namespace fwlab::cli
