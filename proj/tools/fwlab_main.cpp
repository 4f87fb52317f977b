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

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fwlab/cli.hpp"

int main(int argc, char** argv) {
  namespace fc = fwlab::cli;

  CLI::App app{"fwlab: numerical experiments on Wasserstein-space comparison principles"};
  app.set_version_flag("--version", "fwlab " + fc::tool_version());
  app.require_subcommand(1);

  fc::RunOptions opts;
  std::string scenario;
  std::string out_dir = ".";

  auto common = [&](CLI::App* sub) {
    sub->add_option("--set", opts.overrides, "Override a scenario value, key.path=value (repeatable)")
        ->allow_extra_args(false);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--threads", opts.threads, "Worker thread cap (0: all cores)");
    sub->add_flag("--dump", opts.dump, "Write intermediate tables where the target has them");
  };

  CLI::App* run = app.add_subcommand("run", "Run a scenario file; the target comes from the file");
  run->add_option("scenario", scenario, "Scenario JSON file")->required();
  common(run);

  for (const std::string& t : fc::targets()) {
    CLI::App* sub = app.add_subcommand(t, "Run a '" + t + "' scenario");
    sub->add_option("--scenario,scenario", scenario, "Scenario JSON file")->required();
    common(sub);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? fc::kExitOk : fc::kExitInputError;
  }

  const CLI::App* chosen = app.get_subcommands().front();
  if (chosen->get_name() != "run") opts.target = chosen->get_name();
  opts.out_dir = out_dir;

  const fc::RunResult res = fc::run_file(scenario, opts);
  if (!res.message.empty()) std::cerr << "fwlab: " << res.message << '\n';
  for (const auto& f : res.files) std::cout << f.string() << '\n';
  return res.status;
}
