// Copyright 2026 The QNL Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qnl: qubit noise lab experiment runner"};
  qnl::cli::RunOptions options;
  std::uint64_t seed = 0;
  int jobs = 0;

  app.add_option("experiment", options.experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(qnl::cli::experiment_names()));
  app.add_option("--config", options.config_path, "Config file (TOML subset)")->required();
  auto* seed_opt = app.add_option("--seed", seed, "Master seed, overrides [run] seed");
  auto* jobs_opt = app.add_option("--jobs", jobs, "Worker threads (default: $QNL_JOBS or 1)")->check(CLI::PositiveNumber);
  app.add_option("--out", options.out_dir, "Output directory")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : qnl::cli::kExitUsage;
  }
  if (*seed_opt) options.seed = seed;
  if (*jobs_opt) options.jobs = jobs;
  return qnl::cli::run(options, std::cout, std::cerr);
}
