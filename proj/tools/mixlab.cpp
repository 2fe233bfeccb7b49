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

#include <iostream>

#include <CLI11.hpp>

#include "mixlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"mixlab: symbolic models of group extensions of suspension flows"};
  app.set_version_flag("--version", std::string(mixlab::cli::kVersion));
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run the experiment described by a JSON config");
  std::string config;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string out_dir;
  run->add_option("config", config, "path to the config file")->required();
  auto* seed_opt = run->add_option("--seed", seed, "override the config seed");
  auto* threads_opt =
      run->add_option("--threads", threads, "worker threads (default: MIXLAB_THREADS or 1)")
          ->check(CLI::PositiveNumber);
  auto* out_opt = run->add_option("--out", out_dir, "override the output directory");

  auto* list = app.add_subcommand("list", "list the available experiments");
  bool as_json = false;
  list->add_flag("--json", as_json, "print a JSON array");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (list->parsed()) {
    mixlab::cli::list_experiments(std::cout, as_json);
    return 0;
  }
  mixlab::cli::RunOptions opts;
  if (*seed_opt) opts.seed = seed;
  if (*threads_opt) opts.threads = threads;
  if (*out_opt) opts.out_dir = out_dir;
  return mixlab::cli::run(config, opts, std::cerr);
}
