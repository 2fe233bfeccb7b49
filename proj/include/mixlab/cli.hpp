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

// Experiment driver behind the `mixlab` executable.  docs/config.md
// describes the JSON config format.

#ifndef MIXLAB_CLI_HPP_
#define MIXLAB_CLI_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "mixlab/cocycle.hpp"
#include "mixlab/error.hpp"
#include "mixlab/grp.hpp"

namespace mixlab::cli {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentInfo {
  std::string name;
  std::string description;
};

// The eight experiments in their stable order.
const std::vector<ExperimentInfo>& experiments();
void list_experiments(std::ostream& out, bool as_json);

struct SystemConfig {
  cocycle::SkewSystem system;
  thermo::RealFn potential;
};

struct ExperimentConfig {
  std::string experiment;
  std::uint64_t seed = 0;
  std::string output_dir = "mixlab_out";
  nlohmann::json system;
  nlohmann::json parameters;
  std::string raw;  // config file bytes, for the manifest hash
};

// Schema checks; throws kConfigInvalid with the offending field named.
ExperimentConfig parse_config(const std::string& text);
SystemConfig build_system(const nlohmann::json& system);

grp::Group parse_group(const nlohmann::json& j);
grp::GroupElement parse_element(const grp::Group& g, const nlohmann::json& j);
grp::Irrep parse_irrep(const grp::Group& g, const nlohmann::json& j);
sft::Word parse_word(const std::string& key);

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> out_dir;
};

// 0 on success; 2 invalid config, 3 solver failure, 4 budget exhausted,
// 1 for anything else.  Diagnostics go to `err`.
int run(const std::string& config_path, const RunOptions& options, std::ostream& err);
int exit_code(ErrorCode code);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
std::uint64_t fnv1a(const std::string& bytes);

}  // namespace mixlab::cli

#endif  // MIXLAB_CLI_HPP_
