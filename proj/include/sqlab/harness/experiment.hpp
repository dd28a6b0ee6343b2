// Copyright 2026 The sqlab Authors
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

#ifndef SQLAB_HARNESS_EXPERIMENT_HPP_
#define SQLAB_HARNESS_EXPERIMENT_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqlab/analysts/analysts.hpp"
#include "sqlab/core/population.hpp"
#include "sqlab/mechanisms/oracle.hpp"

namespace sqlab::harness {

// Flat key=value config with [section] headers and '#' comments.
using ConfigSections = std::map<std::string, std::map<std::string, std::string>>;

ConfigSections parse_config_text(const std::string& text);
ConfigSections load_config_file(const std::string& path);

struct PopulationSpec {
  enum class Kind { kUniform, kTabulated, kBernoulliProduct, kGaussianProduct };
  Kind kind = Kind::kUniform;
  std::uint64_t size = 2;             // uniform over Indexed(size)
  unsigned dim = 1;                   // product populations
  std::vector<double> weights;        // explicit tabulated weights
  std::vector<double> biases;         // bernoulli biases (broadcast if one)
  Population build() const;
};

struct ExperimentConfig {
  std::string id = "experiment";
  std::size_t trials = 1;
  std::uint64_t seed = 0;
  std::string out = "results.csv";
  double sizing_constant = privacy::kDefaultSizingConstant;
  std::string notes;

  PopulationSpec population;
  mechanisms::OracleConfig mechanism;
  std::size_t n = 0;  // dataset size per trial; must be positive
  analysts::StrategySpec strategy;

  // Field-level validation of every referenced spec; throws ConfigError.
  void validate() const;

  static ExperimentConfig from_sections(const ConfigSections& sections);
  static ExperimentConfig from_file(const std::string& path);
};

struct ResultRow {
  std::size_t trial = 0;
  double final_reported = 0.0;
  double final_true = 0.0;
  double final_empirical = 0.0;
  double final_gap = 0.0;  // |reported - true|
  bool violation = false;  // |empirical - true| > tau
  int rounds_detected = 0;
  double epsilon_spent = 0.0;
  double delta_spent = 0.0;
};

struct ExperimentResult {
  std::vector<ResultRow> rows;
  std::string csv_path;
  std::string metadata_path;
  double mean_reported = 0.0;
  double mean_gap = 0.0;
  std::size_t violations = 0;
};

// Runs every trial with deterministic per-trial streams and writes the CSV
// plus a JSON metadata sidecar. Writes are atomic (temp file + rename);
// an interrupted run leaves no partial output. Reruns with an identical
// config produce byte-identical CSVs.
ExperimentResult run_experiment(const ExperimentConfig& config);

}  // namespace sqlab::harness

#endif  // SQLAB_HARNESS_EXPERIMENT_HPP_
