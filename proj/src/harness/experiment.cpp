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

#include "sqlab/harness/experiment.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "json.hpp"
#include "sqlab/core/csv.hpp"
#include "sqlab/core/error.hpp"

namespace sqlab::harness {

namespace {

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double get_double(const std::map<std::string, std::string>& section,
                  const std::string& key, double fallback) {
  const auto it = section.find(key);
  return it == section.end() ? fallback : std::stod(it->second);
}

std::uint64_t get_uint(const std::map<std::string, std::string>& section,
                       const std::string& key, std::uint64_t fallback) {
  const auto it = section.find(key);
  return it == section.end() ? fallback : std::stoull(it->second);
}

std::string get_string(const std::map<std::string, std::string>& section,
                       const std::string& key, const std::string& fallback) {
  const auto it = section.find(key);
  return it == section.end() ? fallback : it->second;
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(trim(item)));
  return out;
}

void atomic_write(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp + " for writing");
    out << content;
    if (!out.flush()) throw Error("write to " + tmp + " failed");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw Error("atomic rename to " + path + " failed");
  }
}

}  // namespace

ConfigSections parse_config_text(const std::string& text) {
  ConfigSections sections;
  std::string current = "experiment";
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": unterminated section header");
      }
      current = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    sections[current][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return sections;
}

ConfigSections load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file: " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

Population PopulationSpec::build() const {
  switch (kind) {
    case Kind::kUniform:
      return Population::uniform(Universe::indexed(size));
    case Kind::kTabulated:
      return Population::tabulated(Universe::indexed(weights.size()), weights);
    case Kind::kBernoulliProduct: {
      std::vector<double> bs = biases;
      if (bs.size() == 1 && dim > 1) bs.assign(dim, biases[0]);
      return Population::bernoulli_product(bs);
    }
    case Kind::kGaussianProduct:
      return Population::gaussian_product(dim);
  }
  throw ConfigError("unknown population kind");
}

void ExperimentConfig::validate() const {
  if (trials > 0 && n == 0) {
    throw ConfigError("mechanism.n (dataset size per trial) must be positive");
  }
  mechanism.validate();
  // Surface strategy/population/mechanism incompatibilities before any
  // trial runs: build everything once against a probe dataset.
  if (trials > 0) {
    Population pop = population.build();
    Dataset probe = sample_dataset(pop, n, seed);
    auto session = mechanisms::open_session(mechanism, probe, seed);
    analysts::make_analyst(strategy, pop, n, RngStream(seed));
  }
}

ExperimentConfig ExperimentConfig::from_sections(const ConfigSections& all) {
  ExperimentConfig cfg;
  const auto experiment = all.count("experiment")
                              ? all.at("experiment")
                              : std::map<std::string, std::string>{};
  cfg.id = get_string(experiment, "id", cfg.id);
  cfg.trials = get_uint(experiment, "trials", cfg.trials);
  cfg.seed = get_uint(experiment, "seed", cfg.seed);
  cfg.out = get_string(experiment, "out", cfg.out);
  cfg.sizing_constant = get_double(experiment, "C", cfg.sizing_constant);
  cfg.notes = get_string(experiment, "notes", "");

  if (all.count("population")) {
    const auto& pop = all.at("population");
    const std::string kind = get_string(pop, "kind", "uniform");
    if (kind == "uniform") {
      cfg.population.kind = PopulationSpec::Kind::kUniform;
      cfg.population.size = get_uint(pop, "size", 2);
    } else if (kind == "tabulated") {
      cfg.population.kind = PopulationSpec::Kind::kTabulated;
      cfg.population.weights = parse_double_list(get_string(pop, "weights", ""));
    } else if (kind == "bernoulli-product") {
      cfg.population.kind = PopulationSpec::Kind::kBernoulliProduct;
      cfg.population.dim = static_cast<unsigned>(get_uint(pop, "dim", 1));
      cfg.population.biases =
          parse_double_list(get_string(pop, "biases", "0.5"));
    } else if (kind == "gaussian-product") {
      cfg.population.kind = PopulationSpec::Kind::kGaussianProduct;
      cfg.population.dim = static_cast<unsigned>(get_uint(pop, "dim", 1));
    } else {
      throw ConfigError("unknown population kind: " + kind);
    }
  }

  if (all.count("mechanism")) {
    const auto& mech = all.at("mechanism");
    std::ostringstream text;
    for (const auto& [key, value] : mech) {
      if (key == "n") continue;
      text << key << '=' << value << '\n';
    }
    cfg.mechanism = mechanisms::OracleConfig::from_text(text.str());
    cfg.n = get_uint(mech, "n", 0);
  }

  if (all.count("strategy")) {
    const auto& strat = all.at("strategy");
    cfg.strategy.kind = analysts::StrategySpec::parse_kind(
        get_string(strat, "kind", "non-adaptive-random"));
    cfg.strategy.m = get_uint(strat, "m", cfg.strategy.m);
    cfg.strategy.d =
        static_cast<unsigned>(get_uint(strat, "d", cfg.strategy.d));
    cfg.strategy.top_count = get_uint(strat, "top_count", 0);
    cfg.strategy.r = static_cast<unsigned>(get_uint(strat, "r", cfg.strategy.r));
    cfg.strategy.queries_per_round = get_uint(
        strat, "queries_per_round", cfg.strategy.queries_per_round);
    cfg.strategy.overfit_rounds = static_cast<unsigned>(
        get_uint(strat, "overfit_rounds", cfg.strategy.overfit_rounds));
    cfg.strategy.guess_from_population =
        get_string(strat, "guess_from_population", "0") == "1";
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  return from_sections(load_config_file(path));
}

namespace {

ResultRow run_trial(const ExperimentConfig& cfg, const Population& pop,
                    std::size_t trial) {
  const std::uint64_t base = 3 * static_cast<std::uint64_t>(trial);
  Dataset data = sample_dataset(pop, cfg.n, derive_seed(cfg.seed, base));
  auto session =
      mechanisms::open_session(cfg.mechanism, data, derive_seed(cfg.seed, base + 1));
  ResultRow row;
  row.trial = trial;

  if (cfg.strategy.kind == analysts::StrategySpec::Kind::kSignAggregation) {
    // Gaussian-population runs report on the raw (affine-inverted) scale;
    // the violation flag stays on the [0,1] query scale.
    auto result = analysts::sign_aggregation_attack(
        *session, pop, cfg.strategy.d, 1000, derive_seed(cfg.seed, base + 2));
    row.final_reported = result.reported_unrescaled;
    row.final_true = result.true_estimate;
    row.final_empirical =
        (result.transcript.entries.back().empirical_on_answering_set - 0.5) *
        2.0 * result.truncation_B;
    row.final_gap = std::abs(row.final_reported - row.final_true);
    row.violation =
        std::abs(result.transcript.entries.back().empirical_on_answering_set -
                 result.transcript.entries.back().true_expectation.value_or(
                     0.5)) > cfg.mechanism.tau;
    row.rounds_detected = result.transcript.rounds_detected;
  } else {
    auto analyst = analysts::make_analyst(cfg.strategy, pop, cfg.n,
                                          RngStream(derive_seed(cfg.seed, base + 2)));
    analysts::ScoringOptions scoring;
    scoring.mode = analysts::ScoringMode::kFinalOnly;
    scoring.mc_seed = derive_seed(cfg.seed, base + 2);
    auto run = analysts::run_analyst(*analyst, *session, pop, scoring);
    if (!run.queries.empty()) {
      const Query& final_query = run.queries.back();
      const auto& final_entry = run.transcript.entries.back();
      row.final_reported = final_entry.answer.value_or(0.0);
      row.final_true = final_entry.true_expectation.value_or(0.0);
      row.final_empirical = empirical_mean(data, final_query);
      row.final_gap = std::abs(row.final_reported - row.final_true);
      row.violation =
          std::abs(row.final_empirical - row.final_true) > cfg.mechanism.tau;
    }
    row.rounds_detected = run.transcript.rounds_detected;
  }
  const auto spent = session->spent();
  row.epsilon_spent = spent.epsilon;
  row.delta_spent = spent.delta;
  return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  Population pop = cfg.population.build();

  ExperimentResult result;
  result.rows.reserve(cfg.trials);
  for (std::size_t t = 0; t < cfg.trials; ++t) {
    result.rows.push_back(run_trial(cfg, pop, t));
  }

  CompensatedSum reported;
  CompensatedSum gap;
  for (const auto& row : result.rows) {
    reported.add(row.final_reported);
    gap.add(row.final_gap);
    if (row.violation) ++result.violations;
  }
  if (!result.rows.empty()) {
    result.mean_reported = reported.value() / result.rows.size();
    result.mean_gap = gap.value() / result.rows.size();
  }

  std::ostringstream csv;
  write_csv_row(csv, {"experiment_id", "trial", "final_reported", "final_true",
                      "final_empirical", "final_gap", "violation",
                      "rounds_detected", "epsilon_spent", "delta_spent"});
  for (const auto& row : result.rows) {
    write_csv_row(csv, {cfg.id, std::to_string(row.trial),
                        csv_double(row.final_reported),
                        csv_double(row.final_true),
                        csv_double(row.final_empirical),
                        csv_double(row.final_gap),
                        row.violation ? "1" : "0",
                        std::to_string(row.rounds_detected),
                        csv_double(row.epsilon_spent),
                        csv_double(row.delta_spent)});
  }

  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();

  nlohmann::json meta;
  meta["experiment_id"] = cfg.id;
  meta["tool"] = "sqlab 0.1.0";
  meta["master_seed"] = cfg.seed;
  meta["trials"] = cfg.trials;
  meta["n"] = cfg.n;
  meta["sizing_constant"] = cfg.sizing_constant;
  meta["log_base"] = "natural";
  meta["stream_assignment"] =
      "trial t draws sub-seeds derive_seed(master, 3t + {0: dataset, "
      "1: session, 2: strategy})";
  meta["mechanism"] = mechanisms::mechanism_name(cfg.mechanism.mechanism);
  meta["mechanism_config"] = cfg.mechanism.to_text();
  meta["strategy"] = cfg.strategy.kind_name();
  meta["notes"] = cfg.notes;
  meta["wall_time_seconds"] = elapsed;
  if (cfg.n > 0) {
    // Resolved noise scales, for the record.
    Dataset probe = sample_dataset(pop, cfg.n, cfg.seed);
    auto session = mechanisms::open_session(cfg.mechanism, probe, cfg.seed);
    if (auto* laplace =
            dynamic_cast<mechanisms::LaplaceSession*>(session.get())) {
      meta["laplace_noise_scale"] = laplace->noise_scale();
      meta["per_query_epsilon"] = laplace->per_query_epsilon();
    } else if (auto* pmw =
                   dynamic_cast<mechanisms::PmwSession*>(session.get())) {
      meta["pmw_noise_scale"] = pmw->noise_scale();
      meta["pmw_eta"] = pmw->eta();
      meta["pmw_update_threshold"] = pmw->update_threshold();
      meta["pmw_hard_update_cap"] = pmw->hard_update_cap();
      meta["pmw_budget_note"] =
          "every round charges the per-update epsilon; the ledger total is "
          "conservative when m exceeds the update cap";
    } else if (auto* sparse = dynamic_cast<mechanisms::SparseVectorSession*>(
                   session.get())) {
      meta["sv_test_noise_scale"] = sparse->test_noise_scale();
      meta["sv_answer_noise_scale"] = sparse->answer_noise_scale();
    }
  }

  result.csv_path = cfg.out;
  result.metadata_path = cfg.out + ".meta.json";
  atomic_write(result.csv_path, csv.str());
  atomic_write(result.metadata_path, meta.dump(2) + "\n");
  return result;
}

}  // namespace sqlab::harness
