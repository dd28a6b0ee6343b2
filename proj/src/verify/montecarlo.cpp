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

#include "sqlab/verify/montecarlo.hpp"

#include <algorithm>
#include <cmath>

#include "sqlab/core/error.hpp"
#include "sqlab/privacy/privacy.hpp"

namespace sqlab::verify {

namespace {

// Deterministic per-trial stream assignment: four independent streams per
// trial index (dataset, session, strategy, scoring).
std::uint64_t trial_stream(std::uint64_t seed, std::size_t trial,
                           unsigned which) {
  return derive_seed(seed, 4 * static_cast<std::uint64_t>(trial) + which);
}

}  // namespace

FinalQueryStats monitor_final_query(const mechanisms::OracleConfig& config,
                                    const analysts::StrategySpec& strategy,
                                    const Population& population,
                                    std::size_t n, double tau,
                                    std::size_t trials, std::uint64_t seed) {
  if (trials == 0) throw InvalidArgument("monitor needs trials >= 1");
  const bool gaussian =
      population.kind() == PopulationKind::kGaussianProduct;
  FinalQueryStats stats;
  stats.trials = trials;
  CompensatedSum sum_emp;
  CompensatedSum sum_true;
  CompensatedSum sum_diff;
  CompensatedSum sum_diff_sq;
  for (std::size_t t = 0; t < trials; ++t) {
    Dataset data = sample_dataset(population, n, trial_stream(seed, t, 0));
    auto session =
        mechanisms::open_session(config, data, trial_stream(seed, t, 1));
    auto analyst = analysts::make_analyst(strategy, population, n,
                                          RngStream(trial_stream(seed, t, 2)));
    analysts::ScoringOptions scoring;
    scoring.mode = analysts::ScoringMode::kOff;
    analysts::RunResult run =
        analysts::run_analyst(*analyst, *session, population, scoring);
    if (run.queries.empty()) throw Error("strategy issued no queries");
    const Query& final_query = run.queries.back();
    const double emp = empirical_mean(data, final_query);
    const double tru =
        gaussian ? monte_carlo_expectation(population, final_query, 2000,
                                           trial_stream(seed, t, 3))
                       .estimate
                 : true_expectation(population, final_query);
    const double diff = emp - tru;
    if (std::abs(diff) > tau) ++stats.violations;
    sum_emp.add(emp);
    sum_true.add(tru);
    sum_diff.add(diff);
    sum_diff_sq.add(diff * diff);
  }
  const double t = static_cast<double>(trials);
  stats.violation_rate = static_cast<double>(stats.violations) / t;
  stats.mean_empirical = sum_emp.value() / t;
  stats.mean_true = sum_true.value() / t;
  const double mean_diff = sum_diff.value() / t;
  stats.gap = std::abs(mean_diff);
  if (trials > 1) {
    const double var = std::max(
        0.0, (sum_diff_sq.value() - t * mean_diff * mean_diff) / (t - 1.0));
    stats.gap_std_error = std::sqrt(var / t);
  }
  return stats;
}

TransferReport transfer_check(const mechanisms::OracleConfig& config,
                              const analysts::StrategySpec& strategy,
                              const Population& population, std::size_t n,
                              double bound, std::size_t trials,
                              std::uint64_t seed) {
  TransferReport report;
  report.mechanism = mechanisms::mechanism_name(config.mechanism);
  report.strategy = strategy.kind_name();
  report.tau = config.tau;
  report.bound = bound;
  report.stats = monitor_final_query(config, strategy, population, n,
                                     config.tau, trials, seed);
  report.rejection_count =
      binomial_rejection_count(trials, std::min(bound, 1.0));
  report.holds = report.stats.violations < report.rejection_count;
  return report;
}

ExpectationGapReport expectation_gap_check(
    const mechanisms::OracleConfig& config,
    const analysts::StrategySpec& strategy, const Population& population,
    std::size_t n, std::size_t trials, std::uint64_t seed) {
  ExpectationGapReport report;
  report.stats = monitor_final_query(config, strategy, population, n,
                                     config.tau, trials, seed);
  report.gap = report.stats.gap;
  report.std_error = report.stats.gap_std_error;
  report.bound = std::expm1(config.epsilon) + config.delta;
  report.holds = report.gap <= report.bound + 3.0 * report.std_error;
  return report;
}

BadEventReport bad_event_monitor(const mechanisms::OracleConfig& config,
                                 const analysts::StrategySpec& strategy,
                                 const Population& population, std::size_t n,
                                 double tau, std::size_t trials,
                                 std::uint64_t seed) {
  BadEventReport report;
  report.beta = hoeffding_bound(n, tau);
  report.bound = 3.0 * std::sqrt(report.beta);
  report.epsilon_cap = privacy::calibrate_epsilon_events(report.beta, n);
  report.epsilon_ok = config.epsilon <= report.epsilon_cap;
  report.stats =
      monitor_final_query(config, strategy, population, n, tau, trials, seed);
  report.rejection_count =
      binomial_rejection_count(trials, std::min(report.bound, 1.0));
  report.holds = report.stats.violations < report.rejection_count;
  return report;
}

SparseContractReport sparse_contract_check(
    const mechanisms::OracleConfig& config, const Population& population,
    std::size_t n, std::size_t queries, std::vector<std::size_t> bad_indices,
    double bad_guess_offset, std::size_t trials, std::uint64_t seed) {
  if (config.mechanism != mechanisms::Mechanism::kSparseVector) {
    throw ConfigError("sparse_contract_check needs mechanism=sparse-vector");
  }
  const Universe& universe = population.universe();
  if (!universe.tabulatable()) {
    throw UniverseNotTabulatable("contract audit needs a tabulatable universe");
  }
  std::sort(bad_indices.begin(), bad_indices.end());
  SparseContractReport report;
  report.trials = trials;
  report.queries_per_trial = queries;
  const double T = config.threshold;
  const double tau = config.tau;
  for (std::size_t t = 0; t < trials; ++t) {
    Dataset data = sample_dataset(population, n, trial_stream(seed, t, 0));
    auto session =
        mechanisms::open_session(config, data, trial_stream(seed, t, 1));
    RngStream qrng(trial_stream(seed, t, 2));
    bool violated = false;
    for (std::size_t i = 0; i < queries; ++i) {
      // Random [0,1]-valued query with an honest guess from the population.
      std::vector<double> values(universe.size());
      for (double& v : values) v = qrng.uniform();
      Query q = Query::from_table("q-" + std::to_string(i), std::move(values));
      double guess = true_expectation(population, q);
      const bool bad = std::binary_search(bad_indices.begin(),
                                          bad_indices.end(), i);
      if (bad) {
        guess += (guess <= 0.5 ? bad_guess_offset : -bad_guess_offset);
      }
      std::optional<double> answer;
      try {
        answer = session->answer(q, guess);
      } catch (const FiringBudgetExhausted&) {
        break;
      } catch (const SessionHalted&) {
        break;
      }
      ++report.answered_queries;
      const double emp =
          session->transcript().entries.back().empirical_on_answering_set;
      if (!answer) {
        if (std::abs(emp - guess) > T + tau) {
          ++report.query_violations;
          violated = true;
        }
      } else {
        ++report.firing_count;
        if (std::abs(emp - *answer) > tau) {
          ++report.query_violations;
          violated = true;
        }
      }
    }
    if (violated) ++report.trial_violations;
  }
  report.trial_violation_rate =
      static_cast<double>(report.trial_violations) /
      static_cast<double>(trials);
  report.per_query_violation_rate =
      report.answered_queries == 0
          ? 0.0
          : static_cast<double>(report.query_violations) /
                static_cast<double>(report.answered_queries);
  report.rejection_count = binomial_rejection_count(trials, config.beta);
  report.holds = report.trial_violations < report.rejection_count;
  return report;
}

EffectiveRoundsReport effective_rounds_check(
    const mechanisms::OracleConfig& config,
    const analysts::StrategySpec& strategy, const Population& population,
    std::size_t n, std::size_t trials, std::uint64_t seed) {
  EffectiveRoundsReport report;
  report.trials = trials;
  double rounds_total = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Dataset data = sample_dataset(population, n, trial_stream(seed, t, 0));
    auto session =
        mechanisms::open_session(config, data, trial_stream(seed, t, 1));
    auto analyst = analysts::make_analyst(strategy, population, n,
                                          RngStream(trial_stream(seed, t, 2)));
    analysts::ScoringOptions scoring;
    scoring.mode = analysts::ScoringMode::kAll;
    analysts::RunResult run =
        analysts::run_analyst(*analyst, *session, population, scoring);
    if (!run.transcript.halted) ++report.completed;
    rounds_total += run.transcript.rounds_detected;
    for (const auto& entry : run.transcript.entries) {
      if (!entry.answer || !entry.true_expectation) continue;
      ++report.answers;
      if (std::abs(*entry.answer - *entry.true_expectation) <= config.tau) {
        ++report.valid_answers;
      }
    }
  }
  report.completion_rate =
      static_cast<double>(report.completed) / static_cast<double>(trials);
  report.validity_rate =
      report.answers == 0 ? 1.0
                          : static_cast<double>(report.valid_answers) /
                                static_cast<double>(report.answers);
  report.mean_rounds_detected = rounds_total / static_cast<double>(trials);
  return report;
}

}  // namespace sqlab::verify
