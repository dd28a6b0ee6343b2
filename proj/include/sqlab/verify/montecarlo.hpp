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

#ifndef SQLAB_VERIFY_MONTECARLO_HPP_
#define SQLAB_VERIFY_MONTECARLO_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sqlab/analysts/analysts.hpp"
#include "sqlab/core/population.hpp"
#include "sqlab/mechanisms/oracle.hpp"
#include "sqlab/verify/moments.hpp"

namespace sqlab::verify {

// Shared engine: runs `trials` fresh (dataset, session, strategy)
// executions and watches the final query of each — the most adaptive one.
struct FinalQueryStats {
  std::size_t trials = 0;
  std::size_t violations = 0;  // |P[f] - E_S[f]| > tau on the full dataset
  double violation_rate = 0.0;
  double mean_empirical = 0.0;  // mean over trials of E_S[f]
  double mean_true = 0.0;       // mean over trials of P[f]
  double gap = 0.0;             // |mean_empirical - mean_true|
  double gap_std_error = 0.0;   // paired standard error of the difference
};

FinalQueryStats monitor_final_query(const mechanisms::OracleConfig& config,
                                    const analysts::StrategySpec& strategy,
                                    const Population& population,
                                    std::size_t n, double tau,
                                    std::size_t trials, std::uint64_t seed);

// Monte Carlo test of a transfer-style guarantee: the final-query
// violation rate must be statistically consistent with `bound`.
struct TransferReport {
  std::string mechanism;
  std::string strategy;
  double tau = 0.0;
  double bound = 0.0;  // the theorem's failure probability
  FinalQueryStats stats;
  std::size_t rejection_count = 0;  // counts >= this reject the bound (99%)
  bool holds = false;
};

TransferReport transfer_check(const mechanisms::OracleConfig& config,
                              const analysts::StrategySpec& strategy,
                              const Population& population, std::size_t n,
                              double bound, std::size_t trials,
                              std::uint64_t seed);

// Generalization-in-expectation: |E[E_S[f]] - E[P[f]]| against
// e^epsilon - 1 + delta (plus three paired standard errors).
struct ExpectationGapReport {
  double gap = 0.0;
  double std_error = 0.0;
  double bound = 0.0;
  FinalQueryStats stats;
  bool holds = false;
};

ExpectationGapReport expectation_gap_check(
    const mechanisms::OracleConfig& config,
    const analysts::StrategySpec& strategy, const Population& population,
    std::size_t n, std::size_t trials, std::uint64_t seed);

// Bad-event monitor: R(f) = {S : |E_S[f] - P[f]| > tau} with the
// fixed-query probability beta taken from the Hoeffding baseline; the
// monitored rate is compared against 3 sqrt(beta).
struct BadEventReport {
  double beta = 0.0;         // hoeffding_bound(n, tau)
  double bound = 0.0;        // 3 sqrt(beta)
  double epsilon_cap = 0.0;  // largest epsilon the theorem admits
  bool epsilon_ok = false;   // config epsilon within the cap
  FinalQueryStats stats;
  std::size_t rejection_count = 0;
  bool holds = false;
};

BadEventReport bad_event_monitor(const mechanisms::OracleConfig& config,
                                 const analysts::StrategySpec& strategy,
                                 const Population& population, std::size_t n,
                                 double tau, std::size_t trials,
                                 std::uint64_t seed);

// Sparse-vector contract audit: random [0,1]-valued queries with exact
// population expectations as guesses, except `bad_guess_indices` whose
// guesses are shifted by `bad_guess_offset`. A Bottom answer violates the
// contract when |E_S[q] - g| > T + tau; a numeric answer violates it when
// |E_S[q] - a| > tau.
struct SparseContractReport {
  std::size_t trials = 0;
  std::size_t queries_per_trial = 0;
  std::size_t answered_queries = 0;
  std::size_t firing_count = 0;
  std::size_t query_violations = 0;
  std::size_t trial_violations = 0;  // trials with >= 1 violation
  double trial_violation_rate = 0.0;
  double per_query_violation_rate = 0.0;
  std::size_t rejection_count = 0;  // threshold on trial violations (99%)
  bool holds = false;
};

SparseContractReport sparse_contract_check(
    const mechanisms::OracleConfig& config, const Population& population,
    std::size_t n, std::size_t queries, std::vector<std::size_t> bad_indices,
    double bad_guess_offset, std::size_t trials, std::uint64_t seed);

// EffectiveRounds end-to-end: each trial runs a round-structured analyst
// and records completion plus per-answer statistical validity.
struct EffectiveRoundsReport {
  std::size_t trials = 0;
  std::size_t completed = 0;  // trials that never halted
  std::size_t answers = 0;
  std::size_t valid_answers = 0;  // |answer - P[q]| <= tau
  double completion_rate = 0.0;
  double validity_rate = 0.0;
  double mean_rounds_detected = 0.0;
};

EffectiveRoundsReport effective_rounds_check(
    const mechanisms::OracleConfig& config,
    const analysts::StrategySpec& strategy, const Population& population,
    std::size_t n, std::size_t trials, std::uint64_t seed);

}  // namespace sqlab::verify

#endif  // SQLAB_VERIFY_MONTECARLO_HPP_
