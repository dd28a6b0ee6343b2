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

#include <cmath>

#include "doctest.h"
#include "sqlab/privacy/privacy.hpp"
#include "sqlab/verify/montecarlo.hpp"

using namespace sqlab;
using namespace sqlab::verify;
using sqlab::analysts::StrategySpec;
using sqlab::mechanisms::Mechanism;
using sqlab::mechanisms::OracleConfig;

TEST_CASE("transfer check: naive oracle holds the hoeffding baseline for fixed queries") {
  const Population pop = Population::uniform(Universe::indexed(64));
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kNaive;
  cfg.tau = 0.1;
  cfg.m = 16;
  StrategySpec strategy;
  strategy.kind = StrategySpec::Kind::kNonAdaptiveRandom;
  strategy.m = 8;
  const double bound = hoeffding_bound(300, cfg.tau);
  const auto report =
      transfer_check(cfg, strategy, pop, 300, bound, 300, 2026);
  CHECK(report.holds);
  CHECK(report.stats.violation_rate <= bound + 0.05);
}

TEST_CASE("transfer check: calibrated laplace survives the probe, naive does not") {
  const double tau = 0.2, beta = 0.05;
  const std::size_t n = static_cast<std::size_t>(
      std::ceil(12.0 * std::log(4.0 / beta) / (tau * tau)));
  const Population pop = Population::uniform(Universe::indexed(4096));
  StrategySpec strategy;
  strategy.kind = StrategySpec::Kind::kReconstructionProbe;
  strategy.m = 4000;

  OracleConfig laplace;
  laplace.mechanism = Mechanism::kLaplace;
  laplace.tau = tau;
  laplace.beta = beta;
  laplace.m = strategy.m + 1;
  laplace.epsilon = privacy::calibrate_epsilon_pure(tau, beta, n);
  CHECK(laplace.epsilon == doctest::Approx(0.1));
  const auto dp_report =
      transfer_check(laplace, strategy, pop, n, beta, 120, 404);
  CHECK(dp_report.holds);

  OracleConfig naive;
  naive.mechanism = Mechanism::kNaive;
  naive.tau = tau;
  naive.m = strategy.m + 1;
  const auto naive_stats =
      monitor_final_query(naive, strategy, pop, n, tau, 40, 405);
  CHECK(naive_stats.violation_rate >= 0.5);
}

TEST_CASE("expectation gap: a data-independent oracle has zero gap") {
  // Noiseless multiplicative weights with an unreachable update threshold
  // never consults the data: an (0,0)-private constant oracle.
  const Population pop = Population::uniform(Universe::indexed(256));
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kPmw;
  cfg.noiseless = true;
  cfg.pmw_threshold = 10.0;
  cfg.tau = 0.1;
  cfg.m = 101;
  StrategySpec strategy;
  strategy.kind = StrategySpec::Kind::kReconstructionProbe;
  strategy.m = 100;
  const auto report = expectation_gap_check(cfg, strategy, pop, 400, 200, 7);
  CHECK(report.bound == doctest::Approx(0.0));
  CHECK(report.holds);
  CHECK(report.gap <= 3.0 * report.std_error + 1e-12);
}

TEST_CASE("expectation gap: laplace under sign aggregation stays within e^eps - 1") {
  const unsigned d = 40;
  const Population pop = Population::gaussian_product(d);
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kLaplace;
  cfg.epsilon = 0.1;
  cfg.tau = 0.1;
  cfg.m = d + 1;
  StrategySpec strategy;
  strategy.kind = StrategySpec::Kind::kSignAggregation;
  strategy.d = d;
  const auto report = expectation_gap_check(cfg, strategy, pop, 500, 150, 11);
  CHECK(report.bound == doctest::Approx(std::expm1(0.1) + 0.0));
  CHECK(report.holds);
}

TEST_CASE("expectation gap: naive under the probe blows past zero") {
  const Population pop = Population::uniform(Universe::indexed(1024));
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kNaive;
  cfg.tau = 0.2;
  cfg.m = 1001;
  StrategySpec strategy;
  strategy.kind = StrategySpec::Kind::kReconstructionProbe;
  strategy.m = 1000;
  const auto report = expectation_gap_check(cfg, strategy, pop, 150, 40, 13);
  // Naive is not private for any small epsilon; the gap is macroscopic.
  CHECK(report.gap >= 0.1);
}

TEST_CASE("bad event monitor: numeric bound and calibrated laplace") {
  const std::size_t n = 500;
  const double tau = 0.1;
  const double beta = hoeffding_bound(n, tau);
  CHECK(3.0 * std::sqrt(beta) ==
        doctest::Approx(3.0 * std::sqrt(2.0) * std::exp(-5.0)).epsilon(1e-12));

  const Population pop = Population::uniform(Universe::indexed(2048));
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kLaplace;
  cfg.tau = tau;
  cfg.m = 501;
  cfg.epsilon = privacy::calibrate_epsilon_events(beta, n);
  StrategySpec strategy;
  strategy.kind = StrategySpec::Kind::kReconstructionProbe;
  strategy.m = 500;
  const auto report =
      bad_event_monitor(cfg, strategy, pop, n, tau, 150, 2027);
  CHECK(report.epsilon_ok);
  CHECK(report.beta == doctest::Approx(beta));
  CHECK(report.bound == doctest::Approx(3.0 * std::sqrt(beta)));
  CHECK(report.holds);
}

TEST_CASE("bad event monitor: data-independent strategies obey the baseline") {
  const Population pop = Population::uniform(Universe::indexed(64));
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kNaive;
  cfg.tau = 0.15;
  cfg.m = 8;
  StrategySpec strategy;
  strategy.kind = StrategySpec::Kind::kNonAdaptiveRandom;
  strategy.m = 4;
  const auto report = bad_event_monitor(cfg, strategy, pop, 300, 0.15, 200, 5);
  CHECK(report.holds);
}

TEST_CASE("sparse vector contract audit at theorem parameters") {
  // Thm-scale parameters, shortened to 100 trials for the unit suite; the
  // acceptance suite runs the full 500.
  const double tau = 0.1, beta = 0.05, eps = 0.5;
  const unsigned r = 3;
  privacy::SizingInputs sizing;
  sizing.tau = tau;
  sizing.beta = beta;
  sizing.r = r;
  sizing.epsilon = eps;
  const std::size_t n =
      privacy::required_sample_size(privacy::SizingRule::kSparsePure, sizing);
  CHECK(n == 2367);
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kSparseVector;
  cfg.tau = tau;
  cfg.beta = beta;
  cfg.epsilon = eps;
  cfg.r = r;
  cfg.threshold = 0.25;
  cfg.m = 200;
  const Population pop = Population::uniform(Universe::indexed(64));
  const auto report = sparse_contract_check(cfg, pop, n, 200, {40, 110, 199},
                                            0.5, 100, 2028);
  CHECK(report.trials == 100);
  // Bad guesses fire; nothing else should.
  CHECK(report.firing_count >= 2 * report.trials);
  CHECK(report.firing_count <= 3 * report.trials);
  CHECK(report.holds);
  CHECK(report.per_query_violation_rate <= beta);
}

TEST_CASE("effective rounds check completes and stays valid at desk scale") {
  const double tau = 0.5, beta = 0.3;
  const unsigned r = 3;
  privacy::SizingInputs sizing;
  sizing.tau = tau;
  sizing.beta = beta;
  sizing.r = r;
  const std::size_t n = privacy::required_sample_size(
      privacy::SizingRule::kEffectiveRoundsGate, sizing);
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kEffectiveRounds;
  cfg.tau = tau;
  cfg.beta = beta;
  cfg.r = r;
  cfg.m = 1000;
  const Population pop = Population::uniform(Universe::indexed(32));
  StrategySpec strategy;
  strategy.kind = StrategySpec::Kind::kRoundStructured;
  strategy.r = r;
  strategy.queries_per_round = 33;
  strategy.overfit_rounds = 2;
  const auto report =
      effective_rounds_check(cfg, strategy, pop, n, 20, 2029);
  CHECK(report.completion_rate == 1.0);
  CHECK(report.validity_rate >= 1.0 - 3.0 * beta);
  CHECK(report.mean_rounds_detected >= 1.0);
  CHECK(report.mean_rounds_detected <= 3.0);
}
