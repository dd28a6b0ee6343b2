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
#include <vector>

#include "doctest.h"
#include "sqlab/analysts/analysts.hpp"
#include "sqlab/core/error.hpp"
#include "sqlab/mechanisms/oracle.hpp"
#include "sqlab/privacy/privacy.hpp"

using namespace sqlab;
using namespace sqlab::analysts;
using sqlab::mechanisms::Mechanism;
using sqlab::mechanisms::OracleConfig;

TEST_CASE("non-adaptive analyst against naive answers empirical means") {
  const Population pop = Population::uniform(Universe::indexed(16));
  const Dataset data = sample_dataset(pop, 50, 3);
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kNaive;
  cfg.m = 10;
  auto session = mechanisms::open_session(cfg, data, 4);
  NonAdaptiveRandomAnalyst analyst(5, pop.universe(), RngStream(5));
  const RunResult run = run_analyst(analyst, *session, pop);
  REQUIRE(run.transcript.entries.size() == 5);
  REQUIRE(run.queries.size() == 5);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(*run.transcript.entries[i].answer ==
          empirical_mean(data, run.queries[i]));
  }
  // Final-only scoring filled in the last true expectation.
  CHECK(run.transcript.entries.back().true_expectation.has_value());
}

TEST_CASE("sign aggregation emits d+1 queries and recovers signs") {
  const unsigned d = 12;
  const Population pop = Population::gaussian_product(d);
  const Dataset data = sample_dataset(pop, 40, 17);
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kNaive;
  cfg.m = d + 1;
  auto session = mechanisms::open_session(cfg, data, 18);
  const auto result = sign_aggregation_attack(*session, pop, d, 200, 19);
  CHECK(result.transcript.entries.size() == d + 1);
  // Signs must match the empirical coordinate means.
  SignAggregationAnalyst probe(d, result.truncation_B);
  for (unsigned j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
      mean += data.point(i).real(j);
    }
    const double sign = mean >= 0.0 ? 1.0 : -1.0;
    const double reported =
        (result.transcript.entries[j].answer.value_or(0.5) - 0.5);
    CHECK(sign * reported >= 0.0);
  }
  CHECK(result.truncation_B ==
        doctest::Approx(4.0 * std::sqrt(std::log(12.0 * 40.0))));
}

TEST_CASE("sign aggregation against naive matches the aggregate formula") {
  // Un-rescaled reported values average to sqrt(2 d / (pi n)) for
  // d/n in {1, 10, 100}; 100 seeded trials per shape.
  const std::size_t n = 50;
  for (const unsigned d : {50u, 500u, 5000u}) {
    const Population pop = Population::gaussian_product(d);
    OracleConfig cfg;
    cfg.mechanism = Mechanism::kNaive;
    cfg.m = d + 1;
    double mean_reported = 0.0;
    const std::size_t trials = 100;
    for (std::size_t t = 0; t < trials; ++t) {
      const Dataset data =
          sample_dataset(pop, n, derive_seed(1000 + d, 2 * t));
      auto session =
          mechanisms::open_session(cfg, data, derive_seed(1000 + d, 2 * t + 1));
      const auto result = sign_aggregation_attack(*session, pop, d, 100,
                                                  derive_seed(77, t));
      mean_reported += result.reported_unrescaled;
    }
    mean_reported /= static_cast<double>(trials);
    const double expected =
        std::sqrt(2.0 * static_cast<double>(d) / (M_PI * n));
    CHECK(std::abs(mean_reported - expected) <= 0.10 * expected);
  }
}

TEST_CASE("sign aggregation d=1 gap follows sqrt(2/(pi n))") {
  const std::size_t n = 25;
  const Population pop = Population::gaussian_product(1);
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kNaive;
  cfg.m = 2;
  double mean_reported = 0.0;
  const std::size_t trials = 300;
  for (std::size_t t = 0; t < trials; ++t) {
    const Dataset data = sample_dataset(pop, n, derive_seed(9, 2 * t));
    auto session = mechanisms::open_session(cfg, data, derive_seed(9, 2 * t + 1));
    mean_reported +=
        sign_aggregation_attack(*session, pop, 1, 100, t).reported_unrescaled;
  }
  mean_reported /= static_cast<double>(trials);
  const double expected = std::sqrt(2.0 / (M_PI * n));
  CHECK(std::abs(mean_reported - expected) <= 0.15 * expected);
}

TEST_CASE("reconstruction probe overfits naive and not a sized laplace") {
  const Population pop = Population::uniform(Universe::indexed(1024));
  const std::size_t n = 100;
  const std::size_t m_probe = 4000;
  OracleConfig naive_cfg;
  naive_cfg.mechanism = Mechanism::kNaive;
  naive_cfg.m = m_probe + 1;
  std::size_t overfit = 0;
  for (std::size_t t = 0; t < 5; ++t) {
    const Dataset data = sample_dataset(pop, n, derive_seed(21, 3 * t));
    auto session =
        mechanisms::open_session(naive_cfg, data, derive_seed(21, 3 * t + 1));
    const auto result =
        reconstruction_probe(*session, pop, m_probe, derive_seed(21, 3 * t + 2));
    if (result.gap_reported > 0.2) ++overfit;
  }
  CHECK(overfit == 5);
}

TEST_CASE("reconstruction probe with no probes is data independent") {
  const Population pop = Population::uniform(Universe::indexed(2048));
  const Dataset data = sample_dataset(pop, 500, 31);
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kNaive;
  cfg.m = 1;
  auto session = mechanisms::open_session(cfg, data, 32);
  const auto result = reconstruction_probe(*session, pop, 0, 33);
  CHECK(result.gap_reported <= 0.1);
}

TEST_CASE("reconstruction probe requires |X| >= 2n") {
  const Population pop = Population::uniform(Universe::indexed(64));
  const Dataset data = sample_dataset(pop, 40, 1);
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kNaive;
  cfg.m = 10;
  auto session = mechanisms::open_session(cfg, data, 2);
  CHECK_THROWS_AS(reconstruction_probe(*session, pop, 4, 3), UniverseTooSmall);
}

TEST_CASE("reconstruction probe against pmw sized for the transfer layer") {
  // Largest pure-route instance that satisfies both the probe's |X| >= 2n
  // precondition and the 2^20 tabulation cap with the full C = 32: at
  // tau = 0.2 the two collide, so this runs the nearest feasible tolerance.
  const double tau = 0.4, beta = 0.05;
  const Universe u = Universe::indexed(std::uint64_t{1} << 18);
  privacy::SizingInputs sizing;
  sizing.tau = tau;
  sizing.beta = beta;
  sizing.log_universe = u.sizing_log();
  const std::size_t n = privacy::required_sample_size(
      privacy::SizingRule::kPmwTransferPure, sizing);
  REQUIRE(2 * n <= u.size());
  const Population pop = Population::uniform(u);
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kPmw;
  cfg.tau = tau;
  cfg.beta = beta;
  cfg.epsilon = tau / 2.0;
  const std::size_t m_probe = 300;
  cfg.m = m_probe + 1;
  std::size_t ok = 0;
  const std::size_t trials = 20;
  for (std::size_t t = 0; t < trials; ++t) {
    const Dataset data = sample_dataset(pop, n, derive_seed(55, 3 * t));
    auto session =
        mechanisms::open_session(cfg, data, derive_seed(55, 3 * t + 1));
    const auto result =
        reconstruction_probe(*session, pop, m_probe, derive_seed(55, 3 * t + 2));
    if (result.gap_reported <= tau) ++ok;
  }
  CHECK(ok >= 18);
}

TEST_CASE("round structured analyst stays within the round budget") {
  const Population pop = Population::uniform(Universe::indexed(32));
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
  const Dataset data = sample_dataset(pop, n, 61);
  auto session = mechanisms::open_session(cfg, data, 62);
  RoundStructuredAnalyst analyst(r, 33, 2, pop);
  const RunResult run = run_analyst(analyst, *session, pop);
  CHECK(run.transcript.rounds_detected <= static_cast<int>(r));
  CHECK(run.transcript.rounds_detected >= 1);
  CHECK_FALSE(run.transcript.halted);
  CHECK(run.transcript.entries.size() == (r + 1) * 33);
}

TEST_CASE("round structured analyst with r=0 is a pure function of its seed") {
  const Population pop = Population::uniform(Universe::indexed(16));
  RoundStructuredAnalyst a(0, 16, 0, pop);
  RoundStructuredAnalyst b(0, 16, 0, pop);
  std::vector<Exchange> history;
  for (int i = 0; i < 16; ++i) {
    auto qa = a.next(history);
    auto qb = b.next(history);
    REQUIRE(qa.has_value());
    REQUIRE(qb.has_value());
    for (std::uint64_t x = 0; x < 16; ++x) {
      CHECK(qa->query.value_at(x) == qb->query.value_at(x));
    }
    history.push_back(Exchange{qa->query.id(), 0.5});
  }
  CHECK_FALSE(a.next(history).has_value());
}

TEST_CASE("strategy spec parsing") {
  CHECK(StrategySpec::parse_kind("reconstruction-probe") ==
        StrategySpec::Kind::kReconstructionProbe);
  CHECK(StrategySpec::parse_kind("sign-aggregation") ==
        StrategySpec::Kind::kSignAggregation);
  CHECK_THROWS_AS(StrategySpec::parse_kind("nope"), ConfigError);
  StrategySpec spec;
  spec.kind = StrategySpec::Kind::kRoundStructured;
  CHECK(spec.kind_name() == "round-structured");
}

TEST_CASE("guessing analyst feeds a sparse-vector session") {
  const Population pop = Population::uniform(Universe::indexed(64));
  const Dataset data = sample_dataset(pop, 3000, 71);
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kSparseVector;
  cfg.noiseless = true;
  cfg.threshold = 0.3;
  cfg.r = 2;
  cfg.m = 20;
  auto session = mechanisms::open_session(cfg, data, 72);
  NonAdaptiveRandomAnalyst analyst(10, pop.universe(), RngStream(73), &pop);
  const RunResult run = run_analyst(analyst, *session, pop);
  CHECK(run.transcript.entries.size() == 10);
  // Honest guesses on a large sample never clear the threshold.
  for (const auto& entry : run.transcript.entries) {
    CHECK_FALSE(entry.answer.has_value());
  }
}
