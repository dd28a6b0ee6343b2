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
#include <numeric>
#include <vector>

#include "doctest.h"
#include "sqlab/core/error.hpp"
#include "sqlab/core/population.hpp"
#include "sqlab/mechanisms/oracle.hpp"

using namespace sqlab;
using namespace sqlab::mechanisms;

namespace {

Dataset bits01(std::size_t zeros, std::size_t ones) {
  std::vector<std::uint64_t> codes(zeros, 0);
  codes.insert(codes.end(), ones, 1);
  return Dataset::from_codes(Universe::indexed(2), std::move(codes));
}

const Query kIdentity = Query::from_table("id", {0.0, 1.0});

}  // namespace

TEST_CASE("config validation and text round trip") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kLaplace;
  cfg.tau = 0.15;
  cfg.beta = 0.01;
  cfg.m = 42;
  cfg.epsilon = 0.25;
  cfg.r = 3;
  cfg.noiseless = true;
  const OracleConfig back = OracleConfig::from_text(cfg.to_text());
  CHECK(back.mechanism == cfg.mechanism);
  CHECK(back.tau == cfg.tau);
  CHECK(back.m == cfg.m);
  CHECK(back.noiseless == cfg.noiseless);

  OracleConfig bad = cfg;
  bad.tau = 1.5;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.noiseless = false;
  bad.epsilon = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  CHECK_THROWS_AS(OracleConfig::from_text("mechanism=waffle\n"), ConfigError);
}

TEST_CASE("naive session answers empirical means deterministically") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kNaive;
  cfg.m = 10;
  auto session = open_session(cfg, bits01(2, 2), 1);
  CHECK(session->transcript().entries.empty());
  CHECK(*session->answer(kIdentity) == 0.5);
  CHECK(*session->answer(kIdentity) == 0.5);
  CHECK(session->spent().epsilon == 0.0);
  CHECK(session->transcript().entries.size() == 2);
}

TEST_CASE("query budget is enforced") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kNaive;
  cfg.m = 2;
  auto session = open_session(cfg, bits01(1, 1), 1);
  session->answer(kIdentity);
  session->answer(kIdentity);
  CHECK_THROWS_AS(session->answer(kIdentity), QueryBudgetExceeded);
}

TEST_CASE("noiseless laplace equals naive exactly") {
  OracleConfig naive_cfg;
  naive_cfg.mechanism = Mechanism::kNaive;
  naive_cfg.m = 8;
  OracleConfig lap_cfg = naive_cfg;
  lap_cfg.mechanism = Mechanism::kLaplace;
  lap_cfg.noiseless = true;
  const Dataset data = bits01(3, 7);
  auto naive = open_session(naive_cfg, data, 5);
  auto laplace = open_session(lap_cfg, data, 5);
  for (int i = 0; i < 4; ++i) {
    CHECK(*naive->answer(kIdentity) == *laplace->answer(kIdentity));
  }
}

TEST_CASE("laplace noise scale follows the per-query budget split") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kLaplace;
  cfg.m = 10;
  cfg.epsilon = 0.5;
  std::vector<std::uint64_t> codes(1000, 0);
  LaplaceSession session(cfg, Dataset::from_codes(Universe::indexed(2), codes),
                         3);
  CHECK(session.noise_scale() == doctest::Approx(0.02).epsilon(1e-15));
  CHECK(session.per_query_epsilon() == doctest::Approx(0.05).epsilon(1e-15));

  // Advanced-composition mode: eps_i = eps / (2 sqrt(2 m ln(1/delta))).
  cfg.delta = 1e-6;
  LaplaceSession approx(cfg, Dataset::from_codes(Universe::indexed(2), codes),
                        3);
  const double eps_i =
      0.5 / (2.0 * std::sqrt(2.0 * 10.0 * std::log(1e6)));
  CHECK(approx.per_query_epsilon() == doctest::Approx(eps_i).epsilon(1e-12));
  CHECK(approx.noise_scale() ==
        doctest::Approx(1.0 / (1000.0 * eps_i)).epsilon(1e-12));
}

TEST_CASE("laplace budget ledger composes per policy") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kLaplace;
  cfg.m = 4;
  cfg.epsilon = 0.2;
  auto session = open_session(cfg, bits01(10, 10), 7);
  for (int i = 0; i < 4; ++i) session->answer(kIdentity);
  CHECK(session->spent().epsilon == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(session->spent().delta == 0.0);
}

TEST_CASE("laplace accuracy at transfer-layer sizing") {
  // n = ceil(32 m ln(1/beta) / tau^2), eps = tau/2; answers should sit
  // within tau of the empirical mean essentially always.
  const double tau = 0.1, beta = 0.05;
  const std::uint64_t m = 20;
  const std::size_t n = static_cast<std::size_t>(
      std::ceil(32.0 * m * std::log(1.0 / beta) / (tau * tau)));
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kLaplace;
  cfg.tau = tau;
  cfg.beta = beta;
  cfg.m = m;
  cfg.epsilon = tau / 2.0;
  const Population pop = Population::uniform(Universe::indexed(16));
  RngStream qrng(99);
  std::size_t checked = 0, violations = 0;
  for (std::size_t trial = 0; trial < 200; ++trial) {
    const Dataset data = sample_dataset(pop, n, derive_seed(404, 2 * trial));
    auto session = open_session(cfg, data, derive_seed(404, 2 * trial + 1));
    for (std::uint64_t q = 0; q < m; ++q) {
      std::vector<double> values(16);
      for (auto& v : values) v = qrng.uniform();
      const Query query = Query::from_table("q", values);
      const double answer = *session->answer(query);
      const double empirical = empirical_mean(data, query);
      ++checked;
      if (std::abs(answer - empirical) > tau) ++violations;
    }
  }
  CHECK(static_cast<double>(violations) / static_cast<double>(checked) <=
        beta + 0.03);
}

TEST_CASE("pmw initializes uniform weights") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kPmw;
  cfg.noiseless = true;
  cfg.m = 10;
  PmwSession session(cfg, Dataset::from_codes(Universe::indexed(8), {0, 1}),
                     1);
  REQUIRE(session.weights().size() == 8);
  for (const double w : session.weights()) {
    CHECK(w == doctest::Approx(1.0 / 8.0).epsilon(1e-15));
  }
}

TEST_CASE("pmw rejects untabulatable universes") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kPmw;
  cfg.noiseless = true;
  const Universe big = Universe::indexed((std::uint64_t{1} << 20) + 1);
  CHECK_THROWS_AS(PmwSession(cfg, Dataset::from_codes(big, {0}), 1),
                  UniverseNotTabulatable);
}

TEST_CASE("pmw hand-traced hard update") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kPmw;
  cfg.noiseless = true;
  cfg.m = 10;
  cfg.pmw_eta = 0.05;
  cfg.pmw_threshold = 0.1;
  PmwSession session(cfg, bits01(0, 10), 1);
  // E_S = 1, synthetic starts at 0.5; |0.5| > 0.1 forces a hard update.
  const double answer = *session.answer(kIdentity);
  CHECK(answer == 1.0);
  CHECK(session.hard_updates() == 1);
  const double e = std::exp(0.05);
  CHECK(session.weights()[1] == doctest::Approx(e / (e + 1.0)).epsilon(1e-12));
  CHECK(session.weights()[0] ==
        doctest::Approx(1.0 / (e + 1.0)).epsilon(1e-12));
}

TEST_CASE("pmw lazy round leaves weights untouched") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kPmw;
  cfg.noiseless = true;
  cfg.m = 10;
  cfg.tau = 0.2;  // T = 0.1, eta = 0.025
  PmwSession session(cfg, bits01(5, 5), 1);
  const Query constant = Query::constant("c", 0.7);
  const double answer = *session.answer(constant);
  CHECK(answer == doctest::Approx(0.7).epsilon(1e-12));
  CHECK(session.hard_updates() == 0);
  for (const double w : session.weights()) {
    CHECK(w == doctest::Approx(0.5).epsilon(1e-12));
  }
}

TEST_CASE("pmw repeated query converges to lazy answers") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kPmw;
  cfg.noiseless = true;
  cfg.m = 500;
  cfg.tau = 0.2;
  PmwSession session(cfg, bits01(1, 9), 1);  // E_S = 0.9
  bool lazy_seen = false;
  for (int i = 0; i < 400 && !lazy_seen; ++i) {
    session.answer(kIdentity);
    lazy_seen = session.transcript().entries.back().state_note == "lazy";
  }
  CHECK(lazy_seen);
  CHECK(std::abs(session.synthetic_mean(kIdentity) - 0.9) <= 0.1);
}

TEST_CASE("pmw weights stay a distribution under random updates") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kPmw;
  cfg.noiseless = true;
  cfg.m = 200;
  cfg.tau = 0.1;
  const Universe u = Universe::indexed(32);
  RngStream rng(8);
  std::vector<std::uint64_t> codes(40);
  for (auto& c : codes) c = rng.below(32);
  PmwSession session(cfg, Dataset::from_codes(u, codes), 9);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> values(32);
    for (auto& v : values) v = rng.uniform();
    session.answer(Query::from_table("q", values));
    double total = 0.0;
    for (const double w : session.weights()) {
      CHECK(w >= 0.0);
      total += w;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(session.hard_updates() > 0);
}

TEST_CASE("sparse vector noiseless threshold logic") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kSparseVector;
  cfg.noiseless = true;
  cfg.threshold = 0.25;
  cfg.r = 2;
  cfg.m = 10;
  SparseVectorSession session(cfg, bits01(5, 5), 1);
  // Zero error: Bottom.
  CHECK_FALSE(session.answer(kIdentity, 0.5).has_value());
  CHECK(session.remaining_firings() == 2);
  // Tie at exactly T: still Bottom.
  CHECK_FALSE(session.answer(kIdentity, 0.25).has_value());
  // Error 0.4 > T: numeric answer, budget decremented.
  SparseVectorSession hot(cfg, bits01(1, 9), 1);
  const auto fired = hot.answer(kIdentity, 0.5);
  REQUIRE(fired.has_value());
  CHECK(*fired == 0.9);
  CHECK(hot.remaining_firings() == 1);
}

TEST_CASE("sparse vector requires a guess and halts after r firings") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kSparseVector;
  cfg.noiseless = true;
  cfg.threshold = 0.1;
  cfg.r = 2;
  cfg.m = 10;
  SparseVectorSession session(cfg, bits01(1, 9), 1);
  CHECK_THROWS_AS(session.answer(kIdentity), MissingParameter);
  CHECK(session.answer(kIdentity, 0.0).has_value());
  CHECK(session.answer(kIdentity, 0.0).has_value());
  CHECK(session.halted());
  CHECK(session.transcript().halted);
  CHECK_THROWS_AS(session.answer(kIdentity, 0.0), FiringBudgetExhausted);
  CHECK(session.transcript().entries.size() == 2);
}

TEST_CASE("sparse vector noise scales follow the 8/9 - 1/9 split") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kSparseVector;
  cfg.threshold = 0.25;
  cfg.epsilon = 0.5;
  cfg.r = 3;
  cfg.m = 10;
  std::vector<std::uint64_t> codes(2367, 0);
  SparseVectorSession session(
      cfg, Dataset::from_codes(Universe::indexed(2), codes), 1);
  const double eps1 = 8.0 * 0.5 / 9.0;
  const double eps2 = 0.5 / 9.0;
  CHECK(session.test_noise_scale() ==
        doctest::Approx(4.0 * 3 / (eps1 * 2367)).epsilon(1e-12));
  CHECK(session.answer_noise_scale() ==
        doctest::Approx(3.0 / (eps2 * 2367)).epsilon(1e-12));
}

TEST_CASE("effective rounds split arithmetic") {
  const Fig1Split split = effective_rounds_split(3000, 2, 0.2, 0.3);
  CHECK(split.estimation_size == 369);
  CHECK(split.holdout_size == 2262);
  CHECK_THROWS_AS(effective_rounds_split(700, 2, 0.2, 0.3), DatasetTooSmall);
}

TEST_CASE("effective rounds enforces the size gate") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kEffectiveRounds;
  cfg.tau = 0.2;
  cfg.beta = 0.3;
  cfg.r = 2;
  cfg.noiseless = true;
  std::vector<std::uint64_t> codes(3000, 0);
  CHECK_THROWS_AS(
      EffectiveRoundsSession(
          cfg, Dataset::from_codes(Universe::indexed(2), codes), 1),
      DatasetTooSmall);
}

TEST_CASE("effective rounds serves from the first estimation set until a firing") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kEffectiveRounds;
  cfg.tau = 0.9;
  cfg.beta = 0.9;
  cfg.r = 2;
  cfg.m = 8300;
  cfg.noiseless = true;
  const std::size_t n = 8192;
  std::vector<std::uint64_t> codes(n);
  std::iota(codes.begin(), codes.end(), 0u);
  const Universe u = Universe::indexed(n);
  EffectiveRoundsSession session(cfg, Dataset::from_codes(u, codes), 77);
  CHECK(session.estimation_size() ==
        static_cast<std::size_t>(
            std::ceil(4.0 * std::log(12.0 / 0.9) / (0.9 * 0.9))));
  CHECK(session.holdout_size() == n - 2 * session.estimation_size());

  // Non-adaptive constant queries never fire; everything answers from S_1.
  for (int i = 0; i < 10; ++i) {
    const double a = *session.answer(Query::constant("c", 0.3));
    CHECK(a == doctest::Approx(0.3).epsilon(1e-12));
  }
  CHECK(session.current_round() == 1);
  CHECK(session.transcript().rounds_detected == 0);

  // Probe single cells until enough of S_1 is known, then hit it with an
  // indicator query; the estimation set and holdout disagree and the
  // detector fires.
  const std::size_t est = session.estimation_size();
  const double T = 0.9 / 4.0;
  std::vector<std::uint64_t> found;
  std::vector<std::uint64_t> mask((n + 63) / 64, 0);
  for (std::uint64_t x = 0;
       x < n && static_cast<double>(found.size()) / est <= T + 0.05; ++x) {
    std::vector<std::uint64_t> bits((n + 63) / 64, 0);
    bits[x >> 6] |= std::uint64_t{1} << (x & 63);
    const double a = *session.answer(Query::from_bits("e", bits, n));
    if (a > 0.0) {
      found.push_back(x);
      mask[x >> 6] |= std::uint64_t{1} << (x & 63);
    }
  }
  REQUIRE(static_cast<double>(found.size()) / est > T);
  const double answer =
      *session.answer(Query::from_bits("overfit", mask, n));
  CHECK(session.current_round() == 2);
  CHECK(session.transcript().rounds_detected == 1);
  // The answer now comes from the holdout, where the found cells carry
  // almost no mass.
  CHECK(answer <= T);
}

TEST_CASE("identical config, dataset and seed give identical transcripts") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kLaplace;
  cfg.m = 12;
  cfg.epsilon = 0.3;
  const Dataset data = bits01(40, 60);
  auto a = open_session(cfg, data, 99);
  auto b = open_session(cfg, data, 99);
  for (int i = 0; i < 12; ++i) {
    CHECK(*a->answer(kIdentity) == *b->answer(kIdentity));
  }
  for (std::size_t i = 0; i < 12; ++i) {
    CHECK(a->transcript().entries[i].answer ==
          b->transcript().entries[i].answer);
  }
}

TEST_CASE("clamped sessions keep answers inside the unit interval") {
  OracleConfig cfg;
  cfg.mechanism = Mechanism::kLaplace;
  cfg.m = 200;
  cfg.epsilon = 0.001;  // scale 50: wild answers without the clamp
  cfg.clamp = true;
  auto session = open_session(cfg, bits01(5, 5), 123);
  for (int i = 0; i < 200; ++i) {
    const double a = *session->answer(kIdentity);
    CHECK(a >= 0.0);
    CHECK(a <= 1.0);
  }
}
