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
#include "sqlab/core/error.hpp"
#include "sqlab/core/rng.hpp"
#include "sqlab/verify/moments.hpp"

using namespace sqlab;
using namespace sqlab::verify;

namespace {

// Independent oracle: E[X^k] for X ~ Bin(n,p) via Stirling numbers of the
// second kind and falling factorials. All terms are nonnegative, so the
// evaluation is relative-error stable.
double stirling_binomial_moment(std::size_t n, double p, unsigned k) {
  std::vector<std::vector<double>> S(k + 1, std::vector<double>(k + 1, 0.0));
  S[0][0] = 1.0;
  for (unsigned i = 1; i <= k; ++i) {
    for (unsigned j = 1; j <= i; ++j) {
      S[i][j] = j * S[i - 1][j] + S[i - 1][j - 1];
    }
  }
  double sum = 0.0;
  for (unsigned j = 1; j <= k; ++j) {
    double falling = 1.0;
    for (unsigned i = 0; i < j; ++i) falling *= static_cast<double>(n - i);
    sum += S[k][j] * falling * std::pow(p, static_cast<double>(j));
  }
  return sum / std::pow(static_cast<double>(n), static_cast<double>(k));
}

}  // namespace

TEST_CASE("binomial_moment closed forms") {
  // First moment is p.
  for (const double p : {0.0, 0.01, 0.37, 1.0}) {
    CHECK(binomial_moment({50, p, 1}) == doctest::Approx(p).epsilon(1e-12));
  }
  // Second moment: p^2 + p(1-p)/n.
  CHECK(binomial_moment({10, 0.5, 2}) == doctest::Approx(0.275).epsilon(1e-12));
  // Point mass.
  CHECK(binomial_moment({5, 1.0, 3}) == 1.0);
  CHECK(binomial_moment({5, 0.0, 3}) == 0.0);
}

TEST_CASE("binomial_moment agrees with the stirling-form oracle") {
  for (const std::size_t n : {10ul, 100ul, 1000ul, 10000ul}) {
    for (const unsigned k : {1u, 2u, 5u, 10u, 32u}) {
      if (k > n) continue;
      for (const double p : {0.01, 0.1, 0.5, 0.9}) {
        const double direct = binomial_moment({n, p, k});
        const double oracle = stirling_binomial_moment(n, p, k);
        CHECK(direct == doctest::Approx(oracle).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("binomial_moment is monotone in p") {
  for (const std::size_t n : {20ul, 200ul}) {
    for (const unsigned k : {1u, 3u, 7u}) {
      double prev = -1.0;
      for (double p = 0.0; p <= 1.0 + 1e-9; p += 0.05) {
        const double m = binomial_moment({n, std::min(p, 1.0), k});
        CHECK(m >= prev - 1e-15);
        prev = m;
      }
    }
  }
}

TEST_CASE("binomial_moment guards its validated range") {
  CHECK_THROWS_AS(binomial_moment({20000, 0.5, 2}), ConditionViolated);
  CHECK_THROWS_AS(binomial_moment({100, 0.5, 33}), ConditionViolated);
  CHECK_THROWS_AS(binomial_moment({10, 0.5, 11}), InvalidArgument);
  CHECK_THROWS_AS(binomial_moment({10, 1.5, 2}), InvalidArgument);
}

TEST_CASE("binomial_upper_tail against direct summation") {
  // Pr[Bin(4, 0.5) >= 2] = (6 + 4 + 1) / 16.
  CHECK(binomial_upper_tail(4, 0.5, 2) ==
        doctest::Approx(11.0 / 16.0).epsilon(1e-12));
  CHECK(binomial_upper_tail(10, 0.3, 0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(binomial_upper_tail(10, 0.3, 11) == 0.0);
}

TEST_CASE("bernoulli domination holds for the equality and constant cases") {
  // Bernoulli itself: equality within statistical error.
  const auto bern = check_bernoulli_domination(
      20, 0.3, 4, 20000, 11,
      [](RngStream& rng) { return rng.uniform() < 0.3 ? 1.0 : 0.0; });
  CHECK(bern.holds);
  CHECK(bern.estimate ==
        doctest::Approx(bern.moment_bound).epsilon(0.05));

  // Constant p: LHS = p^k, the Jensen direction.
  const auto constant = check_bernoulli_domination(
      20, 0.3, 4, 1000, 12, [](RngStream&) { return 0.3; });
  CHECK(constant.holds);
  CHECK(constant.estimate == doctest::Approx(std::pow(0.3, 4)).epsilon(1e-12));
  CHECK(constant.estimate <= constant.moment_bound);

  // Default law: uniform rescaled to mean 0.5.
  const auto uniform = check_bernoulli_domination(20, 0.5, 4, 100000, 13);
  CHECK(uniform.holds);
  CHECK(uniform.estimate < uniform.moment_bound);
}

TEST_CASE("moment upper bound examples and grid") {
  const auto check = check_moment_upper_bound(100, 0.1, 2);
  CHECK(check.lhs == doctest::Approx(0.0109).epsilon(1e-12));
  CHECK(check.rhs ==
        doctest::Approx(0.01 + (2.0 * std::log(100.0) + 1.0) * 0.0004)
            .epsilon(1e-12));
  CHECK(check.holds);

  // n = k makes the additive term at least 1.
  const auto edge = check_moment_upper_bound(7, 0.9, 7);
  CHECK(edge.rhs >= 1.0);
  CHECK(edge.holds);
}

TEST_CASE("markov moment tail") {
  // Plain Markov when eps = delta = 0.
  const auto plain = markov_moment_tail(100, 0.2, 4, 0.0, 0.0, 0.1);
  CHECK(plain.markov_bound ==
        doctest::Approx(binomial_moment({100, 0.2, 4}) / std::pow(0.3, 4))
            .epsilon(1e-12));

  // The bound dominates the exact tail scaled back by e^{-eps k}.
  const auto report = markov_moment_tail(1000, 0.1, 20, 0.05, 0.0, 0.1);
  const double exact_tail = binomial_upper_tail(1000, 0.1, 200);
  CHECK(report.markov_bound >= exact_tail);
  CHECK(std::exp(0.05 * 20) * binomial_moment({1000, 0.1, 20}) /
            std::pow(0.2, 20) ==
        doctest::Approx(report.markov_bound).epsilon(1e-12));

  // Conditions are reported, not assumed.
  bool found_eps_condition = false;
  for (const auto& c : report.conditions) {
    if (c.name.find("eps") != std::string::npos) {
      found_eps_condition = true;
      CHECK(c.holds);
    }
  }
  CHECK(found_eps_condition);
  const auto bad_eps = markov_moment_tail(1000, 0.1, 20, 0.2, 0.0, 0.1);
  CHECK_FALSE(bad_eps.all_conditions_hold);

  // Monotone nonincreasing in tau.
  double prev = 1e300;
  for (double tau = 0.05; tau <= 0.3; tau += 0.05) {
    const auto r = markov_moment_tail(500, 0.1, 8, 0.0, 0.0, tau);
    CHECK(r.markov_bound <= prev + 1e-15);
    prev = r.markov_bound;
  }
}

TEST_CASE("hoeffding, chernoff and mcdiarmid evaluators") {
  CHECK(hoeffding_bound(1000, 0.05) ==
        doctest::Approx(2.0 * std::exp(-5.0)).epsilon(1e-12));
  CHECK(hoeffding_bound(10, 0.0) == 2.0);
  double prev = 3.0;
  for (std::size_t n = 10; n <= 10000; n *= 10) {
    const double b = hoeffding_bound(n, 0.05);
    CHECK(b < prev);
    prev = b;
  }

  CHECK(chernoff_mult_bound(100, 0.5, 0.2) ==
        doctest::Approx(std::exp(-50.0 * (1.2 * std::log(1.2) - 0.2)))
            .epsilon(1e-12));
  // gamma -> 0 drives the exponent to 0.
  CHECK(chernoff_mult_bound(100, 0.5, 1e-9) == doctest::Approx(1.0));
  // Bound dominates the exact binomial tail.
  CHECK(chernoff_mult_bound(100, 0.5, 0.2) >=
        binomial_upper_tail(100, 0.5, 60));

  CHECK(mcdiarmid_bound(100, 0.1, 0.5) ==
        doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(mcdiarmid_bound(100, 0.1, 0.0) == 1.0);
  CHECK(mcdiarmid_bound(50, 0.2, 0.3) ==
        doctest::Approx(mcdiarmid_bound(50, 0.4, 0.6)).epsilon(1e-12));
}

TEST_CASE("binomial rejection count") {
  // Observing >= c violations of a rate-p null should be a <= 0.5% event.
  const std::size_t c = binomial_rejection_count(500, 0.05);
  CHECK(binomial_upper_tail(500, 0.05, c) <= 0.005);
  CHECK(binomial_upper_tail(500, 0.05, c - 1) > 0.005);
  // Zero rate tolerates zero violations.
  CHECK(binomial_rejection_count(100, 0.0) == 1);
}
