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

#include "sqlab/verify/moments.hpp"

#include <cmath>
#include <vector>

#include "sqlab/core/error.hpp"

namespace sqlab::verify {

namespace {

// Prefix sums of ln(i) in extended precision; ln_factorial(j) = table[j].
const long double* ln_factorial_table(std::size_t max_n) {
  static std::vector<long double> table = {0.0L};
  while (table.size() <= max_n) {
    const std::size_t i = table.size();
    table.push_back(table.back() + std::log(static_cast<long double>(i)));
  }
  return table.data();
}

void validate_moment_spec(const MomentSpec& spec) {
  if (spec.k < 1 || static_cast<std::size_t>(spec.k) > spec.n) {
    throw InvalidArgument("moment order must satisfy 1 <= k <= n");
  }
  if (!(spec.p >= 0.0 && spec.p <= 1.0)) {
    throw InvalidArgument("p must lie in [0,1]");
  }
  if (spec.n > kMomentMaxN || spec.k > kMomentMaxK) {
    throw ConditionViolated(
        "binomial_moment supports n <= 10000, k <= 32; larger inputs would "
        "degrade the accuracy guarantee");
  }
}

}  // namespace

double binomial_moment(const MomentSpec& spec) {
  validate_moment_spec(spec);
  const std::size_t n = spec.n;
  const double p = spec.p;
  const unsigned k = spec.k;
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;

  const long double* lnf = ln_factorial_table(n);
  const long double ln_p = std::log(static_cast<long double>(p));
  const long double ln_q = std::log(static_cast<long double>(1.0 - p));
  const long double ln_n = std::log(static_cast<long double>(n));
  long double sum = 0.0L;
  // j = 0 contributes nothing since (j/n)^k = 0 for k >= 1.
  for (std::size_t j = 1; j <= n; ++j) {
    const long double ln_term =
        lnf[n] - lnf[j] - lnf[n - j] + static_cast<long double>(j) * ln_p +
        static_cast<long double>(n - j) * ln_q +
        static_cast<long double>(k) *
            (std::log(static_cast<long double>(j)) - ln_n);
    sum += std::exp(ln_term);
  }
  return static_cast<double>(sum);
}

double binomial_upper_tail(std::size_t n, double p, std::size_t threshold) {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0,1]");
  if (n == 0 || n > kMomentMaxN) {
    throw ConditionViolated("binomial_upper_tail supports 1 <= n <= 10000");
  }
  if (threshold > n) return 0.0;
  if (p == 0.0) return threshold == 0 ? 1.0 : 0.0;
  if (p == 1.0) return 1.0;
  const long double* lnf = ln_factorial_table(n);
  const long double ln_p = std::log(static_cast<long double>(p));
  const long double ln_q = std::log(static_cast<long double>(1.0 - p));
  long double sum = 0.0L;
  for (std::size_t j = threshold; j <= n; ++j) {
    sum += std::exp(lnf[n] - lnf[j] - lnf[n - j] +
                    static_cast<long double>(j) * ln_p +
                    static_cast<long double>(n - j) * ln_q);
  }
  return static_cast<double>(std::min(sum, 1.0L));
}

DominationReport check_bernoulli_domination(
    std::size_t n, double p, unsigned k, std::size_t trials,
    std::uint64_t seed, const std::function<double(RngStream&)>& law) {
  MomentSpec spec{n, p, k};
  validate_moment_spec(spec);
  std::function<double(RngStream&)> draw = law;
  if (!draw) {
    // Uniform rescaled to mean p, staying inside [0,1] on either side.
    if (p <= 0.5) {
      draw = [p](RngStream& rng) { return 2.0 * p * rng.uniform(); };
    } else {
      draw = [p](RngStream& rng) {
        return 1.0 - 2.0 * (1.0 - p) * rng.uniform();
      };
    }
  }
  RngStream rng(seed);
  CompensatedSum sum;
  CompensatedSum sum_sq;
  for (std::size_t t = 0; t < trials; ++t) {
    CompensatedSum mean;
    for (std::size_t i = 0; i < n; ++i) mean.add(draw(rng));
    const double v = std::pow(mean.value() / static_cast<double>(n),
                              static_cast<double>(k));
    sum.add(v);
    sum_sq.add(v * v);
  }
  DominationReport report;
  report.trials = trials;
  const double t = static_cast<double>(trials);
  report.estimate = sum.value() / t;
  const double var = std::max(
      0.0, (sum_sq.value() - t * report.estimate * report.estimate) / (t - 1.0));
  report.std_error = std::sqrt(var / t);
  report.moment_bound = binomial_moment(spec);
  report.holds = report.estimate <= report.moment_bound + 3.0 * report.std_error;
  return report;
}

MomentBoundCheck check_moment_upper_bound(std::size_t n, double p, unsigned k) {
  MomentBoundCheck check;
  check.lhs = binomial_moment({n, p, k});
  const double kd = static_cast<double>(k);
  const double nd = static_cast<double>(n);
  check.rhs = std::pow(p, kd) +
              (kd * std::log(nd) + 1.0) * std::pow(kd / nd, kd);
  check.holds = check.lhs <= check.rhs * (1.0 + 1e-12);
  return check;
}

MarkovTailReport markov_moment_tail(std::size_t n, double p, unsigned k,
                                    double eps, double delta_term,
                                    double tau) {
  if (!(tau > 0.0)) throw InvalidArgument("tau must be positive");
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("p must lie in [0,1]");
  if (delta_term < 0.0 || eps < 0.0) {
    throw InvalidArgument("eps and delta must be nonnegative");
  }
  MarkovTailReport report;
  const double mk = binomial_moment({n, p, k});
  const double denom = std::pow(p + tau, static_cast<double>(k));
  report.markov_bound =
      std::exp(eps * k) * mk / denom + delta_term / denom;
  report.beta_implied =
      p == 0.0 ? 0.0 : 2.0 * std::exp(-static_cast<double>(k) * tau / (4.0 * p));
  report.beta_form_bound = report.beta_implied + delta_term / denom;

  const double loglog_n =
      n > 1 ? 2.0 * std::ceil(std::log2(std::log(static_cast<double>(n))))
            : 0.0;
  report.conditions = {
      {"tau <= 1/3", tau <= 1.0 / 3.0},
      {"eps <= tau/2", eps <= tau / 2.0},
      {"k >= 4 p ln(2/beta)/tau (beta read off from k)",
       report.beta_implied <= 2.0 / 3.0},
      {"k >= 2 log2(ln n)", static_cast<double>(k) >= loglog_n},
      {"n >= 3k/tau",
       static_cast<double>(n) >= 3.0 * static_cast<double>(k) / tau},
  };
  report.all_conditions_hold = true;
  for (const auto& c : report.conditions) {
    report.all_conditions_hold = report.all_conditions_hold && c.holds;
  }
  return report;
}

double hoeffding_bound(std::size_t n, double tau) {
  if (tau < 0.0) throw InvalidArgument("tau must be nonnegative");
  return 2.0 * std::exp(-2.0 * tau * tau * static_cast<double>(n));
}

double chernoff_mult_bound(std::size_t n, double p, double gamma) {
  if (!(p > 0.0) || !(gamma > 0.0)) {
    throw InvalidArgument("chernoff bound needs p > 0 and gamma > 0");
  }
  const double g = (1.0 + gamma) * std::log1p(gamma) - gamma;
  return std::exp(-static_cast<double>(n) * p * g);
}

double mcdiarmid_bound(std::size_t n, double c, double alpha) {
  if (!(c > 0.0)) throw InvalidArgument("mcdiarmid bound needs c > 0");
  return std::exp(-2.0 * alpha * alpha / (static_cast<double>(n) * c * c));
}

std::size_t binomial_rejection_count(std::size_t trials, double rate,
                                     double tail) {
  if (trials == 0 || trials > kMomentMaxN) {
    throw InvalidArgument("rejection count supports 1 <= trials <= 10000");
  }
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw InvalidArgument("rate must lie in [0,1]");
  }
  // Walk the upper tail downward until it exceeds `tail`.
  std::size_t c = trials + 1;
  while (c > 0 && binomial_upper_tail(trials, rate, c - 1) <= tail) --c;
  return c;
}

}  // namespace sqlab::verify
