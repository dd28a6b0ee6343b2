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

#ifndef SQLAB_VERIFY_MOMENTS_HPP_
#define SQLAB_VERIFY_MOMENTS_HPP_

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sqlab/core/rng.hpp"

namespace sqlab::verify {

// M_k[B(n,p)]: the k-th moment of the normalized Binomial(n,p) mean.
struct MomentSpec {
  std::size_t n = 1;
  double p = 0.0;
  unsigned k = 1;
};

// Accuracy is validated on this range; beyond it the evaluator refuses
// rather than risk a silently degraded answer.
inline constexpr std::size_t kMomentMaxN = 10000;
inline constexpr unsigned kMomentMaxK = 32;

// Direct evaluation of sum_j C(n,j) p^j (1-p)^{n-j} (j/n)^k with log-space
// terms; exact to 1e-12 relative on the supported range.
double binomial_moment(const MomentSpec& spec);

// Pr[Bin(n,p) >= threshold], exact summation. Independent tail oracle for
// the bound evaluators.
double binomial_upper_tail(std::size_t n, double p, std::size_t threshold);

struct DominationReport {
  double estimate = 0.0;
  double std_error = 0.0;
  double moment_bound = 0.0;
  std::size_t trials = 0;
  bool holds = false;  // estimate <= moment_bound + 3 std errors
};

// Monte Carlo check that E[(mean of n i.i.d. [0,1] draws with mean p)^k]
// is dominated by M_k[B(n,p)]. The default law is uniform rescaled to
// mean p; any [0,1]-valued sampler with mean p may be supplied.
DominationReport check_bernoulli_domination(
    std::size_t n, double p, unsigned k, std::size_t trials,
    std::uint64_t seed, const std::function<double(RngStream&)>& law = {});

struct MomentBoundCheck {
  double lhs = 0.0;  // M_k[B(n,p)]
  double rhs = 0.0;  // p^k + (k ln n + 1) (k/n)^k
  bool holds = false;
};

// Lemma-style closed-form cap on the binomial moment, compared against the
// exact evaluator with 1e-12 relative headroom.
MomentBoundCheck check_moment_upper_bound(std::size_t n, double p, unsigned k);

struct TailCondition {
  std::string name;
  bool holds = false;
};

struct MarkovTailReport {
  double markov_bound = 0.0;     // e^{eps k} M_k/(p+tau)^k + delta/(p+tau)^k
  double beta_implied = 0.0;     // 2 exp(-k tau / (4p)), the smallest valid beta
  double beta_form_bound = 0.0;  // beta_implied + delta/(p+tau)^k
  std::vector<TailCondition> conditions;
  bool all_conditions_hold = false;
};

// Moment-based tail bound for a random variable V with
// E[V^k] <= e^{eps k} M_k[B(n,p)] + delta. The side conditions are
// evaluated and reported, never silently assumed; "2 log log n" is read as
// 2 * ceil(log2(ln n)).
MarkovTailReport markov_moment_tail(std::size_t n, double p, unsigned k,
                                    double eps, double delta_term, double tau);

// 2 exp(-2 tau^2 n): the fixed-query Hoeffding baseline.
double hoeffding_bound(std::size_t n, double tau);

// exp(-n p ((1+gamma) ln(1+gamma) - gamma)): multiplicative Chernoff.
double chernoff_mult_bound(std::size_t n, double p, double gamma);

// exp(-2 alpha^2 / (n c^2)): McDiarmid for c-Lipschitz coordinates.
double mcdiarmid_bound(std::size_t n, double c, double alpha);

// Smallest count c with Pr[Bin(trials, rate) >= c] <= tail. A Monte Carlo
// run passes a rate-<=rate hypothesis iff its violation count stays below
// this; tail = 0.005 gives the two-sided 99% convention.
std::size_t binomial_rejection_count(std::size_t trials, double rate,
                                     double tail = 0.005);

}  // namespace sqlab::verify

#endif  // SQLAB_VERIFY_MOMENTS_HPP_
