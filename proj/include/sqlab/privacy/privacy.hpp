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

#ifndef SQLAB_PRIVACY_PRIVACY_HPP_
#define SQLAB_PRIVACY_PRIVACY_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace sqlab::privacy {

struct PrivacyParams {
  double epsilon = 0.0;
  double delta = 0.0;
};

// Group privacy for datasets differing in up to k elements:
// (epsilon, delta) -> (k * epsilon, e^{epsilon (k-1)} * delta).
PrivacyParams group_privacy(const PrivacyParams& p, unsigned k);

// Component-wise sums over the charge list.
PrivacyParams compose_basic(const std::vector<PrivacyParams>& charges);

// Advanced composition of k copies of an (epsilon, delta) mechanism with
// slack delta_prime:
//   epsilon' = sqrt(2 k ln(1/delta')) epsilon + k epsilon (e^epsilon - 1)
//   delta'   = k delta + delta_prime.
PrivacyParams compose_advanced(double epsilon, double delta, unsigned k,
                               double delta_prime);

// Ordered privacy charges for one session, totaled under the chosen
// composition policy. Advanced totals require a homogeneous charge list.
class BudgetLedger {
 public:
  enum class Policy { kBasic, kAdvanced };

  explicit BudgetLedger(Policy policy = Policy::kBasic,
                        double delta_prime = 0.0);

  void charge(const PrivacyParams& p);
  std::size_t count() const { return charges_.size(); }
  PrivacyParams total() const;
  Policy policy() const { return policy_; }

 private:
  Policy policy_;
  double delta_prime_;
  std::vector<PrivacyParams> charges_;
};

// epsilon = tau/2, valid once n >= 12 ln(4/beta) / tau^2; throws
// SampleTooSmall (naming the deficit) below that.
double calibrate_epsilon_pure(double tau, double beta, std::size_t n);

// (epsilon, delta) = (tau/4, exp(-4 ln(8/beta)/tau)), valid once
// n >= 48 ln(4/beta) / tau^2.
PrivacyParams calibrate_eps_delta(double tau, double beta, std::size_t n);

// Largest epsilon for which the bad-event bound Pr[S in R(Y)] <= 3 sqrt(beta)
// applies: sqrt(ln(1/beta) / (2n)).
double calibrate_epsilon_events(double beta, std::size_t n);

// Sample-size rules. The "Transfer" variants are the statistically valid
// (population-accurate) sizings; the plain variants guarantee empirical
// accuracy for an explicitly supplied epsilon (and delta).
enum class SizingRule {
  kLaplacePure,            // m ln(1/beta) / (epsilon tau)
  kLaplaceApprox,          // sqrt(m ln(1/delta)) ln(1/beta) / (epsilon tau)
  kLaplaceTransferPure,    // m ln(1/beta) / tau^2
  kLaplaceTransferApprox,  // sqrt(m) ln(1/beta)^{1.5} / tau^{2.5}
  kPmwPure,                // logX ln(1/beta) / (epsilon tau^3)
  kPmwApprox,              // sqrt(logX ln(1/delta)) ln(1/beta) / (epsilon tau^2)
  kPmwTransferPure,        // logX ln(1/beta) / tau^4
  kPmwTransferApprox,      // sqrt(logX) ln(1/beta)^{1.5} / tau^{3.5}
  kSparsePure,             // 9 r ln(4/beta) / (tau epsilon)         [C = 1]
  kSparseApprox,  // (sqrt(512)+1) sqrt(r ln(2/delta)) ln(4/beta) / (tau epsilon)
  kEffectiveRoundsTransfer,  // r ln(1/beta) / tau^2
  kEffectiveRoundsGate,      // 1156 r ln(12/beta) / tau^2            [C = 1]
};

struct SizingInputs {
  double tau = 0.0;
  double beta = 0.0;
  std::optional<std::uint64_t> m;
  std::optional<double> epsilon;
  std::optional<double> delta;
  std::optional<double> log_universe;
  std::optional<unsigned> r;
};

// Default multiplier applied to the corollary-shaped rules; the rules with
// explicit constants (sparse vector, the round-detection gate) ignore it.
inline constexpr double kDefaultSizingConstant = 32.0;

// ceil(C * formula); throws MissingParameter when the rule needs an input
// that was not supplied. All logs are natural.
std::uint64_t required_sample_size(SizingRule rule, const SizingInputs& in,
                                   double C = kDefaultSizingConstant);

std::string sizing_rule_name(SizingRule rule);

}  // namespace sqlab::privacy

#endif  // SQLAB_PRIVACY_PRIVACY_HPP_
