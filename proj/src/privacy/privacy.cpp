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

#include "sqlab/privacy/privacy.hpp"

#include <cmath>

#include "sqlab/core/error.hpp"

namespace sqlab::privacy {

namespace {

void check_prob(double v, const char* name) {
  if (!(v > 0.0 && v < 1.0)) {
    throw InvalidArgument(std::string(name) + " must lie in (0,1)");
  }
}

double require(const std::optional<double>& v, const char* name) {
  if (!v) throw MissingParameter(std::string("sizing rule needs ") + name);
  return *v;
}

}  // namespace

PrivacyParams group_privacy(const PrivacyParams& p, unsigned k) {
  if (k < 1) throw InvalidArgument("group size must be >= 1");
  if (p.epsilon < 0.0 || p.delta < 0.0 || p.delta >= 1.0) {
    throw InvalidArgument("privacy parameters out of range");
  }
  PrivacyParams out;
  out.epsilon = k * p.epsilon;
  out.delta = std::exp(p.epsilon * (k - 1)) * p.delta;
  return out;
}

PrivacyParams compose_basic(const std::vector<PrivacyParams>& charges) {
  PrivacyParams out;
  for (const auto& c : charges) {
    out.epsilon += c.epsilon;
    out.delta += c.delta;
  }
  return out;
}

PrivacyParams compose_advanced(double epsilon, double delta, unsigned k,
                               double delta_prime) {
  if (k < 1) throw InvalidArgument("composition count must be >= 1");
  check_prob(delta_prime, "delta_prime");
  if (epsilon < 0.0 || delta < 0.0) {
    throw InvalidArgument("privacy parameters out of range");
  }
  PrivacyParams out;
  out.epsilon = std::sqrt(2.0 * k * std::log(1.0 / delta_prime)) * epsilon +
                k * epsilon * std::expm1(epsilon);
  out.delta = k * delta + delta_prime;
  return out;
}

BudgetLedger::BudgetLedger(Policy policy, double delta_prime)
    : policy_(policy), delta_prime_(delta_prime) {
  if (policy == Policy::kAdvanced) check_prob(delta_prime, "delta_prime");
}

void BudgetLedger::charge(const PrivacyParams& p) {
  if (policy_ == Policy::kAdvanced && !charges_.empty()) {
    const auto& first = charges_.front();
    if (p.epsilon != first.epsilon || p.delta != first.delta) {
      throw InvalidArgument(
          "advanced-composition ledger requires homogeneous charges");
    }
  }
  charges_.push_back(p);
}

PrivacyParams BudgetLedger::total() const {
  if (charges_.empty()) return {};
  if (policy_ == Policy::kBasic) return compose_basic(charges_);
  return compose_advanced(charges_.front().epsilon, charges_.front().delta,
                          static_cast<unsigned>(charges_.size()),
                          delta_prime_);
}

double calibrate_epsilon_pure(double tau, double beta, std::size_t n) {
  check_prob(tau, "tau");
  check_prob(beta, "beta");
  const double need = 12.0 * std::log(4.0 / beta) / (tau * tau);
  if (static_cast<double>(n) < need) {
    throw SampleTooSmall("n = " + std::to_string(n) +
                         " below 12 ln(4/beta)/tau^2 = " +
                         std::to_string(need));
  }
  return tau / 2.0;
}

PrivacyParams calibrate_eps_delta(double tau, double beta, std::size_t n) {
  check_prob(tau, "tau");
  check_prob(beta, "beta");
  const double need = 48.0 * std::log(4.0 / beta) / (tau * tau);
  if (static_cast<double>(n) < need) {
    throw SampleTooSmall("n = " + std::to_string(n) +
                         " below 48 ln(4/beta)/tau^2 = " +
                         std::to_string(need));
  }
  PrivacyParams out;
  out.epsilon = tau / 4.0;
  out.delta = std::exp(-4.0 * std::log(8.0 / beta) / tau);
  return out;
}

double calibrate_epsilon_events(double beta, std::size_t n) {
  check_prob(beta, "beta");
  if (n == 0) throw InvalidArgument("n must be >= 1");
  return std::sqrt(std::log(1.0 / beta) / (2.0 * static_cast<double>(n)));
}

std::uint64_t required_sample_size(SizingRule rule, const SizingInputs& in,
                                   double C) {
  check_prob(in.tau, "tau");
  check_prob(in.beta, "beta");
  if (C <= 0.0) throw InvalidArgument("sizing constant must be positive");
  const double tau = in.tau;
  const double lb = std::log(1.0 / in.beta);
  double value = 0.0;
  double constant = C;
  switch (rule) {
    case SizingRule::kLaplacePure: {
      if (!in.m) throw MissingParameter("sizing rule needs m");
      value = static_cast<double>(*in.m) * lb /
              (require(in.epsilon, "epsilon") * tau);
      break;
    }
    case SizingRule::kLaplaceApprox: {
      if (!in.m) throw MissingParameter("sizing rule needs m");
      const double m = static_cast<double>(*in.m);
      value = std::sqrt(m * std::log(1.0 / require(in.delta, "delta"))) * lb /
              (require(in.epsilon, "epsilon") * tau);
      break;
    }
    case SizingRule::kLaplaceTransferPure: {
      if (!in.m) throw MissingParameter("sizing rule needs m");
      value = static_cast<double>(*in.m) * lb / (tau * tau);
      break;
    }
    case SizingRule::kLaplaceTransferApprox: {
      if (!in.m) throw MissingParameter("sizing rule needs m");
      value = std::sqrt(static_cast<double>(*in.m)) * std::pow(lb, 1.5) /
              std::pow(tau, 2.5);
      break;
    }
    case SizingRule::kPmwPure: {
      value = require(in.log_universe, "log_universe") * lb /
              (require(in.epsilon, "epsilon") * tau * tau * tau);
      break;
    }
    case SizingRule::kPmwApprox: {
      value = std::sqrt(require(in.log_universe, "log_universe") *
                        std::log(1.0 / require(in.delta, "delta"))) *
              lb / (require(in.epsilon, "epsilon") * tau * tau);
      break;
    }
    case SizingRule::kPmwTransferPure: {
      value = require(in.log_universe, "log_universe") * lb /
              (tau * tau * tau * tau);
      break;
    }
    case SizingRule::kPmwTransferApprox: {
      value = std::sqrt(require(in.log_universe, "log_universe")) *
              std::pow(lb, 1.5) / std::pow(tau, 3.5);
      break;
    }
    case SizingRule::kSparsePure: {
      if (!in.r) throw MissingParameter("sizing rule needs r");
      value = 9.0 * *in.r * std::log(4.0 / in.beta) /
              (tau * require(in.epsilon, "epsilon"));
      constant = 1.0;
      break;
    }
    case SizingRule::kSparseApprox: {
      if (!in.r) throw MissingParameter("sizing rule needs r");
      value = (std::sqrt(512.0) + 1.0) *
              std::sqrt(*in.r * std::log(2.0 / require(in.delta, "delta"))) *
              std::log(4.0 / in.beta) / (tau * require(in.epsilon, "epsilon"));
      constant = 1.0;
      break;
    }
    case SizingRule::kEffectiveRoundsTransfer: {
      if (!in.r) throw MissingParameter("sizing rule needs r");
      value = *in.r * lb / (tau * tau);
      break;
    }
    case SizingRule::kEffectiveRoundsGate: {
      if (!in.r) throw MissingParameter("sizing rule needs r");
      value = 1156.0 * *in.r * std::log(12.0 / in.beta) / (tau * tau);
      constant = 1.0;
      break;
    }
  }
  return static_cast<std::uint64_t>(std::ceil(constant * value));
}

std::string sizing_rule_name(SizingRule rule) {
  switch (rule) {
    case SizingRule::kLaplacePure:
      return "laplace-pure";
    case SizingRule::kLaplaceApprox:
      return "laplace-approx";
    case SizingRule::kLaplaceTransferPure:
      return "laplace-transfer-pure";
    case SizingRule::kLaplaceTransferApprox:
      return "laplace-transfer-approx";
    case SizingRule::kPmwPure:
      return "pmw-pure";
    case SizingRule::kPmwApprox:
      return "pmw-approx";
    case SizingRule::kPmwTransferPure:
      return "pmw-transfer-pure";
    case SizingRule::kPmwTransferApprox:
      return "pmw-transfer-approx";
    case SizingRule::kSparsePure:
      return "sparse-pure";
    case SizingRule::kSparseApprox:
      return "sparse-approx";
    case SizingRule::kEffectiveRoundsTransfer:
      return "effective-rounds-transfer";
    case SizingRule::kEffectiveRoundsGate:
      return "effective-rounds-gate";
  }
  return "unknown";
}

}  // namespace sqlab::privacy
