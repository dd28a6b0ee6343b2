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

#include "sqlab/mechanisms/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <utility>

#include "sqlab/core/error.hpp"

namespace sqlab::mechanisms {

namespace {

constexpr double kWeightTolerance = 1e-9;

double laplace_or_zero(RngStream& rng, double scale, bool noiseless) {
  return noiseless ? 0.0 : rng.laplace(scale);
}

}  // namespace

std::string mechanism_name(Mechanism m) {
  switch (m) {
    case Mechanism::kNaive:
      return "naive";
    case Mechanism::kLaplace:
      return "laplace";
    case Mechanism::kPmw:
      return "pmw";
    case Mechanism::kSparseVector:
      return "sparse-vector";
    case Mechanism::kEffectiveRounds:
      return "effective-rounds";
  }
  return "unknown";
}

Mechanism mechanism_from_name(const std::string& name) {
  if (name == "naive") return Mechanism::kNaive;
  if (name == "laplace") return Mechanism::kLaplace;
  if (name == "pmw") return Mechanism::kPmw;
  if (name == "sparse-vector") return Mechanism::kSparseVector;
  if (name == "effective-rounds") return Mechanism::kEffectiveRounds;
  throw ConfigError("unknown mechanism: " + name);
}

void OracleConfig::validate() const {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("tau must lie in (0,1)");
  if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0,1)");
  if (m < 1) throw ConfigError("query budget m must be >= 1");
  if (epsilon < 0.0) throw ConfigError("epsilon must be nonnegative");
  if (delta < 0.0 || delta >= 1.0) throw ConfigError("delta must lie in [0,1)");
  const bool needs_noise =
      mechanism == Mechanism::kLaplace || mechanism == Mechanism::kPmw ||
      mechanism == Mechanism::kSparseVector;
  if (needs_noise && !noiseless && epsilon <= 0.0) {
    throw ConfigError(mechanism_name(mechanism) +
                      " needs epsilon > 0 outside noiseless mode");
  }
  if ((mechanism == Mechanism::kSparseVector ||
       mechanism == Mechanism::kEffectiveRounds) &&
      r < 1) {
    throw ConfigError("firing budget r must be >= 1");
  }
}

std::string OracleConfig::to_text() const {
  std::ostringstream out;
  out << "mechanism=" << mechanism_name(mechanism) << '\n'
      << "tau=" << tau << '\n'
      << "beta=" << beta << '\n'
      << "m=" << m << '\n'
      << "epsilon=" << epsilon << '\n'
      << "delta=" << delta << '\n'
      << "r=" << r << '\n'
      << "threshold=" << threshold << '\n'
      << "noiseless=" << (noiseless ? 1 : 0) << '\n'
      << "clamp=" << (clamp ? 1 : 0) << '\n'
      << "pmw_eta=" << pmw_eta << '\n'
      << "pmw_threshold=" << pmw_threshold << '\n';
  return out.str();
}

OracleConfig OracleConfig::from_text(const std::string& text) {
  OracleConfig cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("expected key=value, got: " + line);
    }
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "mechanism") {
      cfg.mechanism = mechanism_from_name(value);
    } else if (key == "tau") {
      cfg.tau = std::stod(value);
    } else if (key == "beta") {
      cfg.beta = std::stod(value);
    } else if (key == "m") {
      cfg.m = std::stoull(value);
    } else if (key == "epsilon") {
      cfg.epsilon = std::stod(value);
    } else if (key == "delta") {
      cfg.delta = std::stod(value);
    } else if (key == "r") {
      cfg.r = static_cast<unsigned>(std::stoul(value));
    } else if (key == "threshold") {
      cfg.threshold = std::stod(value);
    } else if (key == "noiseless") {
      cfg.noiseless = value == "1" || value == "true";
    } else if (key == "clamp") {
      cfg.clamp = value == "1" || value == "true";
    } else if (key == "pmw_eta") {
      cfg.pmw_eta = std::stod(value);
    } else if (key == "pmw_threshold") {
      cfg.pmw_threshold = std::stod(value);
    } else {
      throw ConfigError("unknown session config key: " + key);
    }
  }
  return cfg;
}

OracleSession::OracleSession(const OracleConfig& config, Dataset dataset,
                             std::uint64_t seed)
    : config_(config),
      dataset_(std::move(dataset)),
      rng_(seed),
      ledger_(config.delta > 0.0 ? privacy::BudgetLedger::Policy::kAdvanced
                                 : privacy::BudgetLedger::Policy::kBasic,
              config.delta > 0.0 ? config.delta / 2.0 : 0.0) {
  config_.validate();
  if (dataset_.size() < 1) throw DatasetTooSmall("dataset needs n >= 1");
}

std::optional<double> OracleSession::answer(const Query& query,
                                            std::optional<double> guess) {
  if (halted_) {
    if (halt_reason_ == "firing budget exhausted") {
      throw FiringBudgetExhausted("session halted: " + halt_reason_);
    }
    throw SessionHalted("session halted: " + halt_reason_);
  }
  if (transcript_.entries.size() >= config_.m) {
    throw QueryBudgetExceeded("query budget m = " + std::to_string(config_.m) +
                              " exhausted");
  }
  RawAnswer raw = answer_impl(query, guess);
  if (raw.value && config_.clamp) {
    raw.value = std::clamp(*raw.value, 0.0, 1.0);
  }
  TranscriptEntry entry;
  entry.query_id = query.id();
  entry.answer = raw.value;
  entry.empirical_on_answering_set = raw.empirical;
  entry.state_note = raw.note;
  transcript_.entries.push_back(std::move(entry));
  if (raw.halt_after && !halted_) halt("firing budget exhausted");
  return raw.value;
}

privacy::PrivacyParams OracleSession::spent() const { return ledger_.total(); }

void OracleSession::halt(const std::string& reason) {
  halted_ = true;
  halt_reason_ = reason;
  transcript_.halted = true;
}

// ---------------------------------------------------------------------------
// Naive

NaiveSession::NaiveSession(const OracleConfig& config, Dataset dataset,
                           std::uint64_t seed)
    : OracleSession(config, std::move(dataset), seed) {
  if (config.mechanism != Mechanism::kNaive) {
    throw ConfigError("NaiveSession requires mechanism=naive");
  }
}

OracleSession::RawAnswer NaiveSession::answer_impl(const Query& query,
                                                   std::optional<double>) {
  RawAnswer raw;
  raw.empirical = empirical_mean(dataset_, query);
  raw.value = raw.empirical;
  return raw;
}

// ---------------------------------------------------------------------------
// Laplace

LaplaceSession::LaplaceSession(const OracleConfig& config, Dataset dataset,
                               std::uint64_t seed)
    : OracleSession(config, std::move(dataset), seed) {
  if (config.mechanism != Mechanism::kLaplace) {
    throw ConfigError("LaplaceSession requires mechanism=laplace");
  }
  const double n = static_cast<double>(dataset_.size());
  if (config_.epsilon > 0.0) {
    if (config_.delta == 0.0) {
      per_query_epsilon_ = config_.epsilon / static_cast<double>(config_.m);
    } else {
      per_query_epsilon_ =
          config_.epsilon /
          (2.0 * std::sqrt(2.0 * static_cast<double>(config_.m) *
                           std::log(1.0 / config_.delta)));
    }
    scale_ = 1.0 / (n * per_query_epsilon_);
  }
}

OracleSession::RawAnswer LaplaceSession::answer_impl(const Query& query,
                                                     std::optional<double>) {
  RawAnswer raw;
  raw.empirical = empirical_mean(dataset_, query);
  raw.value =
      raw.empirical + laplace_or_zero(rng_, scale_, config_.noiseless);
  ledger_.charge({per_query_epsilon_, 0.0});
  return raw;
}

// ---------------------------------------------------------------------------
// Private multiplicative weights

PmwSession::PmwSession(const OracleConfig& config, Dataset dataset,
                       std::uint64_t seed)
    : OracleSession(config, std::move(dataset), seed) {
  if (config.mechanism != Mechanism::kPmw) {
    throw ConfigError("PmwSession requires mechanism=pmw");
  }
  const Universe& u = dataset_.universe();
  if (!u.tabulatable()) {
    throw UniverseNotTabulatable(
        "pmw needs a tabulatable universe (discrete, |X| <= 2^20)");
  }
  const double size = static_cast<double>(u.size());
  weights_.assign(u.size(), 1.0 / size);
  eta_ = config_.pmw_eta > 0.0 ? config_.pmw_eta : config_.tau / 8.0;
  update_threshold_ = config_.pmw_threshold > 0.0 ? config_.pmw_threshold
                                                  : config_.tau / 2.0;
  hard_update_cap_ = static_cast<unsigned>(
      std::ceil(16.0 * u.log_size() / (config_.tau * config_.tau)));
  if (config_.epsilon > 0.0) {
    if (config_.delta == 0.0) {
      per_update_epsilon_ = config_.epsilon / hard_update_cap_;
    } else {
      per_update_epsilon_ =
          config_.epsilon /
          (2.0 * std::sqrt(2.0 * hard_update_cap_ *
                           std::log(1.0 / config_.delta)));
    }
    scale_ = 2.0 / (static_cast<double>(dataset_.size()) * per_update_epsilon_);
  }
}

double PmwSession::synthetic_mean(const Query& query) const {
  const auto table = query.tabulate(dataset_.universe());
  CompensatedSum sum;
  for (std::size_t x = 0; x < table.size(); ++x) {
    sum.add(weights_[x] * table[x]);
  }
  return sum.value();
}

OracleSession::RawAnswer PmwSession::answer_impl(const Query& query,
                                                 std::optional<double>) {
  const Universe& u = dataset_.universe();
  // Tabulated forms are read in place; evaluable queries get materialized
  // once per round.
  std::optional<Query> materialized;
  const Query* q = &query;
  if (!query.tabulated()) {
    materialized = Query::from_table(query.id(), query.tabulate(u));
    q = &*materialized;
  } else if (query.table_size() != u.size()) {
    throw UniverseMismatch("query table does not match the pmw universe");
  }
  RawAnswer raw;
  raw.empirical = empirical_mean(dataset_, *q);
  CompensatedSum synth;
  for (std::size_t x = 0; x < weights_.size(); ++x) {
    synth.add(weights_[x] * q->value_at(x));
  }
  const double synthetic = synth.value();
  const double noisy_error = (raw.empirical - synthetic) +
                             laplace_or_zero(rng_, scale_, config_.noiseless);
  // Every round pays the per-update charge; lazy rounds are answered from
  // the synthetic distribution alone.
  ledger_.charge({per_update_epsilon_, 0.0});
  if (std::abs(noisy_error) <= update_threshold_) {
    raw.value = synthetic;
    raw.note = "lazy";
    return raw;
  }
  if (hard_updates_ >= hard_update_cap_) {
    halt("hard-update cap reached");
    throw HardUpdateBudgetExhausted(
        "pmw hard-update cap " + std::to_string(hard_update_cap_) +
        " exhausted");
  }
  const double direction = noisy_error > 0.0 ? 1.0 : -1.0;
  const double unit_factor = std::exp(eta_ * direction);
  double total = 0.0;
  for (std::size_t x = 0; x < weights_.size(); ++x) {
    const double v = q->value_at(x);
    if (v == 1.0) {
      weights_[x] *= unit_factor;
    } else if (v != 0.0) {
      weights_[x] *= std::exp(eta_ * direction * v);
    }
    total += weights_[x];
  }
  for (double& w : weights_) w /= total;
  ++hard_updates_;
  raw.value =
      raw.empirical + laplace_or_zero(rng_, scale_, config_.noiseless);
  raw.note = "hard-update " + std::to_string(hard_updates_);
  return raw;
}

// ---------------------------------------------------------------------------
// Sparse vector (NumericSparse)

SparseVectorSession::SparseVectorSession(const OracleConfig& config,
                                         Dataset dataset, std::uint64_t seed)
    : OracleSession(config, std::move(dataset), seed) {
  if (config.mechanism != Mechanism::kSparseVector) {
    throw ConfigError("SparseVectorSession requires mechanism=sparse-vector");
  }
  remaining_firings_ = config_.r;
  if (config_.epsilon > 0.0) {
    const double n = static_cast<double>(dataset_.size());
    const double eps1 = 8.0 * config_.epsilon / 9.0;
    const double eps2 = config_.epsilon / 9.0;
    const double r = static_cast<double>(config_.r);
    threshold_scale_ = 2.0 * r / (eps1 * n);
    test_scale_ = 4.0 * r / (eps1 * n);
    answer_scale_ = r / (eps2 * n);
  }
  resample_threshold();
}

void SparseVectorSession::resample_threshold() {
  noisy_threshold_ =
      config_.threshold +
      laplace_or_zero(rng_, threshold_scale_, config_.noiseless);
}

OracleSession::RawAnswer SparseVectorSession::answer_impl(
    const Query& query, std::optional<double> guess) {
  if (!guess) {
    throw MissingParameter("sparse-vector queries need a guess g");
  }
  RawAnswer raw;
  raw.empirical = empirical_mean(dataset_, query);
  const double error = std::abs(raw.empirical - *guess);
  // Noiseless tie at exactly T resolves to Bottom.
  const bool below =
      config_.noiseless
          ? error <= config_.threshold
          : error + rng_.laplace(test_scale_) < noisy_threshold_;
  if (below) {
    raw.value = std::nullopt;
    raw.note = "bottom";
    return raw;
  }
  raw.value =
      raw.empirical + laplace_or_zero(rng_, answer_scale_, config_.noiseless);
  --remaining_firings_;
  resample_threshold();
  ledger_.charge({config_.epsilon / static_cast<double>(config_.r), 0.0});
  raw.note = "fired, budget " + std::to_string(remaining_firings_);
  if (remaining_firings_ == 0) raw.halt_after = true;
  return raw;
}

// ---------------------------------------------------------------------------
// EffectiveRounds

Fig1Split effective_rounds_split(std::size_t n, unsigned r, double tau,
                                 double beta) {
  if (r < 1) throw InvalidArgument("r must be >= 1");
  if (!(tau > 0.0 && tau < 1.0) || !(beta > 0.0 && beta < 1.0)) {
    throw InvalidArgument("tau and beta must lie in (0,1)");
  }
  Fig1Split split;
  split.estimation_size = static_cast<std::size_t>(
      std::ceil(4.0 * std::log(12.0 / beta) / (tau * tau)));
  const std::size_t estimation_total = split.estimation_size * r;
  if (n <= estimation_total) {
    throw DatasetTooSmall(
        "n = " + std::to_string(n) + " cannot hold " + std::to_string(r) +
        " estimation sets of " + std::to_string(split.estimation_size) +
        " points plus a holdout");
  }
  split.holdout_size = n - estimation_total;
  return split;
}

EffectiveRoundsSession::EffectiveRoundsSession(const OracleConfig& config,
                                               Dataset dataset,
                                               std::uint64_t seed)
    : OracleSession(config, std::move(dataset), seed) {
  if (config.mechanism != Mechanism::kEffectiveRounds) {
    throw ConfigError(
        "EffectiveRoundsSession requires mechanism=effective-rounds");
  }
  const std::size_t n = dataset_.size();
  const double gate = 1156.0 * config_.r * std::log(12.0 / config_.beta) /
                      (config_.tau * config_.tau);
  if (static_cast<double>(n) < gate) {
    throw DatasetTooSmall("effective-rounds needs |S| >= 1156 r ln(12/beta)/tau^2 = " +
                          std::to_string(gate) + ", got " + std::to_string(n));
  }
  const Fig1Split split =
      effective_rounds_split(n, config_.r, config_.tau, config_.beta);

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  RngStream shuffle_rng = rng_.substream(0);
  for (std::size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[shuffle_rng.below(i + 1)]);
  }
  estimation_sets_.reserve(config_.r);
  for (unsigned j = 0; j < config_.r; ++j) {
    estimation_sets_.push_back(dataset_.take(
        std::span<const std::uint32_t>(order)
            .subspan(j * split.estimation_size, split.estimation_size)));
  }
  Dataset holdout = dataset_.take(std::span<const std::uint32_t>(order)
                                      .subspan(config_.r * split.estimation_size));

  OracleConfig inner;
  inner.mechanism = Mechanism::kSparseVector;
  inner.threshold = config_.tau / 4.0;
  inner.tau = config_.tau / 8.0;
  inner.beta = config_.beta / 3.0;
  inner.epsilon = config_.tau / 16.0;
  inner.r = config_.r;
  inner.m = config_.m;
  inner.noiseless = config_.noiseless;
  detector_ = std::make_unique<SparseVectorSession>(
      inner, std::move(holdout), rng_.substream(1).seed());
}

std::size_t EffectiveRoundsSession::holdout_size() const {
  return detector_->dataset().size();
}

privacy::PrivacyParams EffectiveRoundsSession::spent() const {
  // The holdout is the only privately accessed set.
  return detector_->spent();
}

OracleSession::RawAnswer EffectiveRoundsSession::answer_impl(
    const Query& query, std::optional<double>) {
  const Dataset& estimation = estimation_sets_[current_round_ - 1];
  const double estimate = empirical_mean(estimation, query);
  const std::optional<double> detector_answer =
      detector_->answer(query, estimate);
  RawAnswer raw;
  if (!detector_answer) {
    raw.value = estimate;
    raw.empirical = estimate;
    raw.note = "round " + std::to_string(current_round_);
    return raw;
  }
  ++transcript_.rounds_detected;
  raw.value = *detector_answer;
  raw.empirical = empirical_mean(detector_->dataset(), query);
  ++current_round_;
  raw.note = "fired, advanced to round " + std::to_string(current_round_);
  if (current_round_ > config_.r) {
    raw.note = "fired, round budget exhausted";
    raw.halt_after = true;
  }
  return raw;
}

std::unique_ptr<OracleSession> open_session(const OracleConfig& config,
                                            const Dataset& dataset,
                                            std::uint64_t seed) {
  config.validate();
  switch (config.mechanism) {
    case Mechanism::kNaive:
      return std::make_unique<NaiveSession>(config, dataset, seed);
    case Mechanism::kLaplace:
      return std::make_unique<LaplaceSession>(config, dataset, seed);
    case Mechanism::kPmw:
      return std::make_unique<PmwSession>(config, dataset, seed);
    case Mechanism::kSparseVector:
      return std::make_unique<SparseVectorSession>(config, dataset, seed);
    case Mechanism::kEffectiveRounds:
      return std::make_unique<EffectiveRoundsSession>(config, dataset, seed);
  }
  throw ConfigError("unknown mechanism");
}

}  // namespace sqlab::mechanisms
