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

#ifndef SQLAB_MECHANISMS_ORACLE_HPP_
#define SQLAB_MECHANISMS_ORACLE_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sqlab/core/dataset.hpp"
#include "sqlab/core/query.hpp"
#include "sqlab/core/rng.hpp"
#include "sqlab/core/transcript.hpp"
#include "sqlab/privacy/privacy.hpp"

namespace sqlab::mechanisms {

enum class Mechanism { kNaive, kLaplace, kPmw, kSparseVector, kEffectiveRounds };

std::string mechanism_name(Mechanism m);
Mechanism mechanism_from_name(const std::string& name);

struct OracleConfig {
  Mechanism mechanism = Mechanism::kNaive;
  double tau = 0.1;    // tolerance
  double beta = 0.05;  // per-query failure probability
  std::uint64_t m = 1000;  // query budget
  double epsilon = 0.0;    // total privacy budget (0 is valid for naive)
  double delta = 0.0;      // approximate-DP budget; 0 selects pure accounting
  unsigned r = 1;          // firing / adaptivity-round budget
  double threshold = 0.25;  // sparse-vector threshold T
  bool noiseless = false;   // test mode: all noise suppressed
  bool clamp = false;       // clamp released answers into [0,1]
  // Multiplicative-weights overrides; 0 derives eta = tau/8, T = tau/2.
  double pmw_eta = 0.0;
  double pmw_threshold = 0.0;

  void validate() const;

  // Flat key=value block, one key per line.
  std::string to_text() const;
  static OracleConfig from_text(const std::string& text);
};

// A stateful oracle answering adaptively chosen statistical queries.
// Sessions are strictly sequential and single-owner; distinct sessions are
// independent. The transcript records every exchange.
class OracleSession {
 public:
  virtual ~OracleSession() = default;

  OracleSession(const OracleSession&) = delete;
  OracleSession& operator=(const OracleSession&) = delete;

  // Answers one query; nullopt is the sparse vector's Bottom. The guess is
  // required by sparse-vector sessions and ignored elsewhere. Throws
  // SessionHalted / QueryBudgetExceeded when no more queries are accepted.
  std::optional<double> answer(const Query& query,
                               std::optional<double> guess = std::nullopt);

  const OracleConfig& config() const { return config_; }
  const Transcript& transcript() const { return transcript_; }
  Transcript& mutable_transcript() { return transcript_; }
  const Dataset& dataset() const { return dataset_; }
  bool halted() const { return halted_; }
  const std::string& halt_reason() const { return halt_reason_; }

  // Privacy spent so far under the session's composition policy.
  virtual privacy::PrivacyParams spent() const;

 protected:
  struct RawAnswer {
    std::optional<double> value;
    double empirical = 0.0;  // on the set that produced the answer
    std::string note;
    bool halt_after = false;  // answer delivered, then the session stops
  };

  OracleSession(const OracleConfig& config, Dataset dataset,
                std::uint64_t seed);

  virtual RawAnswer answer_impl(const Query& query,
                                std::optional<double> guess) = 0;

  void halt(const std::string& reason);

  OracleConfig config_;
  Dataset dataset_;
  RngStream rng_;
  privacy::BudgetLedger ledger_;
  Transcript transcript_;
  bool halted_ = false;
  std::string halt_reason_;
};

class NaiveSession final : public OracleSession {
 public:
  NaiveSession(const OracleConfig& config, Dataset dataset,
               std::uint64_t seed);

 private:
  RawAnswer answer_impl(const Query& query,
                        std::optional<double> guess) override;
};

class LaplaceSession final : public OracleSession {
 public:
  LaplaceSession(const OracleConfig& config, Dataset dataset,
                 std::uint64_t seed);

  // Fixed at open: m/(n eps) under pure accounting, 1/(n eps_i) with
  // eps_i = eps / (2 sqrt(2 m ln(1/delta))) under advanced composition.
  double noise_scale() const { return scale_; }
  double per_query_epsilon() const { return per_query_epsilon_; }

 private:
  RawAnswer answer_impl(const Query& query,
                        std::optional<double> guess) override;

  double scale_ = 0.0;
  double per_query_epsilon_ = 0.0;
};

class PmwSession final : public OracleSession {
 public:
  PmwSession(const OracleConfig& config, Dataset dataset, std::uint64_t seed);

  const std::vector<double>& weights() const { return weights_; }
  unsigned hard_updates() const { return hard_updates_; }
  unsigned hard_update_cap() const { return hard_update_cap_; }
  double synthetic_mean(const Query& query) const;
  double eta() const { return eta_; }
  double update_threshold() const { return update_threshold_; }
  double noise_scale() const { return scale_; }

 private:
  RawAnswer answer_impl(const Query& query,
                        std::optional<double> guess) override;

  std::vector<double> weights_;
  unsigned hard_updates_ = 0;
  unsigned hard_update_cap_ = 0;
  double eta_ = 0.0;
  double update_threshold_ = 0.0;
  double per_update_epsilon_ = 0.0;
  double scale_ = 0.0;
};

// NumericSparse: numeric answers only when the noisy guess error clears
// the threshold; everything below comes back as Bottom.
class SparseVectorSession final : public OracleSession {
 public:
  SparseVectorSession(const OracleConfig& config, Dataset dataset,
                      std::uint64_t seed);

  unsigned remaining_firings() const { return remaining_firings_; }
  double test_noise_scale() const { return test_scale_; }
  double answer_noise_scale() const { return answer_scale_; }

 private:
  RawAnswer answer_impl(const Query& query,
                        std::optional<double> guess) override;
  void resample_threshold();

  unsigned remaining_firings_ = 0;
  double threshold_scale_ = 0.0;
  double test_scale_ = 0.0;
  double answer_scale_ = 0.0;
  double noisy_threshold_ = 0.0;
};

struct Fig1Split {
  std::size_t estimation_size = 0;  // each of the r estimation sets
  std::size_t holdout_size = 0;     // everything else
};

// ceil(4 ln(12/beta)/tau^2) per estimation set, remainder to the holdout.
// Pure arithmetic; open_session additionally enforces the size gate
// |S| >= 1156 r ln(12/beta)/tau^2.
Fig1Split effective_rounds_split(std::size_t n, unsigned r, double tau,
                                 double beta);

// Answers from per-round estimation sets, advancing to the next set when
// an inner sparse-vector detector on the holdout flags the current one.
class EffectiveRoundsSession final : public OracleSession {
 public:
  EffectiveRoundsSession(const OracleConfig& config, Dataset dataset,
                         std::uint64_t seed);

  unsigned current_round() const { return current_round_; }
  const SparseVectorSession& detector() const { return *detector_; }
  std::size_t estimation_size() const { return estimation_sets_[0].size(); }
  std::size_t holdout_size() const;

  privacy::PrivacyParams spent() const override;

 private:
  RawAnswer answer_impl(const Query& query,
                        std::optional<double> guess) override;

  std::vector<Dataset> estimation_sets_;
  std::unique_ptr<SparseVectorSession> detector_;
  unsigned current_round_ = 1;  // c in [1, r]
};

// Builds the session the config asks for. EffectiveRounds performs the
// random split here; PMW initializes uniform weights over the universe.
std::unique_ptr<OracleSession> open_session(const OracleConfig& config,
                                            const Dataset& dataset,
                                            std::uint64_t seed);

}  // namespace sqlab::mechanisms

#endif  // SQLAB_MECHANISMS_ORACLE_HPP_
