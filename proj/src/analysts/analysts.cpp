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

#include "sqlab/analysts/analysts.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include "sqlab/core/error.hpp"

namespace sqlab::analysts {

namespace {

std::string seq_id(const char* prefix, std::size_t i) {
  return std::string(prefix) + "-" + std::to_string(i);
}

std::vector<std::uint64_t> random_bits(RngStream& rng, std::uint64_t size) {
  std::vector<std::uint64_t> words((size + 63) / 64);
  for (auto& w : words) w = rng();
  return words;
}

double truncate_rescale(double raw, double B) {
  return std::clamp(raw, -B, B) / (2.0 * B) + 0.5;
}

}  // namespace

double truncation_level(unsigned d, std::size_t n) {
  return 4.0 * std::sqrt(std::log(static_cast<double>(d) *
                                  static_cast<double>(n)));
}

// ---------------------------------------------------------------------------
// NonAdaptiveRandomAnalyst

NonAdaptiveRandomAnalyst::NonAdaptiveRandomAnalyst(std::size_t m,
                                                   const Universe& universe,
                                                   RngStream rng,
                                                   const Population* guess_from)
    : m_(m), universe_(universe), rng_(rng), guess_from_(guess_from) {
  if (!universe.tabulatable()) {
    throw UniverseNotTabulatable("random queries need a tabulatable universe");
  }
}

std::optional<QueryRequest> NonAdaptiveRandomAnalyst::next(
    std::span<const Exchange> history) {
  if (history.size() >= m_) return std::nullopt;
  QueryRequest req{Query::from_bits(seq_id("rand", history.size()),
                                    random_bits(rng_, universe_.size()),
                                    universe_.size()),
                   std::nullopt};
  if (guess_from_) req.guess = true_expectation(*guess_from_, req.query);
  return req;
}

// ---------------------------------------------------------------------------
// SignAggregationAnalyst

SignAggregationAnalyst::SignAggregationAnalyst(unsigned d, double truncation_B)
    : d_(d), truncation_B_(truncation_B) {
  if (d < 1) throw InvalidArgument("sign aggregation needs d >= 1");
  if (!(truncation_B > 0.0)) throw InvalidArgument("truncation level must be positive");
}

std::optional<QueryRequest> SignAggregationAnalyst::next(
    std::span<const Exchange> history) {
  const std::size_t i = history.size();
  const double B = truncation_B_;
  if (i < d_) {
    const unsigned attr = static_cast<unsigned>(i);
    return QueryRequest{
        Query::from_function(seq_id("attr", i),
                             [attr, B](const PointView& p) {
                               return truncate_rescale(p.real(attr), B);
                             }),
        std::nullopt};
  }
  if (i == d_) {
    signs_.resize(d_);
    for (unsigned j = 0; j < d_; ++j) {
      if (!history[j].answer) {
        throw InvalidArgument("sign aggregation cannot use Bottom answers");
      }
      signs_[j] = *history[j].answer >= 0.5 ? 1.0 : -1.0;
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_));
    auto direction = std::make_shared<std::vector<double>>(signs_);
    for (double& s : *direction) s *= scale;
    return QueryRequest{
        Query::from_function("aggregate",
                             [direction, B](const PointView& p) {
                               double dot = 0.0;
                               for (std::size_t j = 0; j < direction->size();
                                    ++j) {
                                 dot += (*direction)[j] * p.real(j);
                               }
                               return truncate_rescale(dot, B);
                             }),
        std::nullopt};
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// ReconstructionProbeAnalyst

ReconstructionProbeAnalyst::ReconstructionProbeAnalyst(std::size_t m_probe,
                                                       std::size_t top_count,
                                                       const Universe& universe,
                                                       RngStream rng)
    : m_probe_(m_probe), top_count_(top_count), universe_(universe), rng_(rng) {
  if (!universe.tabulatable()) {
    throw UniverseNotTabulatable("probe queries need a tabulatable universe");
  }
  if (top_count_ == 0 || top_count_ > universe.size()) {
    throw InvalidArgument("probe top_count must lie in [1, |X|]");
  }
  probe_bits_.reserve(m_probe_);
}

Query ReconstructionProbeAnalyst::build_final(
    std::span<const Exchange> history) {
  const std::uint64_t size = universe_.size();
  std::vector<std::uint32_t> coverage(size, 0);
  if (m_probe_ > 0) {
    std::vector<double> answers(m_probe_);
    for (std::size_t j = 0; j < m_probe_; ++j) {
      answers[j] = history[j].answer.value_or(0.0);
    }
    std::vector<double> sorted = answers;
    std::nth_element(sorted.begin(), sorted.begin() + m_probe_ / 2,
                     sorted.end());
    const double median = sorted[m_probe_ / 2];
    bool any_selected = false;
    for (std::size_t j = 0; j < m_probe_; ++j) {
      if (answers[j] > median) {
        any_selected = true;
        const auto& bits = probe_bits_[j];
        for (std::uint64_t x = 0; x < size; ++x) {
          coverage[x] += (bits[x >> 6] >> (x & 63)) & 1u;
        }
      }
    }
    if (!any_selected) {
      // Degenerate answers (e.g. a constant oracle): fall back to the
      // first half so the construction stays total.
      for (std::size_t j = 0; j < m_probe_ / 2; ++j) {
        const auto& bits = probe_bits_[j];
        for (std::uint64_t x = 0; x < size; ++x) {
          coverage[x] += (bits[x >> 6] >> (x & 63)) & 1u;
        }
      }
    }
  }
  std::vector<std::uint32_t> order(size);
  std::iota(order.begin(), order.end(), 0u);
  std::stable_sort(order.begin(), order.end(),
                   [&coverage](std::uint32_t a, std::uint32_t b) {
                     return coverage[a] > coverage[b];
                   });
  std::vector<std::uint64_t> final_bits((size + 63) / 64, 0);
  for (std::size_t i = 0; i < top_count_; ++i) {
    final_bits[order[i] >> 6] |= std::uint64_t{1} << (order[i] & 63);
  }
  return Query::from_bits("probe-final", std::move(final_bits), size);
}

std::optional<QueryRequest> ReconstructionProbeAnalyst::next(
    std::span<const Exchange> history) {
  if (done_) return std::nullopt;
  if (history.size() < m_probe_) {
    auto bits = random_bits(rng_, universe_.size());
    probe_bits_.push_back(bits);
    return QueryRequest{Query::from_bits(seq_id("probe", history.size()),
                                         std::move(bits), universe_.size()),
                        std::nullopt};
  }
  done_ = true;
  final_query_ = build_final(history);
  return QueryRequest{*final_query_, std::nullopt};
}

// ---------------------------------------------------------------------------
// RoundStructuredAnalyst

RoundStructuredAnalyst::RoundStructuredAnalyst(unsigned r,
                                               std::size_t queries_per_round,
                                               unsigned overfit_rounds,
                                               const Population& population,
                                               double mild_shift)
    : r_(r),
      queries_per_round_(queries_per_round),
      overfit_rounds_(overfit_rounds),
      mild_shift_(mild_shift),
      universe_(population.universe()) {
  if (queries_per_round < 2) {
    throw InvalidArgument("round-structured blocks need at least 2 queries");
  }
  if (!universe_.tabulatable()) {
    throw UniverseNotTabulatable("round-structured probes need tabulation");
  }
  if (!(mild_shift > 0.0 && mild_shift < 0.5)) {
    throw InvalidArgument("mild_shift must lie in (0, 0.5)");
  }
  const std::uint64_t size = universe_.size();
  cell_priors_.resize(size);
  for (std::uint64_t x = 0; x < size; ++x) {
    std::vector<double> table(size, 0.0);
    table[x] = 1.0;
    cell_priors_[x] =
        true_expectation(population, Query::from_table("cell", table));
  }
}

Query RoundStructuredAnalyst::boundary_query(unsigned block,
                                             std::span<const Exchange> history) {
  // The previous block's indicator answers estimate the answering set's
  // histogram; cells answering above their prior are over-represented.
  const std::uint64_t size = universe_.size();
  std::vector<double> deviation(size, 0.0);
  for (const ProbeRecord& probe : prev_block_probes_) {
    if (probe.history_index >= history.size()) continue;
    const double a = history[probe.history_index].answer.value_or(0.0);
    deviation[probe.cell] = a - cell_priors_[probe.cell];
  }
  std::vector<double> values(size);
  if (block <= overfit_rounds_) {
    for (std::uint64_t x = 0; x < size; ++x) {
      values[x] = deviation[x] > 0.0 ? 1.0 : 0.0;
    }
  } else {
    for (std::uint64_t x = 0; x < size; ++x) {
      values[x] = 0.5 + (deviation[x] > 0.0 ? mild_shift_ : -mild_shift_) / 2.0;
    }
  }
  return Query::from_table(seq_id("boundary", block), std::move(values));
}

std::optional<QueryRequest> RoundStructuredAnalyst::next(
    std::span<const Exchange> history) {
  const std::size_t total = static_cast<std::size_t>(r_ + 1) * queries_per_round_;
  if (emitted_ >= total) return std::nullopt;
  const unsigned block = static_cast<unsigned>(emitted_ / queries_per_round_);
  const std::size_t pos_in_block = emitted_ % queries_per_round_;
  if (pos_in_block == 0 && block >= 1) {
    prev_block_probes_ = std::move(cur_block_probes_);
    cur_block_probes_.clear();
    ++emitted_;
    return QueryRequest{boundary_query(block, history), std::nullopt};
  }
  const std::uint64_t size = universe_.size();
  const std::uint64_t cell = probe_cursor_++ % size;
  std::vector<std::uint64_t> bits((size + 63) / 64, 0);
  bits[cell >> 6] |= std::uint64_t{1} << (cell & 63);
  cur_block_probes_.push_back(ProbeRecord{emitted_, cell});
  ++emitted_;
  return QueryRequest{
      Query::from_bits(seq_id("cell", emitted_ - 1), std::move(bits), size),
      std::nullopt};
}

// ---------------------------------------------------------------------------
// run_analyst and the attack drivers

RunResult run_analyst(Analyst& analyst, mechanisms::OracleSession& session,
                      const Population& population,
                      const ScoringOptions& scoring) {
  RunResult result;
  std::vector<Exchange> history;
  while (true) {
    auto request = analyst.next(history);
    if (!request) break;
    std::optional<double> answer;
    try {
      answer = session.answer(request->query, request->guess);
    } catch (const SessionHalted&) {
      break;
    } catch (const FiringBudgetExhausted&) {
      break;
    } catch (const QueryBudgetExceeded&) {
      break;
    }
    result.queries.push_back(request->query);
    history.push_back(Exchange{request->query.id(), answer});
  }
  result.transcript = session.transcript();
  if (scoring.mode != ScoringMode::kOff) {
    const bool gaussian =
        population.kind() == PopulationKind::kGaussianProduct;
    const std::size_t first =
        scoring.mode == ScoringMode::kAll && !result.queries.empty()
            ? 0
            : (result.queries.empty() ? 0 : result.queries.size() - 1);
    for (std::size_t i = first; i < result.queries.size(); ++i) {
      if (gaussian) {
        if (scoring.mc_trials >= 100) {
          result.transcript.entries[i].true_expectation =
              monte_carlo_expectation(population, result.queries[i],
                                      scoring.mc_trials,
                                      derive_seed(scoring.mc_seed, i))
                  .estimate;
        }
      } else {
        result.transcript.entries[i].true_expectation =
            true_expectation(population, result.queries[i]);
      }
    }
  }
  return result;
}

SignAggregationResult sign_aggregation_attack(
    mechanisms::OracleSession& session, const Population& population,
    unsigned d, std::size_t mc_trials, std::uint64_t mc_seed) {
  if (population.kind() != PopulationKind::kGaussianProduct ||
      population.universe().dim() != d) {
    throw WrongPopulationKind(
        "sign aggregation runs against a gaussian product of dimension d");
  }
  const std::size_t n = session.dataset().size();
  const double B = truncation_level(d, n);
  SignAggregationAnalyst analyst(d, B);
  ScoringOptions scoring;
  scoring.mode = ScoringMode::kOff;
  RunResult run = run_analyst(analyst, session, population, scoring);
  if (run.transcript.entries.size() != d + 1) {
    throw Error("sign aggregation did not reach its final query");
  }
  SignAggregationResult out;
  out.truncation_B = B;
  out.transcript = std::move(run.transcript);
  const auto& final_entry = out.transcript.entries.back();
  out.reported_rescaled = final_entry.answer.value_or(0.5);
  out.reported_unrescaled = (out.reported_rescaled - 0.5) * 2.0 * B;
  out.expected_aggregate = std::sqrt(2.0 * static_cast<double>(d) /
                                     (M_PI * static_cast<double>(n)));
  // Truncation bias is measured on the un-rescaled truncated query, not
  // assumed away.
  const Query& final_query = run.queries.back();
  const auto mc =
      monte_carlo_expectation(population, final_query,
                              std::max<std::size_t>(mc_trials, 100), mc_seed);
  out.true_estimate = (mc.estimate - 0.5) * 2.0 * B;
  out.true_std_error = mc.std_error * 2.0 * B;
  out.transcript.entries.back().true_expectation = mc.estimate;
  return out;
}

ReconstructionProbeResult reconstruction_probe(
    mechanisms::OracleSession& session, const Population& population,
    std::size_t m_probe, std::uint64_t strategy_seed,
    std::size_t top_count) {
  const Universe& universe = population.universe();
  const std::size_t n = session.dataset().size();
  if (!universe.discrete()) {
    throw UniverseTooSmall("reconstruction probe needs a discrete universe");
  }
  if (top_count == 0) {
    if (universe.size() < 2 * n) {
      throw UniverseTooSmall("reconstruction probe requires |X| >= 2n");
    }
    top_count = n;
  }
  ReconstructionProbeAnalyst analyst(m_probe, top_count, universe,
                                     RngStream(strategy_seed));
  ScoringOptions scoring;
  scoring.mode = ScoringMode::kOff;
  RunResult run = run_analyst(analyst, session, population, scoring);
  if (run.queries.size() != m_probe + 1) {
    throw Error("probe did not reach its final query");
  }
  const Query& final_query = run.queries.back();
  ReconstructionProbeResult out;
  out.reported = run.transcript.entries.back().answer.value_or(0.0);
  out.true_value = true_expectation(population, final_query);
  out.empirical_full = empirical_mean(session.dataset(), final_query);
  out.gap_reported = std::abs(out.reported - out.true_value);
  out.gap_empirical = std::abs(out.empirical_full - out.true_value);
  run.transcript.entries.back().true_expectation = out.true_value;
  out.transcript = std::move(run.transcript);
  return out;
}

StrategySpec::Kind StrategySpec::parse_kind(const std::string& name) {
  if (name == "non-adaptive-random") return Kind::kNonAdaptiveRandom;
  if (name == "sign-aggregation") return Kind::kSignAggregation;
  if (name == "reconstruction-probe") return Kind::kReconstructionProbe;
  if (name == "round-structured") return Kind::kRoundStructured;
  throw ConfigError("unknown strategy: " + name);
}

std::string StrategySpec::kind_name() const {
  switch (kind) {
    case Kind::kNonAdaptiveRandom:
      return "non-adaptive-random";
    case Kind::kSignAggregation:
      return "sign-aggregation";
    case Kind::kReconstructionProbe:
      return "reconstruction-probe";
    case Kind::kRoundStructured:
      return "round-structured";
  }
  return "unknown";
}

std::unique_ptr<Analyst> make_analyst(const StrategySpec& spec,
                                      const Population& population,
                                      std::size_t dataset_size,
                                      RngStream rng) {
  switch (spec.kind) {
    case StrategySpec::Kind::kNonAdaptiveRandom:
      return std::make_unique<NonAdaptiveRandomAnalyst>(
          spec.m, population.universe(), rng,
          spec.guess_from_population ? &population : nullptr);
    case StrategySpec::Kind::kSignAggregation:
      if (population.kind() != PopulationKind::kGaussianProduct ||
          population.universe().dim() != spec.d) {
        throw WrongPopulationKind(
            "sign aggregation needs a gaussian product population of "
            "matching dimension");
      }
      return std::make_unique<SignAggregationAnalyst>(
          spec.d, truncation_level(spec.d, dataset_size));
    case StrategySpec::Kind::kReconstructionProbe: {
      std::size_t top = spec.top_count;
      if (top == 0) {
        top = std::min<std::size_t>(dataset_size,
                                    population.universe().size() / 2);
      }
      return std::make_unique<ReconstructionProbeAnalyst>(
          spec.m, top, population.universe(), rng);
    }
    case StrategySpec::Kind::kRoundStructured:
      return std::make_unique<RoundStructuredAnalyst>(
          spec.r, spec.queries_per_round, spec.overfit_rounds, population);
  }
  throw ConfigError("unknown strategy kind");
}

}  // namespace sqlab::analysts
