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

#ifndef SQLAB_CORE_POPULATION_HPP_
#define SQLAB_CORE_POPULATION_HPP_

#include <cstdint>
#include <vector>

#include "sqlab/core/dataset.hpp"
#include "sqlab/core/query.hpp"
#include "sqlab/core/rng.hpp"
#include "sqlab/core/universe.hpp"

namespace sqlab {

enum class PopulationKind { kTabulated, kBernoulliProduct, kGaussianProduct };

// A samplable distribution over a universe: an explicit weight vector over
// a discrete universe, a product of Bernoulli attributes over bit vectors,
// or the standard Gaussian product N(0,1)^d over real vectors.
class Population {
 public:
  static Population tabulated(const Universe& universe,
                              std::vector<double> weights);
  static Population uniform(const Universe& universe);
  static Population bernoulli_product(std::vector<double> biases);
  static Population gaussian_product(unsigned dim);

  PopulationKind kind() const { return kind_; }
  const Universe& universe() const { return universe_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& biases() const { return biases_; }

  // One i.i.d. draw appended to the caller's storage conventions.
  std::uint64_t sample_code(RngStream& rng) const;
  void sample_real(RngStream& rng, double* out) const;

  Dataset sample(std::size_t n, RngStream& rng) const;

 private:
  Population(PopulationKind kind, const Universe& universe)
      : kind_(kind), universe_(universe) {}

  PopulationKind kind_;
  Universe universe_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
  std::vector<double> biases_;
};

struct MonteCarloEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::size_t trials = 0;
};

// n i.i.d. draws; identical (population, n, seed) gives identical datasets.
Dataset sample_dataset(const Population& population, std::size_t n,
                       std::uint64_t seed);

// Exact expectation of the query under the population. Tabulated
// populations sum weights directly; Bernoulli products enumerate the cube
// (2^d <= 2^20, otherwise EnumerationTooLarge); Gaussian products must go
// through monte_carlo_expectation.
double true_expectation(const Population& population, const Query& query);

// Sample-mean estimate with its standard error; trials must be >= 100.
MonteCarloEstimate monte_carlo_expectation(const Population& population,
                                           const Query& query,
                                           std::size_t trials,
                                           std::uint64_t seed);

}  // namespace sqlab

#endif  // SQLAB_CORE_POPULATION_HPP_
