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

#include "sqlab/core/population.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "sqlab/core/error.hpp"

namespace sqlab {

namespace {
constexpr double kWeightSumTolerance = 1e-12;
}

Population Population::tabulated(const Universe& universe,
                                 std::vector<double> weights) {
  if (!universe.discrete()) {
    throw UniverseMismatch("tabulated populations need a discrete universe");
  }
  if (weights.size() != universe.size()) {
    throw InvalidArgument("weight vector length differs from universe size");
  }
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw InvalidArgument("population weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > kWeightSumTolerance) {
    throw InvalidArgument("population weights must sum to 1 within 1e-12");
  }
  Population p(PopulationKind::kTabulated, universe);
  p.cumulative_.resize(weights.size());
  double run = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    run += weights[i];
    p.cumulative_[i] = run;
  }
  p.cumulative_.back() = 1.0;
  p.weights_ = std::move(weights);
  return p;
}

Population Population::uniform(const Universe& universe) {
  if (!universe.tabulatable()) {
    throw UniverseNotTabulatable("uniform weights need a tabulatable universe");
  }
  const std::uint64_t n = universe.size();
  return tabulated(universe,
                   std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

Population Population::bernoulli_product(std::vector<double> biases) {
  if (biases.empty()) throw InvalidArgument("bernoulli product needs d >= 1");
  for (double b : biases) {
    if (!(b >= 0.0 && b <= 1.0)) {
      throw InvalidArgument("bernoulli biases must lie in [0,1]");
    }
  }
  Universe u = Universe::bit_vectors(static_cast<unsigned>(biases.size()));
  Population p(PopulationKind::kBernoulliProduct, u);
  p.biases_ = std::move(biases);
  return p;
}

Population Population::gaussian_product(unsigned dim) {
  return Population(PopulationKind::kGaussianProduct,
                    Universe::real_vectors(dim));
}

std::uint64_t Population::sample_code(RngStream& rng) const {
  switch (kind_) {
    case PopulationKind::kTabulated: {
      const double u = rng.uniform();
      const auto it =
          std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
      return static_cast<std::uint64_t>(
          std::min<std::ptrdiff_t>(it - cumulative_.begin(),
                                   cumulative_.size() - 1));
    }
    case PopulationKind::kBernoulliProduct: {
      std::uint64_t code = 0;
      for (std::size_t i = 0; i < biases_.size(); ++i) {
        if (rng.uniform() < biases_[i]) code |= std::uint64_t{1} << i;
      }
      return code;
    }
    default:
      throw WrongPopulationKind("gaussian populations have no discrete codes");
  }
}

void Population::sample_real(RngStream& rng, double* out) const {
  if (kind_ != PopulationKind::kGaussianProduct) {
    throw WrongPopulationKind("sample_real requires a gaussian population");
  }
  const unsigned d = universe_.dim();
  for (unsigned i = 0; i < d; ++i) out[i] = rng.gaussian();
}

Dataset Population::sample(std::size_t n, RngStream& rng) const {
  if (n == 0) throw InvalidArgument("sample_dataset needs n >= 1");
  if (kind_ == PopulationKind::kGaussianProduct) {
    const unsigned d = universe_.dim();
    std::vector<double> xs(n * static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < n; ++i) sample_real(rng, xs.data() + i * d);
    return Dataset::from_reals(universe_, std::move(xs), n);
  }
  std::vector<std::uint64_t> codes(n);
  for (std::size_t i = 0; i < n; ++i) codes[i] = sample_code(rng);
  return Dataset::from_codes(universe_, std::move(codes));
}

Dataset sample_dataset(const Population& population, std::size_t n,
                       std::uint64_t seed) {
  RngStream rng(seed);
  return population.sample(n, rng);
}

double true_expectation(const Population& population, const Query& query) {
  switch (population.kind()) {
    case PopulationKind::kTabulated: {
      const Universe& u = population.universe();
      if (query.tabulated() && query.table_size() != u.size()) {
        throw UniverseMismatch("query table does not match the population");
      }
      const auto& w = population.weights();
      CompensatedSum sum;
      PointView p{u.kind(), 0, {}};
      for (std::uint64_t x = 0; x < w.size(); ++x) {
        if (w[x] == 0.0) continue;
        p.code = x;
        sum.add(w[x] * query.value(p));
      }
      return sum.value();
    }
    case PopulationKind::kBernoulliProduct: {
      const Universe& u = population.universe();
      if (!u.tabulatable()) {
        throw EnumerationTooLarge("bernoulli product with 2^d > 2^20");
      }
      const auto& biases = population.biases();
      const unsigned d = static_cast<unsigned>(biases.size());
      CompensatedSum sum;
      PointView p{u.kind(), 0, {}};
      for (std::uint64_t x = 0; x < (std::uint64_t{1} << d); ++x) {
        double wx = 1.0;
        for (unsigned i = 0; i < d; ++i) {
          wx *= ((x >> i) & 1u) ? biases[i] : 1.0 - biases[i];
        }
        if (wx == 0.0) continue;
        p.code = x;
        sum.add(wx * query.value(p));
      }
      return sum.value();
    }
    default:
      throw GaussianNeedsMonteCarlo(
          "use monte_carlo_expectation for gaussian populations");
  }
}

MonteCarloEstimate monte_carlo_expectation(const Population& population,
                                           const Query& query,
                                           std::size_t trials,
                                           std::uint64_t seed) {
  if (trials < 100) throw InvalidArgument("monte carlo needs trials >= 100");
  RngStream rng(seed);
  CompensatedSum sum;
  CompensatedSum sum_sq;
  std::vector<double> scratch;
  PointView p{population.universe().kind(), 0, {}};
  const bool gaussian = population.kind() == PopulationKind::kGaussianProduct;
  if (gaussian) {
    scratch.resize(population.universe().dim());
    p.reals = std::span<const double>(scratch.data(), scratch.size());
  }
  for (std::size_t t = 0; t < trials; ++t) {
    if (gaussian) {
      population.sample_real(rng, scratch.data());
    } else {
      p.code = population.sample_code(rng);
    }
    const double v = query.value(p);
    sum.add(v);
    sum_sq.add(v * v);
  }
  const double n = static_cast<double>(trials);
  MonteCarloEstimate est;
  est.trials = trials;
  est.estimate = sum.value() / n;
  const double var =
      std::max(0.0, (sum_sq.value() - n * est.estimate * est.estimate) /
                        (n - 1.0));
  est.std_error = std::sqrt(var / n);
  return est;
}

}  // namespace sqlab
