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

#ifndef SQLAB_CORE_DATASET_HPP_
#define SQLAB_CORE_DATASET_HPP_

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sqlab/core/query.hpp"
#include "sqlab/core/universe.hpp"

namespace sqlab {

// Dense counts over a discrete universe plus the sorted list of occupied
// codes. Lets empirical means of tabulated queries run over the support
// instead of over every sample.
struct Histogram {
  std::vector<double> counts;
  std::vector<std::uint32_t> support;
  std::size_t n = 0;
};

// An ordered multiset of n universe elements. Immutable once built; the
// histogram is materialized lazily and shared between copies.
class Dataset {
 public:
  static Dataset from_codes(const Universe& universe,
                            std::vector<std::uint64_t> codes);
  // Row-major n x d coordinate block.
  static Dataset from_reals(const Universe& universe, std::vector<double> xs,
                            std::size_t n);

  const Universe& universe() const { return universe_; }
  std::size_t size() const { return n_; }

  PointView point(std::size_t i) const;
  std::uint64_t code(std::size_t i) const { return (*codes_)[i]; }
  std::span<const std::uint64_t> codes() const;

  // Requires a tabulatable universe.
  const Histogram& histogram() const;

  // New dataset holding the listed rows, in order.
  Dataset take(std::span<const std::uint32_t> rows) const;

 private:
  Dataset(const Universe& universe, std::size_t n)
      : universe_(universe), n_(n) {}

  Universe universe_;
  std::size_t n_;
  std::shared_ptr<const std::vector<std::uint64_t>> codes_;
  std::shared_ptr<const std::vector<double>> reals_;
  mutable std::shared_ptr<const Histogram> histogram_;
};

// (1/n) sum of q over the dataset, with compensated accumulation.
double empirical_mean(const Dataset& dataset, const Query& query);

}  // namespace sqlab

#endif  // SQLAB_CORE_DATASET_HPP_
