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

#include "sqlab/core/dataset.hpp"

#include <algorithm>
#include <string>
#include <utility>

#include "sqlab/core/error.hpp"
#include "sqlab/core/rng.hpp"

namespace sqlab {

Dataset Dataset::from_codes(const Universe& universe,
                            std::vector<std::uint64_t> codes) {
  if (!universe.discrete()) {
    throw UniverseMismatch("code datasets require a discrete universe");
  }
  if (codes.empty()) throw InvalidArgument("dataset needs n >= 1");
  const std::uint64_t size = universe.size();
  for (std::uint64_t c : codes) {
    if (c >= size) {
      throw UniverseMismatch("point " + std::to_string(c) +
                             " outside universe of size " +
                             std::to_string(size));
    }
  }
  Dataset d(universe, codes.size());
  d.codes_ =
      std::make_shared<const std::vector<std::uint64_t>>(std::move(codes));
  return d;
}

Dataset Dataset::from_reals(const Universe& universe, std::vector<double> xs,
                            std::size_t n) {
  if (universe.kind() != UniverseKind::kRealVectors) {
    throw UniverseMismatch("coordinate datasets require a real-vector universe");
  }
  if (n == 0) throw InvalidArgument("dataset needs n >= 1");
  if (xs.size() != n * universe.dim()) {
    throw InvalidArgument("coordinate block length does not match n * d");
  }
  Dataset d(universe, n);
  d.reals_ = std::make_shared<const std::vector<double>>(std::move(xs));
  return d;
}

PointView Dataset::point(std::size_t i) const {
  PointView p;
  p.kind = universe_.kind();
  if (codes_) {
    p.code = (*codes_)[i];
  } else {
    const unsigned d = universe_.dim();
    p.reals = std::span<const double>(reals_->data() + i * d, d);
  }
  return p;
}

std::span<const std::uint64_t> Dataset::codes() const {
  if (!codes_) throw UniverseMismatch("real-vector dataset has no codes");
  return *codes_;
}

const Histogram& Dataset::histogram() const {
  if (!universe_.tabulatable()) {
    throw UniverseNotTabulatable("histogram requires a tabulatable universe");
  }
  if (!histogram_) {
    auto h = std::make_shared<Histogram>();
    h->n = n_;
    h->counts.assign(universe_.size(), 0.0);
    for (std::uint64_t c : *codes_) h->counts[c] += 1.0;
    for (std::uint32_t x = 0; x < h->counts.size(); ++x) {
      if (h->counts[x] > 0.0) h->support.push_back(x);
    }
    histogram_ = std::move(h);
  }
  return *histogram_;
}

Dataset Dataset::take(std::span<const std::uint32_t> rows) const {
  if (rows.empty()) throw InvalidArgument("dataset needs n >= 1");
  if (codes_) {
    std::vector<std::uint64_t> sub;
    sub.reserve(rows.size());
    for (std::uint32_t r : rows) sub.push_back((*codes_)[r]);
    return from_codes(universe_, std::move(sub));
  }
  const unsigned d = universe_.dim();
  std::vector<double> sub;
  sub.reserve(rows.size() * d);
  for (std::uint32_t r : rows) {
    const double* row = reals_->data() + static_cast<std::size_t>(r) * d;
    sub.insert(sub.end(), row, row + d);
  }
  return from_reals(universe_, std::move(sub), rows.size());
}

double empirical_mean(const Dataset& dataset, const Query& query) {
  const std::size_t n = dataset.size();
  if (query.tabulated()) {
    if (!dataset.universe().discrete() ||
        query.table_size() != dataset.universe().size()) {
      throw UniverseMismatch("query table does not match the dataset universe");
    }
    if (dataset.universe().tabulatable()) {
      const Histogram& h = dataset.histogram();
      CompensatedSum sum;
      for (std::uint32_t x : h.support) {
        sum.add(h.counts[x] * query.value_at(x));
      }
      return sum.value() / static_cast<double>(n);
    }
  }
  CompensatedSum sum;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = query.value(dataset.point(i));
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("query value outside [0,1] on dataset point");
    }
    sum.add(v);
  }
  return sum.value() / static_cast<double>(n);
}

}  // namespace sqlab
