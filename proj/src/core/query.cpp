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

#include "sqlab/core/query.hpp"

#include <utility>

#include "sqlab/core/error.hpp"

namespace sqlab {

Query Query::from_function(std::string id, Fn fn) {
  if (!fn) throw InvalidArgument("evaluable query needs a callable");
  Query q(std::move(id), Form::kEvaluable);
  q.fn_ = std::move(fn);
  return q;
}

Query Query::from_table(std::string id, std::vector<double> values) {
  if (values.empty()) throw InvalidArgument("tabulated query needs values");
  for (double v : values) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw InvalidArgument("query values must lie in [0,1]");
    }
  }
  Query q(std::move(id), Form::kTabulated);
  q.values_ = std::make_shared<const std::vector<double>>(std::move(values));
  return q;
}

Query Query::from_bits(std::string id, std::vector<std::uint64_t> bits,
                       std::uint64_t size) {
  if (size == 0 || bits.size() != (size + 63) / 64) {
    throw InvalidArgument("bit table length does not match universe size");
  }
  Query q(std::move(id), Form::kPackedBits);
  q.bits_ = std::make_shared<const std::vector<std::uint64_t>>(std::move(bits));
  q.bit_size_ = size;
  return q;
}

Query Query::constant(std::string id, double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw InvalidArgument("constant query value must lie in [0,1]");
  }
  return from_function(std::move(id),
                       [value](const PointView&) { return value; });
}

std::uint64_t Query::table_size() const {
  switch (form_) {
    case Form::kTabulated:
      return values_->size();
    case Form::kPackedBits:
      return bit_size_;
    default:
      throw InvalidArgument("evaluable queries have no value table");
  }
}

double Query::value(const PointView& point) const {
  if (form_ == Form::kEvaluable) return fn_(point);
  return value_at(point.code);
}

double Query::value_at(std::uint64_t code) const {
  switch (form_) {
    case Form::kTabulated:
      if (code >= values_->size()) {
        throw UniverseMismatch("point code outside the query's value table");
      }
      return (*values_)[code];
    case Form::kPackedBits:
      if (code >= bit_size_) {
        throw UniverseMismatch("point code outside the query's value table");
      }
      return static_cast<double>(((*bits_)[code >> 6] >> (code & 63)) & 1u);
    default:
      throw InvalidArgument("value_at requires a tabulated query");
  }
}

std::vector<double> Query::tabulate(const Universe& universe) const {
  if (!universe.tabulatable()) {
    throw UniverseNotTabulatable("universe too large or continuous");
  }
  const std::uint64_t n = universe.size();
  if (tabulated() && table_size() != n) {
    throw UniverseMismatch("query table length differs from universe size");
  }
  std::vector<double> out(n);
  if (form_ == Form::kTabulated) {
    out = *values_;
  } else if (form_ == Form::kPackedBits) {
    for (std::uint64_t x = 0; x < n; ++x) out[x] = value_at(x);
  } else {
    PointView p{universe.kind(), 0, {}};
    for (std::uint64_t x = 0; x < n; ++x) {
      p.code = x;
      const double v = fn_(p);
      if (!(v >= 0.0 && v <= 1.0)) {
        throw InvalidArgument("query value outside [0,1] at code " +
                              std::to_string(x));
      }
      out[x] = v;
    }
  }
  return out;
}

}  // namespace sqlab
