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

#ifndef SQLAB_CORE_QUERY_HPP_
#define SQLAB_CORE_QUERY_HPP_

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "sqlab/core/universe.hpp"

namespace sqlab {

// A statistical query: a [0,1]-valued function on the universe, in either
// evaluable (callback) or tabulated (dense values over X) form. Binary
// tabulated queries may be stored bit-packed; they behave exactly like a
// dense {0,1} table.
class Query {
 public:
  using Fn = std::function<double(const PointView&)>;

  static Query from_function(std::string id, Fn fn);
  static Query from_table(std::string id, std::vector<double> values);
  // values[i] = bit i of `bits`; size is the universe size.
  static Query from_bits(std::string id, std::vector<std::uint64_t> bits,
                         std::uint64_t size);
  static Query constant(std::string id, double value);

  const std::string& id() const { return id_; }

  // True when the query carries explicit per-element values.
  bool tabulated() const { return form_ != Form::kEvaluable; }

  // Element count of the value table (tabulated forms only).
  std::uint64_t table_size() const;

  double value(const PointView& point) const;

  // Value at a discrete code; valid for tabulated forms.
  double value_at(std::uint64_t code) const;

  // Dense value table over a discrete universe. Evaluable queries are
  // evaluated pointwise; the universe must be tabulatable.
  std::vector<double> tabulate(const Universe& universe) const;

 private:
  enum class Form { kEvaluable, kTabulated, kPackedBits };

  Query(std::string id, Form form) : id_(std::move(id)), form_(form) {}

  std::string id_;
  Form form_;
  Fn fn_;
  std::shared_ptr<const std::vector<double>> values_;
  std::shared_ptr<const std::vector<std::uint64_t>> bits_;
  std::uint64_t bit_size_ = 0;
};

}  // namespace sqlab

#endif  // SQLAB_CORE_QUERY_HPP_
