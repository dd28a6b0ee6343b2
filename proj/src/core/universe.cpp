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

#include "sqlab/core/universe.hpp"

#include <cmath>
#include <string>

#include "sqlab/core/error.hpp"

namespace sqlab {

Universe Universe::indexed(std::uint64_t size) {
  if (size < 1) throw InvalidArgument("indexed universe needs size >= 1");
  return Universe(UniverseKind::kIndexed, size, 0);
}

Universe Universe::bit_vectors(unsigned dim) {
  if (dim < 1 || dim > 63) {
    throw InvalidArgument("bit-vector universe needs 1 <= d <= 63");
  }
  return Universe(UniverseKind::kBitVectors, std::uint64_t{1} << dim, dim);
}

Universe Universe::real_vectors(unsigned dim) {
  if (dim < 1) throw InvalidArgument("real-vector universe needs d >= 1");
  return Universe(UniverseKind::kRealVectors, 0, dim);
}

std::uint64_t Universe::size() const {
  if (!discrete()) {
    throw InvalidArgument("real-vector universes have no element count");
  }
  return size_;
}

unsigned Universe::dim() const {
  if (kind_ == UniverseKind::kIndexed) {
    throw InvalidArgument("indexed universes have no vector dimension");
  }
  return dim_;
}

double Universe::log_size() const {
  if (kind_ == UniverseKind::kBitVectors) return dim_ * std::log(2.0);
  return std::log(static_cast<double>(size()));
}

double Universe::sizing_log() const {
  if (kind_ == UniverseKind::kBitVectors) return static_cast<double>(dim_);
  return std::log(static_cast<double>(size()));
}

}  // namespace sqlab
