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

#ifndef SQLAB_CORE_UNIVERSE_HPP_
#define SQLAB_CORE_UNIVERSE_HPP_

#include <cstdint>
#include <span>

namespace sqlab {

enum class UniverseKind { kIndexed, kBitVectors, kRealVectors };

// The domain a population and its queries live on. Discrete universes
// (indexed or bit-vector) have an explicit element count and support dense
// tabulation up to kMaxTabulated elements; real-vector universes support
// evaluable queries only.
class Universe {
 public:
  // Tabulation and the multiplicative-weights state are dense over the
  // universe, so anything larger is rejected outright.
  static constexpr std::uint64_t kMaxTabulated = std::uint64_t{1} << 20;

  static Universe indexed(std::uint64_t size);
  static Universe bit_vectors(unsigned dim);
  static Universe real_vectors(unsigned dim);

  UniverseKind kind() const { return kind_; }
  bool discrete() const { return kind_ != UniverseKind::kRealVectors; }
  bool tabulatable() const { return discrete() && size_ <= kMaxTabulated; }

  // Number of elements; invalid for real-vector universes.
  std::uint64_t size() const;

  // Vector dimension d for bit-vector and real-vector universes.
  unsigned dim() const;

  // Natural log of the element count.
  double log_size() const;

  // log|X| as the sample-size formulas read it: d for bit vectors (each
  // attribute counts as one dimension), ln(size) for indexed universes.
  double sizing_log() const;

  bool operator==(const Universe& other) const = default;

 private:
  Universe(UniverseKind kind, std::uint64_t size, unsigned dim)
      : kind_(kind), size_(size), dim_(dim) {}

  UniverseKind kind_;
  std::uint64_t size_;
  unsigned dim_;
};

// A borrowed view of one universe element. Discrete points carry their
// code (for bit vectors the code is the attribute bitmask); real-vector
// points expose their coordinates.
struct PointView {
  UniverseKind kind = UniverseKind::kIndexed;
  std::uint64_t code = 0;
  std::span<const double> reals{};

  bool bit(unsigned i) const { return (code >> i) & 1u; }
  double real(unsigned i) const { return reals[i]; }
};

}  // namespace sqlab

#endif  // SQLAB_CORE_UNIVERSE_HPP_
