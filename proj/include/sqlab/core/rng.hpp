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

#ifndef SQLAB_CORE_RNG_HPP_
#define SQLAB_CORE_RNG_HPP_

#include <array>
#include <cstdint>

namespace sqlab {

// One step of the SplitMix64 sequence; advances `state` and returns the
// next output. Used both as a standalone mixer and to seed xoshiro state.
std::uint64_t splitmix64(std::uint64_t& state);

// Deterministic (master seed, stream id) -> 64-bit sub-seed derivation.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream_id);

// Seeded random stream: xoshiro256** state initialized through SplitMix64.
// Streams derived from distinct (master, id) pairs are independent for all
// practical purposes, which is what makes seeded parallel trials safe.
// Results are bit-reproducible for a fixed seed; no libstdc++ distribution
// machinery is used anywhere.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed);
  RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  // Raw 64 uniform bits (xoshiro256** output).
  result_type operator()();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();

  // Unbiased uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  // Standard normal via the Marsaglia polar method (one spare cached).
  double gaussian();

  // Laplace(0, scale) as a difference of two unit exponentials.
  double laplace(double scale);

  // Exponential with the given mean.
  double exponential(double mean);

  // Child stream keyed off this stream's seed, independent of how much of
  // the parent has been consumed.
  RngStream substream(std::uint64_t tag) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::array<std::uint64_t, 4> state_;
  std::uint64_t seed_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Compensated (Neumaier) accumulator for long empirical sums.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + compensation_; }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
};

}  // namespace sqlab

#endif  // SQLAB_CORE_RNG_HPP_
