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

#include "sqlab/core/rng.hpp"

#include <cmath>

#include "sqlab/core/error.hpp"

namespace sqlab {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t stream_id) {
  std::uint64_t state = master_seed ^ (stream_id * 0x9E3779B97F4A7C15ULL);
  std::uint64_t mixed = splitmix64(state);
  // One more round so that (m, 0) never collides with the raw master.
  return splitmix64(state) ^ rotl(mixed, 23);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t state = seed;
  for (auto& word : state_) word = splitmix64(state);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : RngStream(derive_seed(master_seed, stream_id)) {}

RngStream::result_type RngStream::operator()() {
  const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
  const std::uint64_t t = state_[1] << 17;
  state_[2] ^= state_[0];
  state_[3] ^= state_[1];
  state_[1] ^= state_[2];
  state_[0] ^= state_[3];
  state_[2] ^= t;
  state_[3] = rotl(state_[3], 45);
  return result;
}

double RngStream::uniform() {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  if (bound == 0) throw InvalidArgument("RngStream::below: bound must be positive");
  const std::uint64_t threshold = (0 - bound) % bound;
  std::uint64_t r;
  do {
    r = (*this)();
  } while (r < threshold);
  return r % bound;
}

double RngStream::gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double x, y, s;
  do {
    x = 2.0 * uniform() - 1.0;
    y = 2.0 * uniform() - 1.0;
    s = x * x + y * y;
  } while (s >= 1.0 || s == 0.0);
  const double m = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = y * m;
  has_spare_ = true;
  return x * m;
}

double RngStream::laplace(double scale) {
  // 1 - uniform() lies in (0, 1], so both logs are finite.
  const double e1 = -std::log(1.0 - uniform());
  const double e2 = -std::log(1.0 - uniform());
  return scale * (e1 - e2);
}

double RngStream::exponential(double mean) {
  return -mean * std::log(1.0 - uniform());
}

RngStream RngStream::substream(std::uint64_t tag) const {
  return RngStream(seed_, tag);
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    compensation_ += (sum_ - t) + v;
  } else {
    compensation_ += (v - t) + sum_;
  }
  sum_ = t;
}

}  // namespace sqlab
