// Copyright 2026 The btsimp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace btsimp {

// Seeded, platform-independent random stream.
//
// Algorithm (fixed): std::mt19937_64 seeded through std::seed_seq with the
// four 32-bit words {seed_lo, seed_hi, stream_lo, stream_hi}. Both are fully
// specified by the standard, and all derived draws below use only raw engine
// output, so sequences are identical across standard libraries.
class RandomSource {
 public:
  RandomSource(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform on {0, ..., n-1}; n must be positive. Unbiased by rejection.
  std::size_t uniform_index(std::size_t n);

  bool bernoulli(double p) { return uniform() < p; }

  // Fisher-Yates, drawing indices from the back.
  template <class T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
};

inline RandomSource make_rng(std::uint64_t seed, std::uint64_t stream) {
  return RandomSource(seed, stream);
}

// Stream assignment per pipeline component, so that the number of draws made
// by one component never shifts another component's sequence.
enum class StreamKind : std::uint32_t {
  init = 1,
  noise = 2,
  sampling = 3,
  data_order = 4,
  synthdata = 5,
  supervision = 6,
};

inline std::uint64_t stream_id(StreamKind kind, std::uint32_t index = 0) {
  return (static_cast<std::uint64_t>(kind) << 32) | index;
}

}  // namespace btsimp
