// Copyright 2026 The mavg Authors. All Rights Reserved.
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
// =============================================================================

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace mavg {

// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key);

/// Identifies one independent random stream. Every (seed, learner, iteration)
/// triple maps to a disjoint slice of the Philox counter space, so the draws a
/// learner sees never depend on how learners are scheduled onto threads.
struct StreamKey {
  std::uint64_t master_seed = 0;
  std::uint32_t learner = 0;
  std::uint32_t iteration = 0;
};

/// Sequential reader over one keyed counter-based stream. Satisfies
/// UniformRandomBitGenerator, but the helpers below are preferred because the
/// standard distributions are not reproducible across library vendors.
class Stream {
 public:
  using result_type = std::uint64_t;

  explicit Stream(StreamKey key);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next_u64(); }

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n), unbiased (multiply-shift with rejection).
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via the Box-Muller transform; draws come in pairs.
  double normal();

  /// Number of 128-bit blocks consumed so far.
  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill();

  PhiloxKey key_;
  std::uint32_t learner_;
  std::uint32_t iteration_;
  std::uint64_t block_ = 0;
  PhiloxCounter buf_{};
  int pos_ = 4;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mavg
