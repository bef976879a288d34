/* Copyright 2026 The tdconv Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <cstdint>

namespace tdconv {

// xorshift64* generator. The output stream depends only on the seed, so
// fixtures built from it are bit-identical on every platform.
//
// The seed is passed through one splitmix64 step so that small consecutive
// seeds give unrelated streams and seed 0 does not produce the all-zero
// state that xorshift cannot leave.
class Xorshift64 {
 public:
  explicit Xorshift64(std::uint64_t seed) : state_(splitmix64(seed)) {
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ull;
  }

  std::uint64_t next_u64() {
    state_ ^= state_ >> 12;
    state_ ^= state_ << 25;
    state_ ^= state_ >> 27;
    return state_ * 0x2545F4914F6CDD1Dull;
  }

  // Uniform on [-1, 1) with 24 bits of resolution. Every value is exactly
  // representable as a float: k * 2^-23 - 1 for k in [0, 2^24).
  float uniform_pm1() {
    const auto k = static_cast<std::uint32_t>(next_u64() >> 40);
    return static_cast<float>(static_cast<double>(k) * 0x1.0p-23 - 1.0);
  }

  // Uniform integer in [lo, hi], inclusive. Modulo bias is irrelevant for
  // the small ranges the fixture generators ask for.
  std::uint64_t uniform_int(std::uint64_t lo, std::uint64_t hi) {
    return lo + next_u64() % (hi - lo + 1);
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t state_;
};

}  // namespace tdconv
