// Copyright 2026 The qcqmc Authors.
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

#pragma once

#include <cmath>
#include <cstdint>

namespace qcqmc {

// Counter-based random stream. Every consumer derives its own stream key from
// the master seed plus structural indices (step, walker slot, clifford index,
// ...), so draws are independent of thread scheduling and results are
// reproducible bit-for-bit at any thread count.
class RngStream {
 public:
  explicit RngStream(uint64_t key) : key_(key) {}

  static uint64_t mix(uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Hash-combine structural indices into a derived stream key.
  static uint64_t derive(uint64_t key, uint64_t salt) {
    return mix(key ^ mix(salt + 0x632be59bd9b4e019ull));
  }
  template <typename... Rest>
  static uint64_t derive(uint64_t key, uint64_t salt, Rest... rest) {
    return derive(derive(key, salt), rest...);
  }

  uint64_t next_u64() { return mix(key_ + counter_++ * 0xd1342543de82ef95ull); }

  // Uniform in (0,1); never returns 0 so logs are safe.
  double next_double() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_double_in(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  uint64_t next_below(uint64_t n) { return next_u64() % n; }

  // Box-Muller; two uniforms per draw keeps the stream position
  // schedule-independent (no cached spare).
  double next_normal() {
    const double u1 = next_double();
    const double u2 = next_double();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

 private:
  uint64_t key_;
  uint64_t counter_ = 0;
};

}  // namespace qcqmc
