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

#include "qcqmc/qsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qcqmc::qsim {

namespace {

void check_targets(const StateVector& s, std::initializer_list<int> qs) {
  uint64_t seen = 0;
  for (int q : qs) {
    if (q < 0 || q >= s.n_qubits) throw std::invalid_argument("qsim: qubit index out of range");
    if (seen >> q & 1) throw std::invalid_argument("qsim: duplicate target qubit");
    seen |= 1ull << q;
  }
}

}  // namespace

StateVector StateVector::vacuum(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 24)
    throw std::invalid_argument("qsim: qubit count must be between 1 and 24");
  StateVector s;
  s.n_qubits = n_qubits;
  s.amp = Vector::Zero(1ull << n_qubits);
  s.amp(0) = 1.0;
  return s;
}

void apply_h(StateVector& s, int q) {
  check_targets(s, {q});
  const uint64_t bit = 1ull << q;
  const double inv = 1.0 / std::sqrt(2.0);
  for (uint64_t x = 0; x < s.dim(); ++x) {
    if (x & bit) continue;
    const cdouble a = s.amp(x), b = s.amp(x | bit);
    s.amp(x) = inv * (a + b);
    s.amp(x | bit) = inv * (a - b);
  }
}

void apply_x(StateVector& s, int q) {
  check_targets(s, {q});
  const uint64_t bit = 1ull << q;
  for (uint64_t x = 0; x < s.dim(); ++x)
    if (!(x & bit)) std::swap(s.amp(x), s.amp(x | bit));
}

void apply_p(StateVector& s, int q) {
  check_targets(s, {q});
  const uint64_t bit = 1ull << q;
  for (uint64_t x = 0; x < s.dim(); ++x)
    if (x & bit) s.amp(x) *= cdouble(0.0, 1.0);
}

void apply_z(StateVector& s, int q) {
  check_targets(s, {q});
  const uint64_t bit = 1ull << q;
  for (uint64_t x = 0; x < s.dim(); ++x)
    if (x & bit) s.amp(x) = -s.amp(x);
}

void apply_cnot(StateVector& s, int control, int target) {
  check_targets(s, {control, target});
  const uint64_t cb = 1ull << control, tb = 1ull << target;
  for (uint64_t x = 0; x < s.dim(); ++x)
    if ((x & cb) && !(x & tb)) std::swap(s.amp(x), s.amp(x | tb));
}

void apply_cz(StateVector& s, int a, int b) {
  check_targets(s, {a, b});
  const uint64_t mask = (1ull << a) | (1ull << b);
  for (uint64_t x = 0; x < s.dim(); ++x)
    if ((x & mask) == mask) s.amp(x) = -s.amp(x);
}

void apply_swap(StateVector& s, int a, int b) {
  check_targets(s, {a, b});
  const uint64_t ab = 1ull << a, bb = 1ull << b;
  for (uint64_t x = 0; x < s.dim(); ++x)
    if ((x & ab) && !(x & bb)) std::swap(s.amp(x), s.amp((x ^ ab) | bb));
}

void apply_givens_xxyy(StateVector& s, int a, int b, double theta) {
  check_targets(s, {a, b});
  const uint64_t ab = 1ull << a, bb = 1ull << b;
  const double c = std::cos(theta);
  const cdouble is = cdouble(0.0, std::sin(theta));
  for (uint64_t x = 0; x < s.dim(); ++x) {
    if (!(x & ab) || (x & bb)) continue;  // enumerate the |a=1,b=0> member
    const uint64_t y = (x ^ ab) | bb;
    const cdouble va = s.amp(x), vb = s.amp(y);
    s.amp(x) = c * va + is * vb;
    s.amp(y) = is * va + c * vb;
  }
}

void apply_cphase(StateVector& s, int a, int b, double theta) {
  check_targets(s, {a, b});
  const uint64_t mask = (1ull << a) | (1ull << b);
  const cdouble ph = std::polar(1.0, theta);
  for (uint64_t x = 0; x < s.dim(); ++x)
    if ((x & mask) == mask) s.amp(x) *= ph;
}

void apply_controlled_ry(StateVector& s, int control, int target, double theta) {
  check_targets(s, {control, target});
  const uint64_t cb = 1ull << control, tb = 1ull << target;
  const double c = std::cos(theta / 2), sn = std::sin(theta / 2);
  for (uint64_t x = 0; x < s.dim(); ++x) {
    if (!(x & cb) || (x & tb)) continue;
    const cdouble v0 = s.amp(x), v1 = s.amp(x | tb);
    s.amp(x) = c * v0 - sn * v1;
    s.amp(x | tb) = sn * v0 + c * v1;
  }
}

void apply_fermionic_givens(StateVector& s, int mode_i, int mode_j, double theta) {
  check_targets(s, {mode_i, mode_j});
  const int lo = std::min(mode_i, mode_j), hi = std::max(mode_i, mode_j);
  const uint64_t ib = 1ull << mode_i, jb = 1ull << mode_j;
  const uint64_t string = ((1ull << hi) - 1) & ~((1ull << (lo + 1)) - 1);
  const double c = std::cos(theta), sn = std::sin(theta);
  for (uint64_t x = 0; x < s.dim(); ++x) {
    if (!(x & ib) || (x & jb)) continue;  // |n_i=1, n_j=0> member of the pair
    const uint64_t y = (x ^ ib) | jb;
    const double parity = (std::popcount(x & string) & 1) ? -1.0 : 1.0;
    const cdouble vi = s.amp(x), vj = s.amp(y);
    // Generator G: |n_j=1> -> parity |n_i=1>, |n_i=1> -> -parity |n_j=1>.
    s.amp(x) = c * vi + parity * sn * vj;
    s.amp(y) = -parity * sn * vi + c * vj;
  }
}

void apply_density_phase(StateVector& s, int mode_i, int mode_j, double theta) {
  apply_cphase(s, mode_i, mode_j, theta);
}

cdouble amplitude(const StateVector& s, uint64_t bits) {
  if (bits >= s.dim()) throw std::invalid_argument("qsim: bitstring out of range");
  return s.amp(bits);
}

uint64_t sample_measurement(const StateVector& s, const NoiseModel& noise, RngStream& rng) {
  return sample_measurements(s, noise, rng, 1)[0];
}

std::vector<uint64_t> sample_measurements(const StateVector& s, const NoiseModel& noise,
                                          RngStream& rng, int count) {
  std::vector<double> cdf(s.dim());
  double acc = 0.0;
  for (uint64_t x = 0; x < s.dim(); ++x) {
    acc += std::norm(s.amp(x));
    cdf[x] = acc;
  }
  const uint64_t mask = s.dim() - 1;
  std::vector<uint64_t> out(count);
  for (int k = 0; k < count; ++k) {
    if (noise.depolarizing_p > 0.0 && rng.next_double() < noise.depolarizing_p) {
      out[k] = rng.next_u64() & mask;
      continue;
    }
    const double u = rng.next_double() * acc;
    out[k] = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
  }
  return out;
}

}  // namespace qcqmc::qsim
