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

#include <cstdint>
#include <vector>

#include "qcqmc/rng.hpp"
#include "qcqmc/types.hpp"

namespace qcqmc::qsim {

// Dense statevector. Bit q of a basis index is qubit q; under Jordan-Wigner,
// qubit q is fermionic mode q with up-spin spatial orbitals mapped to modes
// 0..n_orb-1 and down-spin to n_orb..2n_orb-1 (docs/conventions.md).
struct StateVector {
  int n_qubits = 0;
  Vector amp;

  static StateVector vacuum(int n_qubits);
  std::size_t dim() const { return amp.size(); }
};

struct NoiseModel {
  double depolarizing_p = 0.0;
};

void apply_h(StateVector& s, int q);
void apply_x(StateVector& s, int q);
void apply_p(StateVector& s, int q);  // phase gate S = diag(1, i)
void apply_z(StateVector& s, int q);
void apply_cnot(StateVector& s, int control, int target);
void apply_cz(StateVector& s, int a, int b);
void apply_swap(StateVector& s, int a, int b);
// exp(i theta (XX + YY) / 2) on the two targets.
void apply_givens_xxyy(StateVector& s, int a, int b, double theta);
// Controlled phase diag(1, 1, 1, e^{i theta}).
void apply_cphase(StateVector& s, int a, int b, double theta);
// Ry(theta) on target when control is set; used by trial preparation.
void apply_controlled_ry(StateVector& s, int control, int target, double theta);
// Fermionic rotation exp(theta (a^dag_i a_j - a^dag_j a_i)) with the exact
// Jordan-Wigner parity string between the two modes.
void apply_fermionic_givens(StateVector& s, int mode_i, int mode_j, double theta);
// Fermionic density-density phase exp(i theta n_i n_j) (diagonal, string-free).
void apply_density_phase(StateVector& s, int mode_i, int mode_j, double theta);

cdouble amplitude(const StateVector& s, uint64_t bits);

// One computational-basis sample: with probability 1-p Born sampling, with
// probability p a uniform bitstring (global depolarizing channel applied at
// measurement).
uint64_t sample_measurement(const StateVector& s, const NoiseModel& noise, RngStream& rng);
std::vector<uint64_t> sample_measurements(const StateVector& s, const NoiseModel& noise,
                                          RngStream& rng, int count);

}  // namespace qcqmc::qsim
