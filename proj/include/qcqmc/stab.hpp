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

namespace qcqmc::stab {

// Pauli encoded as i^phase X^x Z^z (bit q of x/z = qubit q). Hermitian Paulis
// have phase congruent to popcount(x & z) mod 2.
struct Pauli {
  uint64_t x = 0;
  uint64_t z = 0;
  uint8_t phase = 0;  // power of i, mod 4

  static Pauli hermitian(uint64_t x, uint64_t z, bool negative = false);
  Pauli times(const Pauli& other) const;
  bool negative_of(const Pauli& other) const;  // same bits, sign differs
  bool operator==(const Pauli& other) const = default;
};

// Clifford operator as the images U X_j U^dag and U Z_j U^dag.
struct CliffordTableau {
  int n = 0;
  std::vector<Pauli> x_image;
  std::vector<Pauli> z_image;

  static CliffordTableau identity(int n);
  // Left-multiply by an elementary gate: U <- g U.
  void left_h(int q);
  void left_p(int q);
  void left_x(int q);
  void left_z(int q);
  void left_cnot(int c, int t);
  void left_cz(int a, int b);
  void left_swap(int a, int b);

  Pauli image(const Pauli& p) const;                  // U P U^dag
  CliffordTableau compose(const CliffordTableau& rhs) const;  // this * rhs
  CliffordTableau inverse() const;
  bool check_symplectic() const;
  // Canonical byte key (used to identify group elements in tests).
  std::vector<uint8_t> key() const;
};

// Uniform over the Clifford group modulo global phase: uniform symplectic
// part via sequential symplectic-basis completion, plus uniform sign bits.
CliffordTableau sample_uniform_clifford(int n, RngStream& rng);

// Truncated measurement-equivalent form G(I, Gamma, Delta) plus the affine
// outcome relabeling of the neglected H-free factor: a U-measurement outcome
// is delta_post + Delta_post * y for a G-measurement outcome y.
struct GForm {
  int n = 0;
  uint64_t i_set = 0;                 // qubit subset I
  std::vector<uint64_t> gamma;        // symmetric bit rows on I (diagonal = P gates)
  std::vector<uint64_t> delta;        // CX edges: row i in I -> columns outside I
  std::vector<uint64_t> delta_post;   // invertible outcome matrix rows
  uint64_t delta_post_offset = 0;

  uint64_t apply_post(uint64_t y) const;  // delta_post * y + offset
  uint64_t linear_map(uint64_t x) const;  // CX-layer action on basis indices
  // Phase i^{q(x)} of the H-free part P^Gamma_d CZ^Gamma acting on |x>.
  int phase_power(uint64_t x) const;
};

GForm to_measurement_form(const CliffordTableau& u);

// Tableau of G itself (for tests and post-processing cross-checks).
CliffordTableau gform_tableau(const GForm& g);

struct Gate {
  enum class Kind { H, P, CZ, CNOT };
  Kind kind;
  int a = 0;
  int b = -1;
};

// Gates realizing G exactly (application order), with the CZ/CX content
// scheduled as a single CZ layer between Hadamard layers.
std::vector<Gate> gform_circuit(const GForm& g);

// Number of parallel two-qubit layers in a gate list.
int two_qubit_depth(const std::vector<Gate>& gates, int n);

// <beta|U^dag|b>, exact including the complex phase, in O(n^2) time.
cdouble stab_amplitude(const CliffordTableau& u, uint64_t b, uint64_t beta);

// <beta|G^dag|y> and <y|G|0> for the truncated form (the estimator kernels;
// the phases of the neglected H-free factor cancel in their product).
cdouble gform_bra_amplitude(const GForm& g, uint64_t y, uint64_t beta);
cdouble gform_ket0_amplitude(const GForm& g, uint64_t y);

// Dense matrix of the decomposed operator (test oracle; n <= 10).
Matrix dense_unitary(const CliffordTableau& u);
Matrix dense_unitary(const std::vector<Gate>& gates, int n);

}  // namespace qcqmc::stab
