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
#include <string>
#include <utility>

#include "qcqmc/types.hpp"

namespace qcqmc {

// Spin-blocked Slater determinant: orbital coefficients as one complex
// n_orb x n_elec matrix per spin sector. Row p is spatial orbital p; all
// occupation amplitudes follow from minors taken with rows in ascending
// orbital order (see docs/conventions.md).
struct SlaterDeterminant {
  Matrix up;  // n_orb x n_alpha
  Matrix dn;  // n_orb x n_beta

  int n_orb() const { return static_cast<int>(up.rows()); }
  int n_alpha() const { return static_cast<int>(up.cols()); }
  int n_beta() const { return static_cast<int>(dn.cols()); }

  // Identity-column determinant occupying the lowest orbitals of each spin.
  static SlaterDeterminant aufbau(int n_orb, int n_alpha, int n_beta);
  // Identity-column determinant at the given occupation masks (bit p = orbital p).
  static SlaterDeterminant from_occupation(int n_orb, uint64_t occ_up, uint64_t occ_dn);
};

struct Walker {
  SlaterDeterminant det;
  double weight = 1.0;
  cdouble overlap_cache = 0.0;  // <phi|Psi_T> under the active trial
  double log_scale = 0.0;       // accumulated orthonormalization log factors
  bool dead() const { return weight <= 0.0; }
};

// det(bra_up^dag ket_up) * det(bra_dn^dag ket_dn).
cdouble overlap(const SlaterDeterminant& bra, const SlaterDeterminant& ket);

// Per-spin G = W (T^dag W)^{-1} T^dag, so that <T|c^dag_p c_q|W>/<T|W> = G(q,p).
// Throws when the overlap matrix is singular (walker orthogonal to trial).
std::pair<Matrix, Matrix> greens_function(const SlaterDeterminant& trial,
                                          const SlaterDeterminant& walker);

// Dense matrix exponential: eigendecomposition for (near-)normal matrices,
// scaling-and-squaring Taylor otherwise.
Matrix expm(const Matrix& a);

// Blocks replaced by expm(A_sigma) * block.
SlaterDeterminant apply_exp_onebody(const SlaterDeterminant& det, const Matrix& a_up,
                                    const Matrix& a_dn);

// QR per block with the R diagonal phased to be real-positive. Returns the
// orthonormalized determinant and the real log factor such that
// overlap(bra, original) = exp(log_factor) * overlap(bra, new) for every bra.
std::pair<SlaterDeterminant, double> orthonormalize(const SlaterDeterminant& det);

// Occupation amplitude: product over spins of the minor det(block[occupied rows, :]).
cdouble det_amplitude(const SlaterDeterminant& det, uint64_t occ_up, uint64_t occ_dn);

// Minor of one spin block at the given occupation mask.
cdouble block_minor(const Matrix& block, uint64_t occ);

// Text fixture format: header "SLATER v1 n_orb n_alpha n_beta", then the up
// block and the dn block row-major as "re im" pairs.
void write_slater_file(const SlaterDeterminant& det, const std::string& path);
SlaterDeterminant read_slater_file(const std::string& path);

}  // namespace qcqmc
