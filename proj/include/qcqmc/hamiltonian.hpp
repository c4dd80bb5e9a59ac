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

#include <iosfwd>
#include <string>
#include <vector>

#include "qcqmc/types.hpp"

namespace qcqmc {

// Two-electron integrals (pq|rs) in chemists' notation over spatial orbitals,
// stored with the full 8-fold permutational symmetry compressed out.
class TwoBodyIntegrals {
 public:
  TwoBodyIntegrals() = default;
  explicit TwoBodyIntegrals(int n_orb);

  int n_orb() const { return n_orb_; }
  double operator()(int p, int q, int r, int s) const { return data_[index(p, q, r, s)]; }
  void set(int p, int q, int r, int s, double value) { data_[index(p, q, r, s)] = value; }
  std::size_t n_unique() const { return data_.size(); }
  std::size_t index(int p, int q, int r, int s) const;

 private:
  int n_orb_ = 0;
  std::vector<double> data_;
};

struct Hamiltonian {
  int n_orb = 0;
  int n_alpha = 0;
  int n_beta = 0;
  double e_core = 0.0;
  RealMatrix h1;            // n_orb x n_orb, symmetric
  TwoBodyIntegrals eri;     // (pq|rs), 8-fold symmetric
};

struct CholeskyFactors {
  std::vector<RealMatrix> vectors;  // symmetric n_orb x n_orb factors L_g
  double tol = 0.0;
};

// Molpro-convention FCIDUMP reader. 1-based indices in the file are converted
// to 0-based; symmetry-equivalent entries are filled from any listed
// representative. Throws std::runtime_error with a line number on malformed
// input, out-of-range indices, or conflicting duplicates (|dv| > 1e-10).
Hamiltonian parse_fcidump(std::istream& in);
Hamiltonian parse_fcidump_file(const std::string& path);

void write_fcidump(const Hamiltonian& ham, std::ostream& out);
void write_fcidump_file(const Hamiltonian& ham, const std::string& path);

// Pivoted Cholesky factorization of the (pq),(rs) integral matrix. Stops when
// the largest residual diagonal falls below tol; throws if a pivot dips below
// -tol ("integrals not PSD").
CholeskyFactors cholesky_factorize(const Hamiltonian& ham, double tol = 1e-8);

// Largest elementwise deviation between sum_g L_g[p,q] L_g[r,s] and (pq|rs).
double cholesky_reconstruction_error(const Hamiltonian& ham, const CholeskyFactors& chol);

// Freeze the first n_frozen_core orbitals (doubly occupied) and restrict to
// active_orbitals. The core Coulomb/exchange mean field is absorbed into h1
// and the frozen-core energy into e_core. Orbitals in neither list are
// dropped as frozen virtuals.
Hamiltonian freeze_core(const Hamiltonian& ham, const std::vector<int>& active_orbitals,
                        int n_frozen_core);

}  // namespace qcqmc
