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
#include <functional>
#include <vector>

#include "qcqmc/hamiltonian.hpp"
#include "qcqmc/types.hpp"

namespace qcqmc::oracle {

// Fixed-particle-number determinant basis. Masks are enumerated in ascending
// integer order (bit p = spatial orbital p); the flat index of a configuration
// is up_rank * n_dn + dn_rank.
struct SectorBasis {
  int n_orb = 0;
  int n_alpha = 0;
  int n_beta = 0;
  std::vector<uint64_t> up_masks;
  std::vector<uint64_t> dn_masks;

  static SectorBasis build(int n_orb, int n_alpha, int n_beta);
  std::size_t size() const { return up_masks.size() * dn_masks.size(); }
  std::size_t index_of(uint64_t up, uint64_t dn) const;
};

// Second-quantized two-body operator with (possibly complex) integrals per
// spin pair. Used both for the fixed molecular Hamiltonian and for the same
// operator rotated into a walker's orbital frame.
struct SpinIntegrals {
  int n_orb = 0;
  double e_core = 0.0;
  Matrix h_up, h_dn;             // hermitian one-body blocks
  std::vector<cdouble> eri_uu;   // (pq|rs), flat ((p n + q) n + r) n + s
  std::vector<cdouble> eri_ud;   // p,q up; r,s dn
  std::vector<cdouble> eri_dd;

  cdouble uu(int p, int q, int r, int s) const { return eri_uu[flat(p, q, r, s)]; }
  cdouble ud(int p, int q, int r, int s) const { return eri_ud[flat(p, q, r, s)]; }
  cdouble dd(int p, int q, int r, int s) const { return eri_dd[flat(p, q, r, s)]; }
  std::size_t flat(int p, int q, int r, int s) const {
    return ((static_cast<std::size_t>(p) * n_orb + q) * n_orb + r) * n_orb + s;
  }

  static SpinIntegrals from(const Hamiltonian& ham);
  // Integrals in the frame u_sigma^dag (orbitals = columns of u_sigma), with
  // the two-body part reassembled from Cholesky factors.
  static SpinIntegrals rotated(const Hamiltonian& ham, const CholeskyFactors& chol,
                               const Matrix& u_up, const Matrix& u_dn);
};

// <up,dn|H|up,dn> diagonal element.
cdouble diagonal_element(const SpinIntegrals& ints, uint64_t up, uint64_t dn);

// Calls cb(up', dn', <up',dn'|H|up,dn>) for every configuration within two
// excitations of (up,dn), the reference included.
void connected_elements(const SpinIntegrals& ints, uint64_t up, uint64_t dn,
                        const std::function<void(uint64_t, uint64_t, cdouble)>& cb);

// y = H x over the sector (matrix-free).
void apply_hamiltonian(const SpinIntegrals& ints, const SectorBasis& basis, const Vector& x,
                       Vector& y, int threads = 1);

RealVector hamiltonian_diagonal(const SpinIntegrals& ints, const SectorBasis& basis);

struct FciResult {
  double energy = 0.0;
  Vector ground;       // over SectorBasis flat index
  SectorBasis basis;
  int iterations = 0;
};

// Lowest eigenpair by Davidson iteration on Slater-Condon matrix-vector
// products (dense solve for tiny sectors). Residual norm <= 1e-8.
FciResult fci_solve(const Hamiltonian& ham, std::size_t max_dim = 1000000, int threads = 1);

struct EnergyPoint {
  double tau;
  double energy;
};

// Repeated application of exp(-dt H) with renormalization; returns the
// Rayleigh-quotient trajectory including tau = 0.
std::vector<EnergyPoint> imaginary_time_exact(const Hamiltonian& ham, const SectorBasis& basis,
                                              const Vector& psi0, double dt, int n_steps);

double variational_energy_exact(const Hamiltonian& ham, const SectorBasis& basis, const Vector& v);

// Spin-summed one-body density <v|c^dag_p c_q|v> / <v|v>.
Matrix one_body_density(const SectorBasis& basis, const Vector& v);

// Per-spin one-body densities <v|c^dag_{p sigma} c_{q sigma}|v> / <v|v>.
std::pair<Matrix, Matrix> one_body_density_by_spin(const SectorBasis& basis, const Vector& v);

}  // namespace qcqmc::oracle
