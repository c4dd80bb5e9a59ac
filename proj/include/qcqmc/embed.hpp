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

#include <vector>

#include "qcqmc/hamiltonian.hpp"
#include "qcqmc/slater.hpp"
#include "qcqmc/trial.hpp"
#include "qcqmc/types.hpp"

namespace qcqmc::embed {

// Spatial-orbital partition applied identically to both spins. The trial is
// an active-space state tensored with a fully occupied core determinant and
// the frozen-virtual vacuum.
struct SpacePartition {
  std::vector<int> active;
  std::vector<int> core;
  std::vector<int> virt;
  void validate(int n_orb) const;
};

// Full-space determinant for an active state tensored with the core: core
// columns first, then the lifted active columns (the sign convention every
// identity below is stated in).
SlaterDeterminant lift_determinant(const SlaterDeterminant& active_det,
                                   const SlaterDeterminant& core_det, const SpacePartition& part);

struct Projection {
  cdouble constant = 0.0;
  SlaterDeterminant active_det;  // rows ordered as part.active
};

// Schur-complement column completion: for every active-space state psi of the
// right sector, <phi|lift(psi)> = constant * <phi_tilde|psi>. A vanishing
// constant means the walker is annihilated by the core projection.
Projection project_determinant(const SlaterDeterminant& phi, const SlaterDeterminant& core_det,
                               const SpacePartition& part);

// <phi|Psi_T^emb> through the projection plus one active trial query.
cdouble embedded_overlap(const TrialWavefunction& trial_active, const SlaterDeterminant& phi,
                         const SlaterDeterminant& core_det, const SpacePartition& part);

// Full-space local energy with every excited-determinant overlap routed
// through project_determinant and the active trial.
cdouble embedded_local_energy(const TrialWavefunction& trial_active, const Hamiltonian& ham_full,
                              const CholeskyFactors& chol_full, const SlaterDeterminant& phi,
                              const SlaterDeterminant& core_det, const SpacePartition& part);

}  // namespace qcqmc::embed
