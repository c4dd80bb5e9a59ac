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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcqmc/hamiltonian.hpp"
#include "qcqmc/oracle.hpp"
#include "qcqmc/qsim.hpp"
#include "qcqmc/slater.hpp"
#include "qcqmc/types.hpp"

namespace qcqmc {

// One hardware-efficient layer: density-density phases exp(i theta n_i n_j)
// or same-spin hopping rotations exp(theta (a^dag_i a_j - a^dag_j a_i)).
// Pair entries are spin-orbital indices (up spin p -> p, down spin p -> n_orb + p).
struct CircuitLayer {
  enum class Kind { DensityDensity, Hopping };
  Kind kind = Kind::DensityDensity;
  std::vector<std::pair<int, int>> pairs;
  std::vector<double> thetas;
};

// Valence-bond pairing circuit: per pair i, cos(t_i)|occ pair> + sin(t_i)|virt pair>,
// followed by the layer list.
struct CircuitTrialSpec {
  int n_orb = 0;
  std::vector<std::pair<int, int>> pairs;  // (occupied spatial, paired virtual spatial)
  std::vector<double> pp_thetas;
  std::vector<CircuitLayer> layers;
  std::vector<int> qubit_map;  // spin orbital -> qubit; empty means identity
  bool optimizer_converged = true;

  int n_pairs() const { return static_cast<int>(pairs.size()); }
  int n_qubits() const { return 2 * n_orb; }
  int qubit_of(int spin_orbital) const {
    return qubit_map.empty() ? spin_orbital : qubit_map[spin_orbital];
  }
  void validate() const;
};

CircuitTrialSpec load_trial_spec(const std::string& path);
void save_trial_spec(const CircuitTrialSpec& spec, const std::string& path);

// Amplitudes of the circuit state gathered over the fixed-particle sector.
std::pair<oracle::SectorBasis, Vector> build_pp_state(const CircuitTrialSpec& spec);

// (|0...0> + |Psi_T>)/sqrt(2) built with a Hadamard, a CNOT ladder, and pair
// rotations that leave the vacuum branch fixed.
qsim::StateVector prepare_tau(const CircuitTrialSpec& spec);

class TrialWavefunction {
 public:
  enum class Kind { SingleDet, MultiDet, Circuit, ShadowReconstructed };

  static TrialWavefunction single_det(SlaterDeterminant det);
  static TrialWavefunction multi_det(oracle::SectorBasis basis, Vector amplitudes);
  static TrialWavefunction circuit(const CircuitTrialSpec& spec);
  static TrialWavefunction shadow_reconstructed(oracle::SectorBasis basis, Vector amplitudes,
                                                RealVector std_errors);

  Kind kind() const { return kind_; }
  int n_orb() const;
  int n_alpha() const;
  int n_beta() const;

  // Offline orbital rotation: the represented state is U(R)|base>, handled by
  // rotating walkers in post-processing. Unitarity checked to 1e-10.
  void set_offline_rotation(Matrix r_up, Matrix r_dn);

  // <det|Psi_T>. Single determinants delegate to slater overlap; amplitude-map
  // kinds contract sum_beta conj(amp_det(beta)) a(beta).
  cdouble overlap(const SlaterDeterminant& det) const;

  // M_sigma(p,q) = <Psi_T|c^dag_p c_q|det> (unnormalized) and den = <Psi_T|det>.
  struct TransitionMatrices {
    Matrix up, dn;
    cdouble den;
  };
  TransitionMatrices one_body_transitions(const SlaterDeterminant& det) const;

  const oracle::SectorBasis& basis() const { return basis_; }
  const Vector& amplitudes() const { return amps_; }
  const RealVector& amplitude_std_errors() const { return amp_stderr_; }
  const SlaterDeterminant& reference_determinant() const { return ref_; }
  const CircuitTrialSpec& circuit_spec() const { return spec_; }
  bool has_offline_rotation() const { return has_rotation_; }
  const Matrix& rotation_up() const { return rot_up_; }
  const Matrix& rotation_dn() const { return rot_dn_; }

 private:
  Kind kind_ = Kind::SingleDet;
  SlaterDeterminant ref_;
  oracle::SectorBasis basis_;
  Vector amps_;
  RealVector amp_stderr_;
  CircuitTrialSpec spec_;
  bool has_rotation_ = false;
  Matrix rot_up_, rot_dn_;
  int n_orb_ = 0, n_alpha_ = 0, n_beta_ = 0;
};

// E_loc = <Psi_T|H|det> / <Psi_T|det>, evaluated by enumerating the zero-,
// single- and double-excitation determinants of det in its orthonormalized
// orbital frame with integrals rotated into that frame (O(N^4) overlap
// queries). Single-determinant trials use the equivalent Green's-function
// contraction. Throws on a vanishing denominator.
cdouble local_energy(const TrialWavefunction& trial, const Hamiltonian& ham,
                     const CholeskyFactors& chol, const SlaterDeterminant& det);

// Excitation-query route, available for every trial kind (the generic path
// local_energy dispatches away from for single determinants).
cdouble local_energy_by_queries(const TrialWavefunction& trial, const Hamiltonian& ham,
                                const CholeskyFactors& chol, const SlaterDeterminant& det);

// Force bias entries <Psi_T|v_g|det>/<Psi_T|det> for the one-body operators of
// the Cholesky factors.
Vector force_bias(const TrialWavefunction& trial, const CholeskyFactors& chol,
                  const SlaterDeterminant& det);

struct OptimizeOptions {
  int max_iterations = 400;
  int restarts = 4;
  double gradient_tol = 1e-6;
  uint64_t seed = 1;
  double perturbation = 0.4;
};

struct OptimizeResult {
  CircuitTrialSpec spec;
  double energy = 0.0;
  double gradient_norm = 0.0;
  bool converged = false;
};

// Minimize the Rayleigh quotient of the built circuit state over all pair and
// layer angles (analytic statevector gradients + BFGS).
OptimizeResult optimize_pp(const Hamiltonian& ham, const CircuitTrialSpec& spec_template,
                           const OptimizeOptions& options = {});

// MultiDet text format: lines "occ_up occ_dn re im" with bitstring character
// k = orbital k; '#' lines are comments.
void write_multidet_file(const oracle::SectorBasis& basis, const Vector& amps,
                         const std::string& path);
std::pair<oracle::SectorBasis, Vector> read_multidet_file(const std::string& path);

}  // namespace qcqmc
