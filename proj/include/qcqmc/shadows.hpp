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

#include <functional>
#include <string>
#include <vector>

#include "qcqmc/qsim.hpp"
#include "qcqmc/stab.hpp"
#include "qcqmc/trial.hpp"
#include "qcqmc/types.hpp"

namespace qcqmc::shadows {

struct Ensemble {
  enum class Kind { Global, Partitioned };
  Kind kind = Kind::Global;
  std::vector<int> part_sizes;  // Global: {N}; Partitioned: sizes summing to N
  bool force_identity = false;  // test hook: skip sampling, use identity Cliffords

  static Ensemble global(int n_qubits) { return {Kind::Global, {n_qubits}, false}; }
  static Ensemble partitioned(std::vector<int> sizes) {
    return {Kind::Partitioned, std::move(sizes), false};
  }
  int total_qubits() const;
};

struct ShadowEntry {
  std::vector<stab::GForm> parts;
  std::vector<uint64_t> outcomes;
};

struct ShadowRecord {
  Ensemble ensemble;
  int n_qubits = 0;
  int shots_per_clifford = 0;
  qsim::NoiseModel noise;
  uint64_t seed = 0;
  std::vector<ShadowEntry> entries;
};

// Sample n_cliffords random (per-part) Cliffords, compile each to its
// measurement form, rotate tau, and record `shots` outcomes per Clifford.
// Deterministic for a fixed seed at any thread count.
ShadowRecord acquire_shadow(const qsim::StateVector& tau, const Ensemble& ensemble,
                            int n_cliffords, int shots, const qsim::NoiseModel& noise,
                            uint64_t seed, int threads = 1);

struct OverlapEstimate {
  cdouble value = 0.0;
  double std_error = 0.0;
  long n_samples = 0;
};

struct EstimatorOptions {
  bool median_of_means = false;
  int n_batches = 10;
};

// <beta|Psi_T> from the record: mean over Cliffords of the per-Clifford shot
// average of 2 (2^N + 1) <beta|G^dag|y><y|G|0> (per-part product for
// partitioned records). The standard error comes from per-Clifford batch
// means, respecting the shot correlation within one Clifford.
OverlapEstimate estimate_basis_overlap(const ShadowRecord& record, uint64_t beta,
                                       const EstimatorOptions& options = {});

// Amplitude map over the full (n_alpha, n_beta) sector, with per-amplitude
// standard errors kept as metadata.
TrialWavefunction reconstruct_trial(const ShadowRecord& record, int n_orb, int n_alpha,
                                    int n_beta, const EstimatorOptions& options = {},
                                    int threads = 1);

// Sum_beta conj(amp_det(beta)) amp(beta); delegates to the trial overlap.
cdouble estimate_walker_overlap(const TrialWavefunction& trial, const SlaterDeterminant& det);

// Rayleigh quotient of the reconstructed amplitude vector under the sector
// Hamiltonian.
double variational_energy(const TrialWavefunction& trial, const Hamiltonian& ham);

// Sampling-based overlap: mean over x ~ |<x|phi>|^2 of <psi|x>/<phi|x>, an
// unbiased estimate of <psi|phi>. Samples hitting <phi|x> = 0 are rejected
// and counted; more than 50% rejections is an error.
struct AmplitudeSource {
  std::function<cdouble(uint64_t)> amplitude;    // <x|state>
  std::function<uint64_t(RngStream&)> sample;    // x ~ |<x|state>|^2
};

OverlapEstimate sampling_overlap(const std::function<cdouble(uint64_t)>& psi_amplitude,
                                 const AmplitudeSource& phi, long n_samples, RngStream& rng);

void write_shadow_record(const ShadowRecord& record, const std::string& path);
ShadowRecord read_shadow_record(const std::string& path);

// Per-beta CSV export: "beta_up,beta_dn,re,im,stderr".
void write_estimates_csv(const TrialWavefunction& trial, const std::string& path);

}  // namespace qcqmc::shadows
