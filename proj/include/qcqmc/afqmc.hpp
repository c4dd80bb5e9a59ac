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
#include <vector>

#include "qcqmc/hamiltonian.hpp"
#include "qcqmc/rng.hpp"
#include "qcqmc/slater.hpp"
#include "qcqmc/trial.hpp"
#include "qcqmc/types.hpp"

namespace qcqmc::afqmc {

// Symmetric Trotter factorization exp(-dt/2 h') exp(i sqrt(dt) x.v) exp(-dt/2 h')
// with trial mean-field subtraction. h' absorbs the one-body closure of the
// two-body term and the mean-field shift contribution.
struct Propagator {
  double dt = 0.0;
  Matrix half_onebody_up, half_onebody_dn;  // expm(-dt/2 h')
  std::vector<RealMatrix> chol;             // L_g factors (sqrt(dt) applied at use)
  Vector mf_shift;                          // <v_g>_T
  cdouble h0 = 0.0;                         // e_core - 1/2 sum_g <v_g>_T^2
};

Propagator build_propagator(const Hamiltonian& ham, const CholeskyFactors& chol,
                            const TrialWavefunction& trial, double dt);

struct StepDiagnostics {
  long killed_by_cosine = 0;
  long killed_by_overlap = 0;
  long capped_force_bias = 0;
};

// One phaseless step: force-biased field sampling, B(x) application, hybrid
// weight update w <- w |I| max(0, cos(arg S)).
void propagate_step(Walker& walker, const Propagator& prop, const TrialWavefunction& trial,
                    double energy_shift, RngStream& rng, StepDiagnostics* diag = nullptr);

struct MixedEnergy {
  double energy = 0.0;          // sum_i w_i Re E_i / sum_i w_i
  cdouble weighted_num = 0.0;   // sum_i w_i E_i (complex, for audit)
  double total_weight = 0.0;
  int n_alive = 0;
};

MixedEnergy measure_mixed_energy(const std::vector<Walker>& walkers,
                                 const TrialWavefunction& trial, const Hamiltonian& ham,
                                 const CholeskyFactors& chol, int threads = 1);

// Systematic-comb resampling to target_count equal-weight walkers; total
// weight preserved. A 4x-mean weight cap is applied first.
void population_control(std::vector<Walker>& walkers, int target_count, RngStream& rng);

struct SeriesRow {
  double tau = 0.0;
  double e_num = 0.0;   // sum_i w_i Re E_i
  double weight = 0.0;  // sum_i w_i
  int n_walkers = 0;
};

struct EnergyTimeSeries {
  std::vector<SeriesRow> rows;
  uint64_t seed = 0;
  std::string config_hash;
  double imaginary_residue = 0.0;  // max |Im weighted mean| seen
  StepDiagnostics diagnostics;
};

struct RunParams {
  double dt = 0.005;
  int n_walkers = 1024;
  int n_equilibration_steps = 400;
  int n_steps = 2000;
  int measure_every = 2;
  int orthonormalize_every = 10;
  int population_control_every = 20;
  uint64_t seed = 1;
  int threads = 1;
  std::optional<double> energy_shift;          // default: E_loc of the initial walker
  std::optional<SlaterDeterminant> initial_det;  // default: largest-amplitude configuration
  std::string config_hash;
  std::string checkpoint_path;  // empty disables checkpointing
  int checkpoint_every = 0;
};

EnergyTimeSeries run(const Hamiltonian& ham, const CholeskyFactors& chol,
                     const TrialWavefunction& trial, const RunParams& params);

// Resume from a checkpoint written during run(); the completed series is
// byte-identical to an uninterrupted run with the same parameters.
EnergyTimeSeries run_resumed(const Hamiltonian& ham, const CholeskyFactors& chol,
                             const TrialWavefunction& trial, const RunParams& params,
                             const std::string& checkpoint_path);

struct BlockLevel {
  int block_size = 0;
  int n_blocks = 0;
  double std_error = 0.0;
  double std_error_error = 0.0;
};

struct BlockReport {
  double mean = 0.0;
  double std_error = 0.0;
  int plateau_block_size = 0;
  bool converged = false;
  std::vector<BlockLevel> levels;
};

// Flyvbjerg-Petersen style reblocking over power-of-two block sizes; the
// reported error comes from the first level whose successors stay within
// their own error bars. Requires at least 32 samples.
BlockReport blocking_analysis(const std::vector<double>& samples);

void write_series_csv(const EnergyTimeSeries& series, const std::string& path);

}  // namespace qcqmc::afqmc
