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

#include <string>

#include "qcqmc/config.hpp"
#include "qcqmc/hamiltonian.hpp"
#include "qcqmc/trial.hpp"

namespace qcqmc::tasks {

// Builds the trial named by config.trial ("fci", "slater:PATH",
// "multidet:PATH", "circuit:PATH", "shadow:PATH").
TrialWavefunction load_trial(const RunConfig& config, const Hamiltonian& ham,
                             const CholeskyFactors& chol);

// Runs the configured task, writing its artifacts (summary.json plus
// task-specific files) under config.output_dir. Returns the process exit
// status. Outputs are byte-identical for identical config and seed.
int run_task(const RunConfig& config);

}  // namespace qcqmc::tasks
