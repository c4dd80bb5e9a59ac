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

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace qcqmc {

// Flat key = value run configuration. Every stochastic quantity flows from
// the mandatory seed; no task consults the wall clock.
struct RunConfig {
  std::string task;  // fci | afqmc | shadows-acquire | shadows-estimate | qcafqmc |
                     // embed-check | blocking

  // Paths.
  std::string fcidump;
  std::string trial;        // "fci" | "slater:PATH" | "multidet:PATH" | "circuit:PATH" |
                            // "shadow:PATH"
  std::string record;       // shadow record path (estimate / qcafqmc input)
  std::string trial_spec;   // circuit spec for tau preparation (shadows-acquire)
  std::string series;       // energy series csv (blocking task)
  std::string checkpoint;   // checkpoint output path
  std::string resume;       // checkpoint to resume from
  std::string output_dir = ".";

  // Numeric parameters.
  uint64_t seed = 0;
  int threads = 1;
  double dt = 0.005;
  int walkers = 1024;
  int steps = 2000;
  int equilibration_steps = 400;
  int measure_every = 2;
  int orthonormalize_every = 10;
  int population_control_every = 20;
  int checkpoint_every = 0;
  std::optional<double> energy_shift;
  double cholesky_tol = 1e-8;
  int n_cliffords = 1000;
  int shots = 1000;
  double depolarizing_p = 0.0;
  std::string ensemble = "partitioned";  // global | partitioned (spin split)
  bool trial_optimize = false;
  bool median_of_means = false;
  int equilibration_rows = 0;  // blocking task: rows to drop
  std::vector<int> active_orbitals;
  std::vector<int> core_orbitals;
  std::vector<int> virtual_orbitals;
  int n_instances = 100;  // embed-check

  // Atomization helper.
  std::optional<int> atomize;
  std::optional<double> atom_energy;

  std::string config_hash;  // filled by load/canonicalize

  void validate() const;  // existence of referenced paths, mandatory seed
};

// Parses a flat key=value file ('#' comments). Unknown keys raise an error
// naming the key and suggesting the closest known one; type mismatches raise
// with the key name.
RunConfig load_config(const std::string& path);
RunConfig parse_config_text(const std::string& text);

// Canonical hash over sorted key=value pairs (fnv-1a, hex).
std::string config_hash_of(const std::map<std::string, std::string>& entries);

}  // namespace qcqmc
