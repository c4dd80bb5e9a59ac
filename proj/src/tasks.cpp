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

#include "qcqmc/tasks.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "qcqmc/afqmc.hpp"
#include "qcqmc/embed.hpp"
#include "qcqmc/oracle.hpp"
#include "qcqmc/shadows.hpp"

namespace qcqmc::tasks {

namespace {

using nlohmann::ordered_json;

const char* kFormatVersions[][2] = {
    {"fcidump", "molpro"},       {"slater", "SLATER v1"}, {"multidet", "MDET v1"},
    {"trial_spec", "trialspec v1"}, {"shadow_record", "SHDW v1"}, {"checkpoint", "AFQM v1"},
    {"series", "csv v1"},        {"summary", "json v1"},
};

ordered_json base_summary(const RunConfig& config) {
  ordered_json j;
  j["task"] = config.task;
  j["config_hash"] = config.config_hash;
  j["seed"] = config.seed;
  ordered_json formats;
  for (const auto& [name, version] : kFormatVersions) formats[name] = version;
  j["formats"] = formats;
  return j;
}

void write_summary(const RunConfig& config, const ordered_json& j) {
  std::filesystem::create_directories(config.output_dir);
  std::ofstream out(config.output_dir + "/summary.json");
  if (!out) throw std::runtime_error("cannot write summary.json in " + config.output_dir);
  out << j.dump(2) << "\n";
}

ordered_json block_report_json(const afqmc::BlockReport& report) {
  ordered_json j;
  j["mean"] = report.mean;
  j["std_error"] = report.std_error;
  j["plateau_block_size"] = report.plateau_block_size;
  j["converged"] = report.converged;
  ordered_json levels = ordered_json::array();
  for (const auto& level : report.levels) {
    ordered_json l;
    l["block_size"] = level.block_size;
    l["n_blocks"] = level.n_blocks;
    l["std_error"] = level.std_error;
    l["std_error_error"] = level.std_error_error;
    levels.push_back(l);
  }
  j["levels"] = levels;
  return j;
}

void maybe_add_atomization(const RunConfig& config, double energy, ordered_json& j) {
  if (config.atomize && config.atom_energy) {
    const double atomization =
        (*config.atomize * *config.atom_energy - energy) * kHartreeToKcalPerMol;
    j["atomization_kcal_per_mol"] = atomization;
    j["atom_energy"] = *config.atom_energy;
    j["n_atoms"] = *config.atomize;
  }
}

shadows::Ensemble ensemble_from_config(const RunConfig& config, int n_qubits) {
  if (config.ensemble == "global") return shadows::Ensemble::global(n_qubits);
  if (config.ensemble == "partitioned")
    return shadows::Ensemble::partitioned({n_qubits / 2, n_qubits - n_qubits / 2});
  throw std::runtime_error("config: unknown ensemble '" + config.ensemble + "'");
}

int task_fci(const RunConfig& config) {
  const Hamiltonian ham = parse_fcidump_file(config.fcidump);
  const auto fci = oracle::fci_solve(ham, 1000000, config.threads);
  std::filesystem::create_directories(config.output_dir);
  write_multidet_file(fci.basis, fci.ground, config.output_dir + "/fci_vector.mdet");
  ordered_json j = base_summary(config);
  j["energy"] = fci.energy;
  j["std_error"] = 0.0;
  j["n_samples"] = 1;
  j["sector_dimension"] = fci.basis.size();
  j["davidson_iterations"] = fci.iterations;
  maybe_add_atomization(config, fci.energy, j);
  write_summary(config, j);
  return 0;
}

int task_afqmc(const RunConfig& config, bool quantum_pipeline) {
  const Hamiltonian ham = parse_fcidump_file(config.fcidump);
  const CholeskyFactors chol = cholesky_factorize(ham, config.cholesky_tol);
  const TrialWavefunction trial = load_trial(config, ham, chol);
  if (quantum_pipeline && trial.kind() != TrialWavefunction::Kind::Circuit &&
      trial.kind() != TrialWavefunction::Kind::ShadowReconstructed)
    throw std::runtime_error("qcafqmc requires a circuit or shadow trial");

  afqmc::RunParams params;
  params.dt = config.dt;
  params.n_walkers = config.walkers;
  params.n_equilibration_steps = config.equilibration_steps;
  params.n_steps = config.steps;
  params.measure_every = config.measure_every;
  params.orthonormalize_every = config.orthonormalize_every;
  params.population_control_every = config.population_control_every;
  params.seed = config.seed;
  params.threads = config.threads;
  params.energy_shift = config.energy_shift;
  params.config_hash = config.config_hash;
  params.checkpoint_path = config.checkpoint;
  params.checkpoint_every = config.checkpoint_every;

  std::filesystem::create_directories(config.output_dir);
  if (!config.checkpoint.empty()) {
    const auto parent = std::filesystem::path(config.checkpoint).parent_path();
    if (!parent.empty()) std::filesystem::create_directories(parent);
  }
  const afqmc::EnergyTimeSeries series =
      config.resume.empty() ? afqmc::run(ham, chol, trial, params)
                            : afqmc::run_resumed(ham, chol, trial, params, config.resume);
  afqmc::write_series_csv(series, config.output_dir + "/series.csv");

  std::vector<double> samples;
  for (const auto& row : series.rows) samples.push_back(row.e_num / row.weight);
  ordered_json j = base_summary(config);
  if (samples.size() >= 32) {
    const auto report = afqmc::blocking_analysis(samples);
    j["energy"] = report.mean;
    j["std_error"] = report.std_error;
    j["block_report"] = block_report_json(report);
    maybe_add_atomization(config, report.mean, j);
  } else if (!samples.empty()) {
    double mean = 0.0;
    for (double s : samples) mean += s;
    j["energy"] = mean / samples.size();
    j["std_error"] = nullptr;
  }
  j["n_samples"] = samples.size();
  j["imaginary_residue"] = series.imaginary_residue;
  ordered_json diag;
  diag["killed_by_cosine"] = series.diagnostics.killed_by_cosine;
  diag["killed_by_overlap"] = series.diagnostics.killed_by_overlap;
  diag["capped_force_bias"] = series.diagnostics.capped_force_bias;
  j["diagnostics"] = diag;
  write_summary(config, j);
  return 0;
}

int task_shadows_acquire(const RunConfig& config) {
  const Hamiltonian ham = parse_fcidump_file(config.fcidump);
  const CircuitTrialSpec spec = load_trial_spec(config.trial_spec);
  if (spec.n_orb != ham.n_orb)
    throw std::runtime_error("trial spec orbital count does not match the Hamiltonian");
  const auto tau = prepare_tau(spec);
  const auto ensemble = ensemble_from_config(config, tau.n_qubits);
  const auto record = shadows::acquire_shadow(tau, ensemble, config.n_cliffords, config.shots,
                                              {config.depolarizing_p}, config.seed,
                                              config.threads);
  std::filesystem::create_directories(config.output_dir);
  const std::string record_path = config.output_dir + "/shadow_record.shdw";
  shadows::write_shadow_record(record, record_path);
  ordered_json j = base_summary(config);
  j["record"] = record_path;
  j["n_cliffords"] = config.n_cliffords;
  j["shots_per_clifford"] = config.shots;
  j["depolarizing_p"] = config.depolarizing_p;
  j["ensemble"] = config.ensemble;
  j["n_samples"] = static_cast<long>(config.n_cliffords) * config.shots;
  write_summary(config, j);
  return 0;
}

int task_shadows_estimate(const RunConfig& config) {
  const Hamiltonian ham = parse_fcidump_file(config.fcidump);
  const auto record = shadows::read_shadow_record(config.record);
  shadows::EstimatorOptions options;
  options.median_of_means = config.median_of_means;
  const auto trial = shadows::reconstruct_trial(record, ham.n_orb, ham.n_alpha, ham.n_beta,
                                                options, config.threads);
  std::filesystem::create_directories(config.output_dir);
  shadows::write_estimates_csv(trial, config.output_dir + "/estimates.csv");
  write_multidet_file(trial.basis(), trial.amplitudes(),
                      config.output_dir + "/reconstructed.mdet");
  ordered_json j = base_summary(config);
  j["energy"] = shadows::variational_energy(trial, ham);
  j["std_error"] = nullptr;
  j["n_samples"] = static_cast<long>(record.entries.size()) * record.shots_per_clifford;
  j["reconstructed_norm"] = std::sqrt(trial.amplitudes().squaredNorm());
  write_summary(config, j);
  return 0;
}

int task_embed_check(const RunConfig& config) {
  const Hamiltonian ham = parse_fcidump_file(config.fcidump);
  const CholeskyFactors chol = cholesky_factorize(ham, config.cholesky_tol);
  embed::SpacePartition part;
  part.active = config.active_orbitals;
  part.core = config.core_orbitals;
  part.virt = config.virtual_orbitals;
  part.validate(ham.n_orb);
  SlaterDeterminant core;
  core.up = Matrix::Zero(ham.n_orb, part.core.size());
  core.dn = Matrix::Zero(ham.n_orb, part.core.size());
  for (std::size_t c = 0; c < part.core.size(); ++c) {
    core.up(part.core[c], c) = 1.0;
    core.dn(part.core[c], c) = 1.0;
  }
  const int n_active = static_cast<int>(part.active.size());
  const int na = ham.n_alpha - static_cast<int>(part.core.size());
  const int nb = ham.n_beta - static_cast<int>(part.core.size());
  if (na < 0 || nb < 0) throw std::runtime_error("embed-check: core holds too many electrons");

  RngStream rng(RngStream::derive(config.seed, 0x656d6264));
  auto random_matrix = [&](int rows, int cols) {
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) m(r, c) = cdouble(rng.next_normal(), rng.next_normal());
    return m;
  };
  double max_identity_dev = 0.0;
  for (int inst = 0; inst < config.n_instances; ++inst) {
    SlaterDeterminant phi;
    phi.up = random_matrix(ham.n_orb, ham.n_alpha);
    phi.dn = random_matrix(ham.n_orb, ham.n_beta);
    SlaterDeterminant psi;
    psi.up = random_matrix(n_active, na);
    psi.dn = random_matrix(n_active, nb);
    const auto proj = embed::project_determinant(phi, core, part);
    const cdouble via = proj.constant * overlap(proj.active_det, psi);
    const cdouble direct = overlap(phi, embed::lift_determinant(psi, core, part));
    max_identity_dev =
        std::max(max_identity_dev, std::abs(via - direct) / std::max(1.0, std::abs(direct)));
  }

  // Embedded local energy versus the dense full-space evaluation on a few
  // instances with an exact frozen-sector trial.
  const Hamiltonian frozen =
      freeze_core(ham, part.active, static_cast<int>(part.core.size()));
  const auto fci = oracle::fci_solve(frozen);
  const auto trial = TrialWavefunction::multi_det(fci.basis, fci.ground);
  const auto full_basis = oracle::SectorBasis::build(ham.n_orb, ham.n_alpha, ham.n_beta);
  const auto ints = oracle::SpinIntegrals::from(ham);
  Vector embedded_vec = Vector::Zero(full_basis.size());
  std::size_t idx = 0;
  for (uint64_t up : fci.basis.up_masks)
    for (uint64_t dn : fci.basis.dn_masks) {
      const auto cfg = SlaterDeterminant::from_occupation(n_active, up, dn);
      const SlaterDeterminant lifted = embed::lift_determinant(cfg, core, part);
      std::size_t j2 = 0;
      for (uint64_t fu : full_basis.up_masks)
        for (uint64_t fd : full_basis.dn_masks)
          embedded_vec(j2++) += fci.ground(idx) * det_amplitude(lifted, fu, fd);
      ++idx;
    }
  double max_eloc_dev = 0.0;
  for (int inst = 0; inst < 10; ++inst) {
    SlaterDeterminant phi;
    phi.up = random_matrix(ham.n_orb, ham.n_alpha);
    phi.dn = random_matrix(ham.n_orb, ham.n_beta);
    Vector phi_vec(full_basis.size());
    std::size_t j2 = 0;
    for (uint64_t fu : full_basis.up_masks)
      for (uint64_t fd : full_basis.dn_masks) phi_vec(j2++) = det_amplitude(phi, fu, fd);
    Vector hphi;
    oracle::apply_hamiltonian(ints, full_basis, phi_vec, hphi);
    const cdouble dense = embedded_vec.dot(hphi) / embedded_vec.dot(phi_vec);
    const cdouble via = embed::embedded_local_energy(trial, ham, chol, phi, core, part);
    max_eloc_dev = std::max(max_eloc_dev, std::abs(via - dense));
  }

  ordered_json j = base_summary(config);
  j["n_instances"] = config.n_instances;
  j["max_identity_deviation"] = max_identity_dev;
  j["max_local_energy_deviation"] = max_eloc_dev;
  j["frozen_fci_energy"] = fci.energy;
  write_summary(config, j);
  return (max_identity_dev <= 1e-10 && max_eloc_dev <= 1e-8) ? 0 : 1;
}

int task_blocking(const RunConfig& config) {
  std::ifstream in(config.series);
  if (!in) throw std::runtime_error("cannot open series csv: " + config.series);
  std::string line;
  std::getline(in, line);  // header
  std::vector<double> samples;
  while (std::getline(in, line)) {
    double tau, e_num, weight;
    int nw;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%d", &tau, &e_num, &weight, &nw) != 4) continue;
    samples.push_back(e_num / weight);
  }
  if (config.equilibration_rows > 0 &&
      static_cast<std::size_t>(config.equilibration_rows) < samples.size())
    samples.erase(samples.begin(), samples.begin() + config.equilibration_rows);
  const auto report = afqmc::blocking_analysis(samples);
  ordered_json j = base_summary(config);
  j["energy"] = report.mean;
  j["std_error"] = report.std_error;
  j["n_samples"] = samples.size();
  j["block_report"] = block_report_json(report);
  maybe_add_atomization(config, report.mean, j);
  write_summary(config, j);
  return 0;
}

}  // namespace

TrialWavefunction load_trial(const RunConfig& config, const Hamiltonian& ham,
                             const CholeskyFactors& chol) {
  (void)chol;
  if (config.trial.empty() || config.trial == "fci") {
    const auto fci = oracle::fci_solve(ham, 1000000, config.threads);
    return TrialWavefunction::multi_det(fci.basis, fci.ground);
  }
  const auto colon = config.trial.find(':');
  const std::string kind = config.trial.substr(0, colon);
  const std::string path = config.trial.substr(colon + 1);
  if (kind == "slater") return TrialWavefunction::single_det(read_slater_file(path));
  if (kind == "multidet") {
    auto [basis, amps] = read_multidet_file(path);
    return TrialWavefunction::multi_det(std::move(basis), std::move(amps));
  }
  if (kind == "circuit") {
    CircuitTrialSpec spec = load_trial_spec(path);
    if (spec.n_orb != ham.n_orb)
      throw std::runtime_error("trial spec orbital count does not match the Hamiltonian");
    if (config.trial_optimize) {
      OptimizeOptions options;
      options.seed = config.seed;
      spec = optimize_pp(ham, spec, options).spec;
    }
    return TrialWavefunction::circuit(spec);
  }
  if (kind == "shadow") {
    const auto record = shadows::read_shadow_record(path);
    shadows::EstimatorOptions options;
    options.median_of_means = config.median_of_means;
    return shadows::reconstruct_trial(record, ham.n_orb, ham.n_alpha, ham.n_beta, options,
                                      config.threads);
  }
  throw std::runtime_error("unknown trial kind: " + kind);
}

int run_task(const RunConfig& config) {
  config.validate();
  if (config.task == "fci") return task_fci(config);
  if (config.task == "afqmc") return task_afqmc(config, false);
  if (config.task == "qcafqmc") return task_afqmc(config, true);
  if (config.task == "shadows-acquire") return task_shadows_acquire(config);
  if (config.task == "shadows-estimate") return task_shadows_estimate(config);
  if (config.task == "embed-check") return task_embed_check(config);
  if (config.task == "blocking") return task_blocking(config);
  throw std::runtime_error("unknown task: " + config.task);
}

}  // namespace qcqmc::tasks
