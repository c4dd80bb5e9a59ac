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

#include <cstdio>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "qcqmc/config.hpp"
#include "qcqmc/tasks.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> resume;
  std::optional<std::string> output_dir;
  std::optional<int> atomize;
  std::optional<double> atom_energy;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
  cmd->add_option("--config", flags.config_path, "run configuration file")->required();
  cmd->add_option("--seed", flags.seed, "override the configured seed");
  cmd->add_option("--threads", flags.threads, "override the configured thread count");
  cmd->add_option("--resume", flags.resume, "resume from a checkpoint file");
  cmd->add_option("--output-dir", flags.output_dir, "override the output directory");
  cmd->add_option("--atomize", flags.atomize, "atom count for the atomization-energy helper");
  cmd->add_option("--atom-energy", flags.atom_energy, "isolated-atom energy (Hartree)");
}

int run(const std::string& task, const CommonFlags& flags) {
  qcqmc::RunConfig config = qcqmc::load_config(flags.config_path);
  if (!config.task.empty() && config.task != task) {
    std::fprintf(stderr, "config task '%s' does not match subcommand '%s'\n",
                 config.task.c_str(), task.c_str());
    return 2;
  }
  config.task = task;
  if (flags.seed) config.seed = *flags.seed;
  if (flags.threads) config.threads = *flags.threads;
  if (flags.resume) config.resume = *flags.resume;
  if (flags.output_dir) config.output_dir = *flags.output_dir;
  if (flags.atomize) config.atomize = *flags.atomize;
  if (flags.atom_energy) config.atom_energy = *flags.atom_energy;
  return qcqmc::tasks::run_task(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"auxiliary-field quantum Monte Carlo with shadow-tomography trials"};
  app.require_subcommand(1);

  CommonFlags fci_flags, afqmc_flags, qc_flags, embed_flags, blocking_flags;
  CommonFlags acquire_flags, estimate_flags;

  add_common(app.add_subcommand("fci", "exact diagonalization reference"), fci_flags);
  add_common(app.add_subcommand("afqmc", "phaseless AFQMC with a classical trial"), afqmc_flags);
  add_common(app.add_subcommand("qcafqmc", "phaseless AFQMC with a circuit or shadow trial"),
             qc_flags);
  auto* shadows_cmd = app.add_subcommand("shadows", "shadow-tomography pipeline");
  shadows_cmd->require_subcommand(1);
  add_common(shadows_cmd->add_subcommand("acquire", "sample Clifford measurement records"),
             acquire_flags);
  add_common(shadows_cmd->add_subcommand("estimate", "reconstruct amplitudes from a record"),
             estimate_flags);
  add_common(app.add_subcommand("embed-check", "active-space projection diagnostics"),
             embed_flags);
  add_common(app.add_subcommand("blocking", "reblocking analysis of an energy series"),
             blocking_flags);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand("fci")) return run("fci", fci_flags);
    if (app.got_subcommand("afqmc")) return run("afqmc", afqmc_flags);
    if (app.got_subcommand("qcafqmc")) return run("qcafqmc", qc_flags);
    if (app.got_subcommand("embed-check")) return run("embed-check", embed_flags);
    if (app.got_subcommand("blocking")) return run("blocking", blocking_flags);
    if (shadows_cmd->got_subcommand("acquire")) return run("shadows-acquire", acquire_flags);
    if (shadows_cmd->got_subcommand("estimate")) return run("shadows-estimate", estimate_flags);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 2;
}
