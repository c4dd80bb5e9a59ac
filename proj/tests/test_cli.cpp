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
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "qcqmc/config.hpp"
#include "qcqmc/tasks.hpp"

using namespace qcqmc;

namespace {

const std::string kFixtures = QCQMC_FIXTURE_DIR;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("minimal config gets defaults, seed stays mandatory") {
  const RunConfig cfg = parse_config_text("task = fci\nfcidump = " + kFixtures +
                                          "/h4_sto3g.fcidump\nseed = 7\n");
  CHECK(cfg.dt == 0.005);
  CHECK(cfg.walkers == 1024);
  CHECK(cfg.shots == 1000);
  CHECK(cfg.threads == 1);
  CHECK(!cfg.config_hash.empty());
  CHECK_NOTHROW(cfg.validate());

  CHECK_THROWS_WITH_AS(parse_config_text("task = fci\n"), doctest::Contains("seed"),
                       std::runtime_error);
}

TEST_CASE("unknown keys are rejected with a suggestion") {
  CHECK_THROWS_WITH_AS(parse_config_text("wakers = 10\nseed = 1\n"),
                       doctest::Contains("walkers"), std::runtime_error);
  CHECK_THROWS_WITH_AS(parse_config_text("seed = x\n"), doctest::Contains("integer"),
                       std::runtime_error);
}

TEST_CASE("validation requires referenced files to exist") {
  RunConfig cfg = parse_config_text("task = fci\nfcidump = /nonexistent.fcidump\nseed = 1\n");
  CHECK_THROWS_WITH_AS(cfg.validate(), doctest::Contains("does not exist"), std::runtime_error);

  RunConfig bad_trial = parse_config_text("task = afqmc\nfcidump = " + kFixtures +
                                          "/h4_sto3g.fcidump\nseed = 1\ntrial = bogus\n");
  CHECK_THROWS_AS(bad_trial.validate(), std::runtime_error);
}

TEST_CASE("config hash is order independent and value sensitive") {
  const RunConfig a = parse_config_text("task = fci\nseed = 1\nthreads = 2\n");
  const RunConfig b = parse_config_text("threads = 2\ntask = fci\nseed = 1\n");
  const RunConfig c = parse_config_text("task = fci\nseed = 2\nthreads = 2\n");
  CHECK(a.config_hash == b.config_hash);
  CHECK(a.config_hash != c.config_hash);
}

TEST_CASE("fci task writes the reference energy and an exportable trial vector") {
  RunConfig cfg = parse_config_text("task = fci\nfcidump = " + kFixtures +
                                    "/h4_sto3g.fcidump\nseed = 3\noutput_dir = "
                                    "/tmp/qcqmc_cli_fci\n");
  REQUIRE(tasks::run_task(cfg) == 0);
  const std::string summary = slurp("/tmp/qcqmc_cli_fci/summary.json");
  CHECK(summary.find("-1.96951216") != std::string::npos);
  CHECK(std::filesystem::exists("/tmp/qcqmc_cli_fci/fci_vector.mdet"));
  std::filesystem::remove_all("/tmp/qcqmc_cli_fci");
}

TEST_CASE("atomization helper converts to kcal/mol") {
  RunConfig cfg = parse_config_text(
      "task = fci\nfcidump = " + kFixtures +
      "/h4_sto3g.fcidump\nseed = 3\noutput_dir = /tmp/qcqmc_cli_atom\n"
      "atomize = 4\natom_energy = -0.46658185\n");
  REQUIRE(tasks::run_task(cfg) == 0);
  const std::string summary = slurp("/tmp/qcqmc_cli_atom/summary.json");
  // 4 * (-0.46658185) - (-1.969512) = 0.10318460 Ha = 64.75 kcal/mol.
  CHECK(summary.find("\"atomization_kcal_per_mol\": 64.7") != std::string::npos);
  std::filesystem::remove_all("/tmp/qcqmc_cli_atom");
}

TEST_CASE("afqmc task outputs are byte-identical across reruns and thread counts") {
  auto config_text = [&](int threads, const std::string& out) {
    return "task = afqmc\nfcidump = " + kFixtures + "/h4_sto3g.fcidump\ntrial = slater:" +
           kFixtures + "/h4_sto3g_uhf.slater\nseed = 11\nwalkers = 32\nsteps = 80\n"
           "equilibration_steps = 20\nthreads = " + std::to_string(threads) +
           "\noutput_dir = " + out + "\n";
  };
  // Same thread count twice.
  RunConfig cfg1 = parse_config_text(config_text(1, "/tmp/qcqmc_cli_a"));
  RunConfig cfg2 = parse_config_text(config_text(1, "/tmp/qcqmc_cli_b"));
  REQUIRE(tasks::run_task(cfg1) == 0);
  REQUIRE(tasks::run_task(cfg2) == 0);
  CHECK(slurp("/tmp/qcqmc_cli_a/series.csv") == slurp("/tmp/qcqmc_cli_b/series.csv"));

  // Different thread count: identical numerical artifacts (summaries differ
  // only through the configured thread count, which is part of the hash).
  RunConfig cfg8 = parse_config_text(config_text(8, "/tmp/qcqmc_cli_c"));
  REQUIRE(tasks::run_task(cfg8) == 0);
  CHECK(slurp("/tmp/qcqmc_cli_a/series.csv") == slurp("/tmp/qcqmc_cli_c/series.csv"));
  for (const char* dir : {"/tmp/qcqmc_cli_a", "/tmp/qcqmc_cli_b", "/tmp/qcqmc_cli_c"})
    std::filesystem::remove_all(dir);
}

TEST_CASE("task-level checkpoint resume reproduces the full run") {
  const std::string base = "task = afqmc\nfcidump = " + kFixtures +
                           "/h2_sto3g.fcidump\ntrial = slater:" + kFixtures +
                           "/h2_rhf.slater\nseed = 5\nwalkers = 16\n"
                           "equilibration_steps = 10\n";
  // Write an RHF-like determinant fixture on the fly.
  {
    SlaterDeterminant det = SlaterDeterminant::aufbau(2, 1, 1);
    write_slater_file(det, std::string(QCQMC_FIXTURE_DIR) + "/h2_rhf.slater");
  }
  RunConfig full = parse_config_text(base + "steps = 40\noutput_dir = /tmp/qcqmc_cli_full\n");
  REQUIRE(tasks::run_task(full) == 0);

  RunConfig part = parse_config_text(base +
                                     "steps = 15\noutput_dir = /tmp/qcqmc_cli_part\n"
                                     "checkpoint = /tmp/qcqmc_cli_part/state.ckpt\n");
  REQUIRE(tasks::run_task(part) == 0);
  RunConfig rest = parse_config_text(base +
                                     "steps = 40\noutput_dir = /tmp/qcqmc_cli_rest\n"
                                     "resume = /tmp/qcqmc_cli_part/state.ckpt\n");
  // The resumed run must share the config hash with the full run for the
  // checkpoint to be accepted; rebuild it with the matching hash.
  rest.config_hash = part.config_hash;
  full.config_hash = part.config_hash;
  std::filesystem::remove_all("/tmp/qcqmc_cli_full");
  REQUIRE(tasks::run_task(full) == 0);
  REQUIRE(tasks::run_task(rest) == 0);
  CHECK(slurp("/tmp/qcqmc_cli_full/series.csv") == slurp("/tmp/qcqmc_cli_rest/series.csv"));
  for (const char* dir : {"/tmp/qcqmc_cli_full", "/tmp/qcqmc_cli_part", "/tmp/qcqmc_cli_rest"})
    std::filesystem::remove_all(dir);
}

TEST_CASE("blocking task reads a series csv") {
  std::filesystem::create_directories("/tmp/qcqmc_cli_blk");
  {
    std::ofstream out("/tmp/qcqmc_cli_blk/series.csv");
    out << "tau,e_num,weight,nwalkers\n";
    for (int i = 0; i < 128; ++i)
      out << 0.01 * (i + 1) << "," << -1.5 * 2.0 << "," << 2.0 << ",16\n";
  }
  RunConfig cfg = parse_config_text(
      "task = blocking\nseries = /tmp/qcqmc_cli_blk/series.csv\nseed = 1\n"
      "output_dir = /tmp/qcqmc_cli_blk\n");
  REQUIRE(tasks::run_task(cfg) == 0);
  const std::string summary = slurp("/tmp/qcqmc_cli_blk/summary.json");
  CHECK(summary.find("\"energy\": -1.5") != std::string::npos);
  std::filesystem::remove_all("/tmp/qcqmc_cli_blk");
}

TEST_CASE("embed-check task reports identity deviations") {
  RunConfig cfg = parse_config_text(
      "task = embed-check\nfcidump = " + kFixtures +
      "/h4_sto3g.fcidump\nseed = 13\nactive = 1,2,3\ncore = 0\nvirtual =\n"
      "n_instances = 20\noutput_dir = /tmp/qcqmc_cli_embed\n");
  REQUIRE(tasks::run_task(cfg) == 0);
  const std::string summary = slurp("/tmp/qcqmc_cli_embed/summary.json");
  CHECK(summary.find("max_identity_deviation") != std::string::npos);
  std::filesystem::remove_all("/tmp/qcqmc_cli_embed");
}

}  // TEST_SUITE
