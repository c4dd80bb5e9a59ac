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

#include <cmath>
#include <cstdio>
#include <map>

#include "doctest.h"
#include "qcqmc/oracle.hpp"
#include "qcqmc/shadows.hpp"
#include "test_oracles.hpp"

using namespace qcqmc;
namespace sh = qcqmc::shadows;

namespace {

const std::string kFixtures = QCQMC_FIXTURE_DIR;

// tau = (|0> + |Psi>)/sqrt(2) for an arbitrary Psi orthogonal to the vacuum.
qsim::StateVector make_tau(const Vector& psi_full) {
  qsim::StateVector tau;
  tau.n_qubits = static_cast<int>(std::log2(static_cast<double>(psi_full.size())) + 0.5);
  tau.amp = psi_full / psi_full.norm() / std::sqrt(2.0);
  tau.amp(0) += 1.0 / std::sqrt(2.0);
  return tau;
}

Vector random_eta_state(int n_qubits, uint64_t seed) {
  RngStream rng(seed);
  Vector psi = Vector::Zero(1ull << n_qubits);
  for (uint64_t x = 1; x < psi.size(); ++x)
    psi(x) = cdouble(rng.next_normal(), rng.next_normal());
  psi(0) = 0.0;
  return psi / psi.norm();
}

// All 11520 two-qubit Clifford tableaus.
std::vector<stab::CliffordTableau> enumerate_c2() {
  std::vector<stab::CliffordTableau> out;
  auto make_pauli = [](int bits4, bool neg) {
    return stab::Pauli::hermitian(bits4 & 3, (bits4 >> 2) & 3, neg);
  };
  for (int rx0 = 1; rx0 < 16; ++rx0)
    for (int rz0 = 1; rz0 < 16; ++rz0)
      for (int rx1 = 1; rx1 < 16; ++rx1)
        for (int rz1 = 1; rz1 < 16; ++rz1) {
          stab::CliffordTableau t;
          t.n = 2;
          t.x_image = {make_pauli(rx0, false), make_pauli(rx1, false)};
          t.z_image = {make_pauli(rz0, false), make_pauli(rz1, false)};
          if (!t.check_symplectic()) continue;
          for (int signs = 0; signs < 16; ++signs) {
            stab::CliffordTableau s = t;
            s.x_image[0] = make_pauli(rx0, signs & 1);
            s.x_image[1] = make_pauli(rx1, signs & 2);
            s.z_image[0] = make_pauli(rz0, signs & 4);
            s.z_image[1] = make_pauli(rz1, signs & 8);
            out.push_back(std::move(s));
          }
        }
  return out;
}

}  // namespace

TEST_SUITE("shadows") {

TEST_CASE("acquisition records the requested shape") {
  const Vector psi = random_eta_state(3, 5);
  const auto tau = make_tau(psi);
  const auto record = sh::acquire_shadow(tau, sh::Ensemble::global(3), 1, 1, {}, 99);
  CHECK(record.entries.size() == 1);
  CHECK(record.entries[0].outcomes.size() == 1);
  CHECK(record.entries[0].parts.size() == 1);
  CHECK_THROWS_AS(sh::acquire_shadow(tau, sh::Ensemble::global(4), 1, 1, {}, 99),
                  std::invalid_argument);
}

TEST_CASE("identity-forced ensemble on the vacuum returns all-zero outcomes") {
  auto tau = qsim::StateVector::vacuum(3);
  sh::Ensemble ens = sh::Ensemble::global(3);
  ens.force_identity = true;
  const auto record = sh::acquire_shadow(tau, ens, 4, 25, {}, 7);
  for (const auto& entry : record.entries)
    for (uint64_t y : entry.outcomes) CHECK(y == 0);
}

TEST_CASE("acquisition is deterministic across thread counts") {
  const Vector psi = random_eta_state(4, 6);
  const auto tau = make_tau(psi);
  const auto a = sh::acquire_shadow(tau, sh::Ensemble::partitioned({2, 2}), 40, 11, {0.1}, 321, 1);
  const auto b = sh::acquire_shadow(tau, sh::Ensemble::partitioned({2, 2}), 40, 11, {0.1}, 321, 4);
  REQUIRE(a.entries.size() == b.entries.size());
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    CHECK(a.entries[k].outcomes == b.entries[k].outcomes);
    for (std::size_t p = 0; p < a.entries[k].parts.size(); ++p) {
      CHECK(a.entries[k].parts[p].i_set == b.entries[k].parts[p].i_set);
      CHECK(a.entries[k].parts[p].delta_post_offset == b.entries[k].parts[p].delta_post_offset);
    }
  }
}

TEST_CASE("stabilizer-state enumeration has the expected count and POVM identity") {
  for (int n : {1, 2, 3}) {
    const auto states = testing::enumerate_stabilizer_states(n);
    double expected = std::pow(2.0, n);
    for (int k = 1; k <= n; ++k) expected *= std::pow(2.0, k) + 1.0;
    REQUIRE(static_cast<double>(states.size()) == expected);

    // Exact channel identity: (2^n + 1) M(rho) - I = rho with
    // M(rho) = sum_s w <s|rho|s> |s><s| and w = 2^n / |stab_n|.
    const Vector psi = random_eta_state(n, 100 + n);
    const auto tau = make_tau(psi);
    const Matrix rho = tau.amp * tau.amp.adjoint();
    Matrix channel = Matrix::Zero(rho.rows(), rho.cols());
    double total_prob = 0.0;
    const double w = std::pow(2.0, n) / static_cast<double>(states.size());
    for (const auto& s : states) {
      const double prob = (s.adjoint() * rho * s)(0, 0).real();
      channel += w * prob * s * s.adjoint();
      total_prob += w * prob;
    }
    CHECK(total_prob == doctest::Approx(1.0).epsilon(1e-10));
    const Matrix inv =
        (std::pow(2.0, n) + 1.0) * channel - Matrix::Identity(rho.rows(), rho.cols());
    CHECK((inv - rho).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("uniform clifford measurements cover stabilizer states uniformly at n=2") {
  const auto group = enumerate_c2();
  const auto states = testing::enumerate_stabilizer_states(2);
  std::vector<int> hits(states.size(), 0);
  for (const auto& u : group) {
    const Matrix du = stab::dense_unitary(u);
    for (int b = 0; b < 4; ++b) {
      const Vector s = du.adjoint().col(b);
      bool matched = false;
      for (std::size_t i = 0; i < states.size(); ++i)
        if (std::abs(std::abs(states[i].dot(s)) - 1.0) < 1e-9) {
          ++hits[i];
          matched = true;
          break;
        }
      REQUIRE(matched);
    }
  }
  for (int h : hits) CHECK(h == 11520 * 4 / 60);
}

TEST_CASE("exact-expectation estimate over the full two-qubit ensemble is unbiased") {
  const Vector psi = random_eta_state(2, 17);
  const auto tau = make_tau(psi);
  const auto group = enumerate_c2();
  for (uint64_t beta : {1ull, 2ull, 3ull}) {
    cdouble expectation = 0.0;
    for (const auto& u : group) {
      const stab::GForm g = stab::to_measurement_form(u);
      const Matrix dg = stab::dense_unitary(stab::gform_circuit(g), 2);
      const Vector rotated = dg * tau.amp;
      for (uint64_t y = 0; y < 4; ++y) {
        const double prob = std::norm(rotated(y));
        if (prob < 1e-300) continue;
        const cdouble kernel = 2.0 * (4.0 + 1.0) * stab::gform_bra_amplitude(g, y, beta) *
                               stab::gform_ket0_amplitude(g, y);
        expectation += prob * kernel / static_cast<double>(group.size());
      }
    }
    const cdouble truth = std::sqrt(2.0) * tau.amp(beta);
    CHECK(std::abs(expectation - truth) < 1e-12);
  }
}

TEST_CASE("the record estimator matches a direct kernel average") {
  const Vector psi = random_eta_state(4, 21);
  const auto tau = make_tau(psi);
  const auto record = sh::acquire_shadow(tau, sh::Ensemble::global(4), 60, 10, {}, 5);
  const uint64_t beta = 0b0110;
  const auto est = sh::estimate_basis_overlap(record, beta);
  cdouble direct = 0.0;
  for (const auto& entry : record.entries) {
    cdouble acc = 0.0;
    for (uint64_t y : entry.outcomes)
      acc += 2.0 * (16.0 + 1.0) * stab::gform_bra_amplitude(entry.parts[0], y, beta) *
             stab::gform_ket0_amplitude(entry.parts[0], y);
    direct += acc / static_cast<double>(entry.outcomes.size());
  }
  direct /= static_cast<double>(record.entries.size());
  CHECK(std::abs(est.value - direct) < 1e-12);
}

TEST_CASE("sampled estimates converge to the truth within error bars") {
  const Vector psi = random_eta_state(4, 33);
  const auto tau = make_tau(psi);
  const auto record = sh::acquire_shadow(tau, sh::Ensemble::global(4), 3000, 20, {}, 13);
  for (uint64_t beta : {0b0011ull, 0b0101ull, 0b1110ull}) {
    const auto est = sh::estimate_basis_overlap(record, beta);
    const cdouble truth = std::sqrt(2.0) * tau.amp(beta);
    CHECK(std::abs(est.value - truth) < 5.0 * est.std_error + 1e-12);
  }
}

TEST_CASE("standard error scales as one over the square root of the clifford count") {
  const Vector psi = random_eta_state(4, 41);
  const auto tau = make_tau(psi);
  const uint64_t beta = 0b0101;
  double err_small = 0.0, err_large = 0.0;
  const int reps = 6;
  for (int rep = 0; rep < reps; ++rep) {
    const auto small = sh::acquire_shadow(tau, sh::Ensemble::global(4), 400, 10, {}, 1000 + rep);
    const auto large = sh::acquire_shadow(tau, sh::Ensemble::global(4), 1600, 10, {}, 2000 + rep);
    err_small += sh::estimate_basis_overlap(small, beta).std_error / reps;
    err_large += sh::estimate_basis_overlap(large, beta).std_error / reps;
  }
  CHECK(err_small / err_large == doctest::Approx(2.0).epsilon(0.2));
}

TEST_CASE("partitioned and global estimators agree within errors") {
  const Vector psi = random_eta_state(4, 55);
  const auto tau = make_tau(psi);
  const auto global = sh::acquire_shadow(tau, sh::Ensemble::global(4), 2500, 12, {}, 3);
  const auto part = sh::acquire_shadow(tau, sh::Ensemble::partitioned({2, 2}), 2500, 12, {}, 4);
  for (uint64_t beta : {0b0101ull, 0b0110ull}) {
    const auto eg = sh::estimate_basis_overlap(global, beta);
    const auto ep = sh::estimate_basis_overlap(part, beta);
    const double comb = std::sqrt(eg.std_error * eg.std_error + ep.std_error * ep.std_error);
    CHECK(std::abs(eg.value - ep.value) < 4.0 * comb + 1e-12);
  }
}

TEST_CASE("depolarizing noise rescales raw overlaps and cancels in ratios") {
  const Vector psi = random_eta_state(4, 77);
  const auto tau = make_tau(psi);
  const uint64_t b1 = 0b0011, b2 = 0b0101;
  const auto clean = sh::acquire_shadow(tau, sh::Ensemble::global(4), 4000, 25, {}, 31);
  const auto e1_clean = sh::estimate_basis_overlap(clean, b1);
  const auto e2_clean = sh::estimate_basis_overlap(clean, b2);
  for (double p : {0.2, 0.5}) {
    const auto noisy = sh::acquire_shadow(tau, sh::Ensemble::global(4), 4000, 25, {p}, 32);
    const auto e1 = sh::estimate_basis_overlap(noisy, b1);
    const auto e2 = sh::estimate_basis_overlap(noisy, b2);
    // Raw overlaps shrink by (1 - p).
    const cdouble truth1 = std::sqrt(2.0) * tau.amp(b1);
    CHECK(std::abs(e1.value - (1.0 - p) * truth1) < 4.0 * e1.std_error + 1e-12);
    // Ratios are p-independent.
    const cdouble ratio_noisy = e1.value / e2.value;
    const cdouble ratio_clean = e1_clean.value / e2_clean.value;
    const double rerr = std::abs(ratio_noisy) *
                        (e1.std_error / std::abs(e1.value) + e2.std_error / std::abs(e2.value) +
                         e1_clean.std_error / std::abs(e1_clean.value) +
                         e2_clean.std_error / std::abs(e2_clean.value));
    CHECK(std::abs(ratio_noisy - ratio_clean) < 4.0 * rerr);
  }
}

TEST_CASE("reconstruction error shrinks with more cliffords") {
  CircuitTrialSpec spec;
  spec.n_orb = 2;
  spec.pairs = {{0, 1}};
  spec.pp_thetas = {0.61};
  const auto tau = prepare_tau(spec);
  auto [basis, amps] = build_pp_state(spec);

  double prev_err = 1e9;
  for (int n_cliffords : {150, 2400}) {
    const auto record =
        sh::acquire_shadow(tau, sh::Ensemble::partitioned({2, 2}), n_cliffords, 10, {}, 71);
    const auto trial = sh::reconstruct_trial(record, 2, 1, 1);
    double max_err = 0.0;
    for (std::size_t i = 0; i < basis.size(); ++i)
      max_err = std::max(max_err, std::abs(trial.amplitudes()(i) - amps(i)));
    CHECK(max_err < prev_err);
    prev_err = max_err;
  }
}

TEST_CASE("reconstructed amplitudes at zero-amplitude configurations are consistent with zero") {
  CircuitTrialSpec spec;
  spec.n_orb = 2;
  spec.pairs = {{0, 1}};
  spec.pp_thetas = {0.0};  // amplitude sits entirely on the bonding configuration
  const auto tau = prepare_tau(spec);
  const auto record = sh::acquire_shadow(tau, sh::Ensemble::global(4), 1200, 10, {}, 72);
  const auto trial = sh::reconstruct_trial(record, 2, 1, 1);
  const auto& basis = trial.basis();
  const std::size_t idx = basis.index_of(0b10, 0b10);  // antibonding: amplitude 0
  CHECK(std::abs(trial.amplitudes()(idx)) <
        4.0 * trial.amplitude_std_errors()(idx) + 1e-12);
}

TEST_CASE("variational energy of exact amplitudes is the fci energy and is scale invariant") {
  const Hamiltonian ham = parse_fcidump_file(kFixtures + "/h2_sto3g.fcidump");
  const auto fci = oracle::fci_solve(ham);
  auto trial = TrialWavefunction::multi_det(fci.basis, fci.ground);
  CHECK(sh::variational_energy(trial, ham) == doctest::Approx(fci.energy).epsilon(1e-10));
  auto scaled = TrialWavefunction::multi_det(fci.basis, 0.37 * fci.ground);
  CHECK(sh::variational_energy(scaled, ham) == doctest::Approx(fci.energy).epsilon(1e-10));
}

TEST_CASE("sampling overlap: identical states give exactly one, disjoint give zero") {
  RngStream rng(81);
  const int n = 3;
  Vector phi = Vector::Zero(8);
  phi(1) = cdouble(0.6, 0.0);
  phi(2) = cdouble(0.0, 0.8);
  sh::AmplitudeSource src;
  src.amplitude = [&](uint64_t x) { return phi(x); };
  src.sample = [&](RngStream& r) { return r.next_double() < 0.36 ? 1ull : 2ull; };

  const auto same = sh::sampling_overlap([&](uint64_t x) { return phi(x); }, src, 500, rng);
  CHECK(std::abs(same.value - 1.0) < 1e-14);
  CHECK(same.std_error < 1e-14);

  Vector psi = Vector::Zero(8);
  psi(5) = 1.0;  // disjoint support
  const auto ortho = sh::sampling_overlap([&](uint64_t x) { return psi(x); }, src, 500, rng);
  CHECK(std::abs(ortho.value) < 1e-14);
  (void)n;
}

TEST_CASE("sampling overlap matches the dense inner product for random states") {
  RngStream rng(82);
  Vector psi(16), phi(16);
  for (int i = 0; i < 16; ++i) {
    psi(i) = cdouble(rng.next_normal(), rng.next_normal());
    phi(i) = cdouble(rng.next_normal(), rng.next_normal());
  }
  psi /= psi.norm();
  phi /= phi.norm();
  std::vector<double> cdf(16);
  double acc = 0.0;
  for (int i = 0; i < 16; ++i) {
    acc += std::norm(phi(i));
    cdf[i] = acc;
  }
  sh::AmplitudeSource src;
  src.amplitude = [&](uint64_t x) { return phi(x); };
  src.sample = [&](RngStream& r) {
    const double u = r.next_double() * acc;
    return static_cast<uint64_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
  };
  const auto est =
      sh::sampling_overlap([&](uint64_t x) { return psi(x); }, src, 100000, rng);
  const cdouble truth = psi.dot(phi);  // <psi|phi>
  CHECK(std::abs(est.value - truth) < 3.5 * est.std_error);
}

TEST_CASE("sampling overlap rejects when the sampler keeps hitting zero amplitudes") {
  RngStream rng(83);
  Vector phi = Vector::Zero(4);
  phi(1) = 1.0;
  sh::AmplitudeSource src;
  src.amplitude = [&](uint64_t x) { return phi(x); };
  src.sample = [&](RngStream&) { return 0ull; };  // always a zero-amplitude point
  CHECK_THROWS_WITH_AS(sh::sampling_overlap([&](uint64_t x) { return phi(x); }, src, 100, rng),
                       doctest::Contains("zero amplitude"), std::runtime_error);
}

TEST_CASE("shadow record files round trip") {
  const Vector psi = random_eta_state(4, 91);
  const auto tau = make_tau(psi);
  const auto record = sh::acquire_shadow(tau, sh::Ensemble::partitioned({2, 2}), 12, 7, {0.25}, 17);
  const std::string path = "/tmp/qcqmc_test_record.shdw";
  sh::write_shadow_record(record, path);
  const auto back = sh::read_shadow_record(path);
  CHECK(back.n_qubits == record.n_qubits);
  CHECK(back.shots_per_clifford == record.shots_per_clifford);
  CHECK(back.noise.depolarizing_p == record.noise.depolarizing_p);
  CHECK(back.seed == record.seed);
  REQUIRE(back.entries.size() == record.entries.size());
  for (std::size_t k = 0; k < record.entries.size(); ++k) {
    CHECK(back.entries[k].outcomes == record.entries[k].outcomes);
    for (std::size_t p = 0; p < record.entries[k].parts.size(); ++p) {
      CHECK(back.entries[k].parts[p].i_set == record.entries[k].parts[p].i_set);
      CHECK(back.entries[k].parts[p].gamma == record.entries[k].parts[p].gamma);
      CHECK(back.entries[k].parts[p].delta == record.entries[k].parts[p].delta);
      CHECK(back.entries[k].parts[p].delta_post == record.entries[k].parts[p].delta_post);
    }
  }
  // Estimates from the file match estimates from memory.
  const auto e1 = sh::estimate_basis_overlap(record, 0b0101);
  const auto e2 = sh::estimate_basis_overlap(back, 0b0101);
  CHECK(e1.value == e2.value);
  std::remove(path.c_str());
}

}  // TEST_SUITE
