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

#include <bit>
#include <cmath>

#include "doctest.h"
#include "qcqmc/oracle.hpp"
#include "test_oracles.hpp"

using namespace qcqmc;
using oracle::SectorBasis;
using oracle::SpinIntegrals;

TEST_SUITE("oracle") {

TEST_CASE("sector basis enumerates the right count in ascending order") {
  const auto basis = SectorBasis::build(4, 2, 1);
  CHECK(basis.size() == 6 * 4);
  for (std::size_t i = 1; i < basis.up_masks.size(); ++i)
    CHECK(basis.up_masks[i] > basis.up_masks[i - 1]);
  for (std::size_t iu = 0; iu < basis.up_masks.size(); ++iu)
    for (std::size_t id = 0; id < basis.dn_masks.size(); ++id)
      CHECK(basis.index_of(basis.up_masks[iu], basis.dn_masks[id]) ==
            iu * basis.dn_masks.size() + id);
}

TEST_CASE("sector hamiltonian matches the dense Jordan-Wigner construction") {
  RngStream rng(31);
  const Hamiltonian ham = testing::random_psd_hamiltonian(3, 2, 1, 4, rng);
  const auto basis = SectorBasis::build(3, 2, 1);
  const auto ints = SpinIntegrals::from(ham);
  const Matrix fock = testing::dense_fock_hamiltonian(ham);

  // Compare every column of the sector Hamiltonian against the dense matrix.
  for (std::size_t iu = 0; iu < basis.up_masks.size(); ++iu)
    for (std::size_t id = 0; id < basis.dn_masks.size(); ++id) {
      Vector unit = Vector::Zero(basis.size());
      unit(iu * basis.dn_masks.size() + id) = 1.0;
      Vector hu;
      oracle::apply_hamiltonian(ints, basis, unit, hu);
      const std::size_t col_f = basis.up_masks[iu] | (basis.dn_masks[id] << 3);
      for (std::size_t ju = 0; ju < basis.up_masks.size(); ++ju)
        for (std::size_t jd = 0; jd < basis.dn_masks.size(); ++jd) {
          const std::size_t row_f = basis.up_masks[ju] | (basis.dn_masks[jd] << 3);
          CHECK(std::abs(hu(ju * basis.dn_masks.size() + jd) - fock(row_f, col_f)) < 1e-10);
        }
    }
}

TEST_CASE("sector hamiltonian is hermitian and thread count does not matter") {
  RngStream rng(32);
  const Hamiltonian ham = testing::random_psd_hamiltonian(4, 2, 2, 5, rng);
  const auto basis = SectorBasis::build(4, 2, 2);
  const auto ints = SpinIntegrals::from(ham);
  Matrix h(basis.size(), basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    Vector unit = Vector::Zero(basis.size());
    unit(j) = 1.0;
    Vector hu, hu8;
    oracle::apply_hamiltonian(ints, basis, unit, hu, 1);
    oracle::apply_hamiltonian(ints, basis, unit, hu8, 8);
    CHECK((hu - hu8).cwiseAbs().maxCoeff() == 0.0);
    h.col(j) = hu;
  }
  CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("one-electron system reduces to diagonalizing h1") {
  RngStream rng(33);
  Hamiltonian ham = testing::random_psd_hamiltonian(3, 1, 0, 3, rng);
  const auto res = oracle::fci_solve(ham);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(ham.h1);
  CHECK(res.energy == doctest::Approx(es.eigenvalues()(0) + ham.e_core).epsilon(1e-10));
}

TEST_CASE("fci matches dense diagonalization on a random two-orbital system") {
  RngStream rng(34);
  const Hamiltonian ham = testing::random_psd_hamiltonian(2, 1, 1, 3, rng);
  const auto res = oracle::fci_solve(ham);
  const auto basis = SectorBasis::build(2, 1, 1);
  const auto ints = SpinIntegrals::from(ham);
  Matrix h(4, 4);
  for (int j = 0; j < 4; ++j) {
    Vector unit = Vector::Zero(4);
    unit(j) = 1.0;
    Vector hu;
    oracle::apply_hamiltonian(ints, basis, unit, hu);
    h.col(j) = hu;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  CHECK(res.energy == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-10));
  // Residual check.
  Vector hv;
  oracle::apply_hamiltonian(ints, basis, res.ground, hv);
  CHECK((hv - res.energy * res.ground).norm() < 1e-7);
}

TEST_CASE("davidson path agrees with the dense path") {
  RngStream rng(35);
  // 5 orbitals, 3+2 electrons: dimension 100 (dense); force Davidson by
  // comparing against a 6-orbital sector above the dense cutoff.
  const Hamiltonian ham = testing::random_psd_hamiltonian(6, 3, 3, 6, rng);
  const auto res = oracle::fci_solve(ham);  // dim 400 -> dense? no: 400 <= 512 dense
  // Build an independent dense matrix and compare.
  const auto basis = SectorBasis::build(6, 3, 3);
  const auto ints = SpinIntegrals::from(ham);
  Matrix h(basis.size(), basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j) {
    Vector unit = Vector::Zero(basis.size());
    unit(j) = 1.0;
    Vector hu;
    oracle::apply_hamiltonian(ints, basis, unit, hu);
    h.col(j) = hu;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  CHECK(res.energy == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-9));

  // 7 orbitals, 3+3: dimension 1225 exercises the Davidson branch.
  const Hamiltonian big = testing::random_psd_hamiltonian(7, 3, 3, 6, rng);
  const auto res_d = oracle::fci_solve(big);
  const auto basis7 = SectorBasis::build(7, 3, 3);
  const auto ints7 = SpinIntegrals::from(big);
  Vector hv;
  oracle::apply_hamiltonian(ints7, basis7, res_d.ground, hv);
  CHECK((hv - res_d.energy * res_d.ground).norm() < 1e-7);
}

TEST_CASE("fci dimension guard") {
  RngStream rng(36);
  const Hamiltonian ham = testing::random_psd_hamiltonian(6, 3, 3, 4, rng);
  CHECK_THROWS_WITH_AS(oracle::fci_solve(ham, 100), doctest::Contains("dimension"),
                       std::runtime_error);
}

TEST_CASE("fci energy is invariant under orbital rotations of the integrals") {
  RngStream rng(37);
  const Hamiltonian ham = testing::random_psd_hamiltonian(3, 2, 1, 4, rng);
  // Random real orthogonal rotation.
  const RealMatrix a = testing::random_symmetric(3, rng);
  RealMatrix skew = RealMatrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < i; ++j) {
      skew(i, j) = a(i, j);
      skew(j, i) = -a(i, j);
    }
  const Matrix u = expm(skew.cast<cdouble>());
  const RealMatrix ur = u.real();

  Hamiltonian rot = ham;
  rot.h1 = ur.transpose() * ham.h1 * ur;
  rot.eri = TwoBodyIntegrals(3);
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r <= p; ++r)
        for (int s = 0; s <= r; ++s) {
          double v = 0.0;
          for (int a1 = 0; a1 < 3; ++a1)
            for (int b = 0; b < 3; ++b)
              for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d)
                  v += ur(a1, p) * ur(b, q) * ur(c, r) * ur(d, s) * ham.eri(a1, b, c, d);
          rot.eri.set(p, q, r, s, v);
        }
  CHECK(oracle::fci_solve(rot).energy == doctest::Approx(oracle::fci_solve(ham).energy).epsilon(1e-8));
}

TEST_CASE("imaginary time evolution relaxes monotonically to the ground state") {
  RngStream rng(38);
  const Hamiltonian ham = testing::random_psd_hamiltonian(2, 1, 1, 3, rng);
  const auto fci = oracle::fci_solve(ham);
  const auto basis = SectorBasis::build(2, 1, 1);

  Vector psi0(4);
  for (int i = 0; i < 4; ++i) psi0(i) = cdouble(rng.next_normal(), 0.0);
  if (std::abs(psi0.dot(fci.ground)) < 1e-3) psi0 += fci.ground;

  const auto traj = oracle::imaginary_time_exact(ham, basis, psi0, 0.2, 200);
  for (std::size_t i = 1; i < traj.size(); ++i) CHECK(traj[i].energy <= traj[i - 1].energy + 1e-10);
  CHECK(traj.back().energy == doctest::Approx(fci.energy).epsilon(1e-7));

  // Eigenvector start stays flat; dt = 0 stays constant.
  const auto flat = oracle::imaginary_time_exact(ham, basis, fci.ground, 0.2, 5);
  for (const auto& pt : flat) CHECK(pt.energy == doctest::Approx(fci.energy).epsilon(1e-10));
  const auto frozen = oracle::imaginary_time_exact(ham, basis, psi0, 0.0, 5);
  for (const auto& pt : frozen) CHECK(pt.energy == doctest::Approx(frozen[0].energy).epsilon(1e-12));
}

TEST_CASE("variational energy is the Rayleigh quotient") {
  RngStream rng(39);
  const Hamiltonian ham = testing::random_psd_hamiltonian(4, 2, 2, 4, rng);
  const auto fci = oracle::fci_solve(ham);
  CHECK(oracle::variational_energy_exact(ham, fci.basis, fci.ground) ==
        doctest::Approx(fci.energy).epsilon(1e-10));
  CHECK(oracle::variational_energy_exact(ham, fci.basis, 3.7 * fci.ground) ==
        doctest::Approx(fci.energy).epsilon(1e-10));
  Vector v(fci.basis.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = cdouble(rng.next_normal(), rng.next_normal());
  // Dense quadratic form reference.
  const auto ints = SpinIntegrals::from(ham);
  Vector hv;
  oracle::apply_hamiltonian(ints, fci.basis, v, hv);
  CHECK(oracle::variational_energy_exact(ham, fci.basis, v) ==
        doctest::Approx((v.dot(hv) / v.squaredNorm()).real()).epsilon(1e-10));
  CHECK_THROWS_AS(oracle::variational_energy_exact(ham, fci.basis, Vector::Zero(fci.basis.size())),
                  std::invalid_argument);
}

}  // TEST_SUITE
