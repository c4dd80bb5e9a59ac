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

#include "qcqmc/embed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/QR>

#include "qcqmc/oracle.hpp"

namespace qcqmc::embed {

namespace {

constexpr double kOverlapFloor = 1e-280;

// W = [K | Kperp] with Kperp an orthonormal completion from the full QR of K.
std::pair<Matrix, cdouble> complete_and_det(const Matrix& k) {
  const int rows = static_cast<int>(k.rows());
  const int cols = static_cast<int>(k.cols());
  if (cols == 0) return {Matrix::Identity(rows, rows), cdouble(1.0)};
  Matrix w(rows, rows);
  w.leftCols(cols) = k;
  if (rows > cols) {
    Eigen::HouseholderQR<Matrix> qr(k);
    const Matrix full = qr.householderQ() * Matrix::Identity(rows, rows);
    w.rightCols(rows - cols) = full.rightCols(rows - cols);
  }
  return {w, w.determinant()};
}

}  // namespace

void SpacePartition::validate(int n_orb) const {
  std::vector<int> seen(n_orb, 0);
  for (const auto* list : {&active, &core, &virt})
    for (int p : *list) {
      if (p < 0 || p >= n_orb) throw std::invalid_argument("space partition: orbital out of range");
      if (seen[p]++) throw std::invalid_argument("space partition: orbital listed twice");
    }
  for (int p = 0; p < n_orb; ++p)
    if (!seen[p]) throw std::invalid_argument("space partition: orbital missing from partition");
}

SlaterDeterminant lift_determinant(const SlaterDeterminant& active_det,
                                   const SlaterDeterminant& core_det, const SpacePartition& part) {
  const int n_orb = core_det.n_orb();
  part.validate(n_orb);
  if (active_det.n_orb() != static_cast<int>(part.active.size()))
    throw std::invalid_argument("lift_determinant: active block size mismatch");
  SlaterDeterminant out;
  auto lift_block = [&](const Matrix& core_block, const Matrix& active_block) {
    Matrix block = Matrix::Zero(n_orb, core_block.cols() + active_block.cols());
    block.leftCols(core_block.cols()) = core_block;
    for (int a = 0; a < active_block.rows(); ++a)
      block.row(part.active[a]).tail(active_block.cols()) = active_block.row(a);
    return block;
  };
  out.up = lift_block(core_det.up, active_det.up);
  out.dn = lift_block(core_det.dn, active_det.dn);
  return out;
}

Projection project_determinant(const SlaterDeterminant& phi, const SlaterDeterminant& core_det,
                               const SpacePartition& part) {
  const int n_orb = phi.n_orb();
  part.validate(n_orb);
  if (core_det.n_orb() != n_orb)
    throw std::invalid_argument("project_determinant: core determinant size mismatch");
  // The core determinant must be supported on the core orbitals.
  for (int p = 0; p < n_orb; ++p) {
    if (std::find(part.core.begin(), part.core.end(), p) != part.core.end()) continue;
    if ((core_det.up.cols() > 0 && core_det.up.row(p).cwiseAbs().maxCoeff() > 1e-12) ||
        (core_det.dn.cols() > 0 && core_det.dn.row(p).cwiseAbs().maxCoeff() > 1e-12))
      throw std::invalid_argument("project_determinant: core determinant leaks outside the core");
  }

  Projection out;
  out.constant = 1.0;
  auto project_block = [&](const Matrix& phi_block, const Matrix& core_block) {
    const int k = static_cast<int>(phi_block.cols());
    const int nc = static_cast<int>(core_block.cols());
    const int ka = k - nc;
    if (ka < 0) throw std::invalid_argument("project_determinant: more core than walker electrons");
    // K = Phi^dag core, A = (active rows of Phi)^dag.
    const Matrix kmat = phi_block.adjoint() * core_block;
    Matrix a(k, part.active.size());
    for (std::size_t col = 0; col < part.active.size(); ++col)
      a.col(col) = phi_block.row(part.active[col]).adjoint();
    auto [w, det_w] = complete_and_det(kmat);
    out.constant *= det_w;
    Matrix tilde_rows;
    if (std::abs(det_w) > kOverlapFloor) {
      tilde_rows = w.partialPivLu().solve(a).bottomRows(ka);
    } else {
      tilde_rows = Matrix::Zero(ka, a.cols());  // annihilated by the core projection
    }
    return Matrix(tilde_rows.adjoint());
  };
  out.active_det.up = project_block(phi.up, core_det.up);
  out.active_det.dn = project_block(phi.dn, core_det.dn);
  return out;
}

cdouble embedded_overlap(const TrialWavefunction& trial_active, const SlaterDeterminant& phi,
                         const SlaterDeterminant& core_det, const SpacePartition& part) {
  const Projection proj = project_determinant(phi, core_det, part);
  if (std::abs(proj.constant) < kOverlapFloor) return 0.0;
  return proj.constant * trial_active.overlap(proj.active_det);
}

cdouble embedded_local_energy(const TrialWavefunction& trial_active, const Hamiltonian& ham_full,
                              const CholeskyFactors& chol_full, const SlaterDeterminant& phi,
                              const SlaterDeterminant& core_det, const SpacePartition& part) {
  const auto [q, lf] = orthonormalize(phi);
  // Complete the walker frame and rotate the integrals into it, exactly as in
  // the direct local energy, but answer overlap queries through the embedding.
  auto complete = [&](const Matrix& block) {
    const int n = static_cast<int>(block.rows());
    const int k = static_cast<int>(block.cols());
    Eigen::HouseholderQR<Matrix> qr(block);
    const Matrix full = qr.householderQ() * Matrix::Identity(n, n);
    Matrix u(n, n);
    u.leftCols(k) = block;
    u.rightCols(n - k) = full.rightCols(n - k);
    return u;
  };
  const Matrix u_up = complete(q.up), u_dn = complete(q.dn);
  const auto ints = oracle::SpinIntegrals::rotated(ham_full, chol_full, u_up, u_dn);
  const uint64_t ref_up = (1ull << q.n_alpha()) - 1, ref_dn = (1ull << q.n_beta()) - 1;

  const cdouble den = std::conj(embedded_overlap(trial_active, q, core_det, part));
  if (std::abs(den) < kOverlapFloor)
    throw std::runtime_error("embedded_local_energy: trial overlap vanishes");
  cdouble num = 0.0;
  oracle::connected_elements(ints, ref_up, ref_dn, [&](uint64_t u2, uint64_t d2, cdouble me) {
    if (me == cdouble(0.0)) return;
    SlaterDeterminant xdet;
    xdet.up = Matrix(u_up.rows(), std::popcount(u2));
    xdet.dn = Matrix(u_dn.rows(), std::popcount(d2));
    int c = 0;
    for (int p = 0; p < u_up.cols(); ++p)
      if (u2 >> p & 1) xdet.up.col(c++) = u_up.col(p);
    c = 0;
    for (int p = 0; p < u_dn.cols(); ++p)
      if (d2 >> p & 1) xdet.dn.col(c++) = u_dn.col(p);
    num += std::conj(embedded_overlap(trial_active, xdet, core_det, part)) * me;
  });
  return num / den;
}

}  // namespace qcqmc::embed
