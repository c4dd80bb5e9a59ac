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

#include "qcqmc/slater.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

namespace qcqmc {

SlaterDeterminant SlaterDeterminant::aufbau(int n_orb, int n_alpha, int n_beta) {
  const uint64_t up = (n_alpha >= 64) ? ~0ull : ((1ull << n_alpha) - 1);
  const uint64_t dn = (n_beta >= 64) ? ~0ull : ((1ull << n_beta) - 1);
  return from_occupation(n_orb, up, dn);
}

SlaterDeterminant SlaterDeterminant::from_occupation(int n_orb, uint64_t occ_up, uint64_t occ_dn) {
  SlaterDeterminant det;
  det.up = Matrix::Zero(n_orb, std::popcount(occ_up));
  det.dn = Matrix::Zero(n_orb, std::popcount(occ_dn));
  int col = 0;
  for (int p = 0; p < n_orb; ++p)
    if (occ_up >> p & 1) det.up(p, col++) = 1.0;
  col = 0;
  for (int p = 0; p < n_orb; ++p)
    if (occ_dn >> p & 1) det.dn(p, col++) = 1.0;
  return det;
}

namespace {

cdouble sector_overlap(const Matrix& bra, const Matrix& ket) {
  if (bra.rows() != ket.rows() || bra.cols() != ket.cols())
    throw std::invalid_argument("slater overlap: shape mismatch");
  if (bra.cols() == 0) return 1.0;
  return (bra.adjoint() * ket).determinant();
}

Matrix sector_greens(const Matrix& t, const Matrix& w) {
  const Matrix m = t.adjoint() * w;
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) throw std::runtime_error("walker orthogonal to trial");
  return w * lu.solve(t.adjoint());
}

}  // namespace

cdouble overlap(const SlaterDeterminant& bra, const SlaterDeterminant& ket) {
  return sector_overlap(bra.up, ket.up) * sector_overlap(bra.dn, ket.dn);
}

std::pair<Matrix, Matrix> greens_function(const SlaterDeterminant& trial,
                                          const SlaterDeterminant& walker) {
  return {sector_greens(trial.up, walker.up), sector_greens(trial.dn, walker.dn)};
}

Matrix expm(const Matrix& a) {
  const int n = static_cast<int>(a.rows());
  if (n == 0) return a;
  const Matrix comm = a * a.adjoint() - a.adjoint() * a;
  if (comm.cwiseAbs().maxCoeff() < 1e-13 * std::max(1.0, a.cwiseAbs().maxCoeff())) {
    Eigen::ComplexEigenSolver<Matrix> es(a);
    const Vector phases = es.eigenvalues().array().exp();
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().inverse();
  }
  // Scaling and squaring with a plain Taylor series.
  int squarings = 0;
  double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  while (norm > 0.5) {
    norm *= 0.5;
    ++squarings;
  }
  const Matrix b = a / std::pow(2.0, squarings);
  Matrix result = Matrix::Identity(n, n);
  Matrix term = Matrix::Identity(n, n);
  for (int k = 1; k <= 24; ++k) {
    term = (term * b / static_cast<double>(k)).eval();
    result += term;
    if (term.cwiseAbs().maxCoeff() < 1e-18) break;
  }
  for (int s = 0; s < squarings; ++s) result = (result * result).eval();
  return result;
}

SlaterDeterminant apply_exp_onebody(const SlaterDeterminant& det, const Matrix& a_up,
                                    const Matrix& a_dn) {
  if (a_up.rows() != det.n_orb() || a_up.cols() != det.n_orb() || a_dn.rows() != det.n_orb() ||
      a_dn.cols() != det.n_orb())
    throw std::invalid_argument("apply_exp_onebody: generator shape mismatch");
  SlaterDeterminant out;
  out.up = expm(a_up) * det.up;
  out.dn = expm(a_dn) * det.dn;
  return out;
}

namespace {

std::pair<Matrix, double> sector_orthonormalize(const Matrix& w) {
  if (w.cols() == 0) return {w, 0.0};
  Eigen::HouseholderQR<Matrix> qr(w);
  Matrix q = qr.householderQ() * Matrix::Identity(w.rows(), w.cols());
  const Matrix r = qr.matrixQR().topRows(w.cols()).triangularView<Eigen::Upper>();
  double log_factor = 0.0;
  for (int j = 0; j < w.cols(); ++j) {
    const double mag = std::abs(r(j, j));
    if (mag < 1e-300) throw std::runtime_error("orthonormalize: rank-deficient determinant");
    q.col(j) *= r(j, j) / mag;  // absorb the diagonal phase so R_jj > 0
    log_factor += std::log(mag);
  }
  return {std::move(q), log_factor};
}

}  // namespace

std::pair<SlaterDeterminant, double> orthonormalize(const SlaterDeterminant& det) {
  auto [qu, lu] = sector_orthonormalize(det.up);
  auto [qd, ld] = sector_orthonormalize(det.dn);
  return {SlaterDeterminant{std::move(qu), std::move(qd)}, lu + ld};
}

cdouble block_minor(const Matrix& block, uint64_t occ) {
  const int k = static_cast<int>(block.cols());
  if (std::popcount(occ) != k) throw std::invalid_argument("det_amplitude: wrong Hamming weight");
  if (k == 0) return 1.0;
  Matrix minor(k, k);
  int row = 0;
  for (int p = 0; p < block.rows(); ++p)
    if (occ >> p & 1) minor.row(row++) = block.row(p);
  if (k == 1) return minor(0, 0);
  if (k == 2) return minor(0, 0) * minor(1, 1) - minor(0, 1) * minor(1, 0);
  return minor.determinant();
}

cdouble det_amplitude(const SlaterDeterminant& det, uint64_t occ_up, uint64_t occ_dn) {
  return block_minor(det.up, occ_up) * block_minor(det.dn, occ_dn);
}

void write_slater_file(const SlaterDeterminant& det, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write slater file: " + path);
  out.precision(17);
  out << "SLATER v1 " << det.n_orb() << " " << det.n_alpha() << " " << det.n_beta() << "\n";
  for (const Matrix* block : {&det.up, &det.dn})
    for (int p = 0; p < block->rows(); ++p)
      for (int c = 0; c < block->cols(); ++c)
        out << (*block)(p, c).real() << " " << (*block)(p, c).imag() << "\n";
}

SlaterDeterminant read_slater_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open slater file: " + path);
  std::string magic, version;
  int n_orb, n_alpha, n_beta;
  if (!(in >> magic >> version >> n_orb >> n_alpha >> n_beta) || magic != "SLATER" || version != "v1")
    throw std::runtime_error("bad slater file header: " + path);
  SlaterDeterminant det;
  det.up = Matrix(n_orb, n_alpha);
  det.dn = Matrix(n_orb, n_beta);
  for (Matrix* block : {&det.up, &det.dn})
    for (int p = 0; p < block->rows(); ++p)
      for (int c = 0; c < block->cols(); ++c) {
        double re, im;
        if (!(in >> re >> im)) throw std::runtime_error("truncated slater file: " + path);
        (*block)(p, c) = cdouble(re, im);
      }
  return det;
}

}  // namespace qcqmc
