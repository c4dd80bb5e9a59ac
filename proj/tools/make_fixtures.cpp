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

// Fixture generator: builds the shipped FCIDUMP and trial-determinant files
// for hydrogen clusters in an STO-3G basis (s-type Gaussians only, so every
// integral has a closed form), plus a synthetic random-PSD instance. The
// engine itself never generates integrals; this tool exists so the fixtures
// are reproducible from source.

#include <array>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "qcqmc/hamiltonian.hpp"
#include "qcqmc/oracle.hpp"
#include "qcqmc/rng.hpp"
#include "qcqmc/slater.hpp"
#include "qcqmc/types.hpp"

using namespace qcqmc;

namespace {

constexpr double kBohrPerAngstrom = 1.0 / 0.52917721092;

struct Primitive {
  double exponent;
  double coeff;  // contraction coefficient times primitive norm
};

struct Shell {
  std::array<double, 3> center;
  std::vector<Primitive> prims;
};

Shell sto3g_hydrogen(std::array<double, 3> center_bohr) {
  // STO-3G exponents/coefficients for H 1s.
  const double alpha[3] = {3.425250914, 0.6239137298, 0.1688554040};
  const double c[3] = {0.1543289673, 0.5353281423, 0.4446345422};
  Shell s;
  s.center = center_bohr;
  for (int i = 0; i < 3; ++i)
    s.prims.push_back({alpha[i], c[i] * std::pow(2.0 * alpha[i] / M_PI, 0.75)});
  return s;
}

double dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  double d = 0.0;
  for (int i = 0; i < 3; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

double boys0(double t) {
  if (t < 1e-12) return 1.0 - t / 3.0;
  return 0.5 * std::sqrt(M_PI / t) * std::erf(std::sqrt(t));
}

std::array<double, 3> gaussian_product_center(double a, const std::array<double, 3>& ca, double b,
                                              const std::array<double, 3>& cb) {
  std::array<double, 3> p;
  for (int i = 0; i < 3; ++i) p[i] = (a * ca[i] + b * cb[i]) / (a + b);
  return p;
}

struct AoIntegrals {
  RealMatrix s, hcore;
  TwoBodyIntegrals eri;
  double e_nuc;
};

AoIntegrals compute_ao_integrals(const std::vector<Shell>& shells,
                                 const std::vector<std::array<double, 3>>& nuclei,
                                 const std::vector<double>& charges) {
  const int n = static_cast<int>(shells.size());
  AoIntegrals out;
  out.s = RealMatrix::Zero(n, n);
  RealMatrix t = RealMatrix::Zero(n, n), v = RealMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double r2 = dist2(shells[i].center, shells[j].center);
      for (const auto& pa : shells[i].prims)
        for (const auto& pb : shells[j].prims) {
          const double p = pa.exponent + pb.exponent;
          const double mu = pa.exponent * pb.exponent / p;
          const double pre = pa.coeff * pb.coeff * std::exp(-mu * r2);
          const double s_ab = pre * std::pow(M_PI / p, 1.5);
          out.s(i, j) += s_ab;
          t(i, j) += mu * (3.0 - 2.0 * mu * r2) * s_ab;
          const auto pc = gaussian_product_center(pa.exponent, shells[i].center, pb.exponent,
                                                  shells[j].center);
          for (std::size_t c = 0; c < nuclei.size(); ++c)
            v(i, j) -= charges[c] * pre * (2.0 * M_PI / p) * boys0(p * dist2(pc, nuclei[c]));
        }
    }

  // Normalize the contracted functions.
  RealVector norm(n);
  for (int i = 0; i < n; ++i) norm(i) = 1.0 / std::sqrt(out.s(i, i));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      out.s(i, j) *= norm(i) * norm(j);
      t(i, j) *= norm(i) * norm(j);
      v(i, j) *= norm(i) * norm(j);
    }
  out.hcore = t + v;

  out.eri = TwoBodyIntegrals(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j)
      for (int k = 0; k <= i; ++k)
        for (int l = 0; l <= k; ++l) {
          const double rij = dist2(shells[i].center, shells[j].center);
          const double rkl = dist2(shells[k].center, shells[l].center);
          double acc = 0.0;
          for (const auto& pa : shells[i].prims)
            for (const auto& pb : shells[j].prims) {
              const double p = pa.exponent + pb.exponent;
              const double mup = pa.exponent * pb.exponent / p;
              const auto cp = gaussian_product_center(pa.exponent, shells[i].center, pb.exponent,
                                                      shells[j].center);
              const double prep = pa.coeff * pb.coeff * std::exp(-mup * rij);
              for (const auto& pc : shells[k].prims)
                for (const auto& pd : shells[l].prims) {
                  const double q = pc.exponent + pd.exponent;
                  const double muq = pc.exponent * pd.exponent / q;
                  const auto cq = gaussian_product_center(pc.exponent, shells[k].center,
                                                          pd.exponent, shells[l].center);
                  const double prefactor = prep * pc.coeff * pd.coeff * std::exp(-muq * rkl) *
                                           2.0 * std::pow(M_PI, 2.5) /
                                           (p * q * std::sqrt(p + q));
                  acc += prefactor * boys0(p * q / (p + q) * dist2(cp, cq));
                }
            }
          out.eri.set(i, j, k, l, acc * norm(i) * norm(j) * norm(k) * norm(l));
        }

  out.e_nuc = 0.0;
  for (std::size_t a = 0; a < nuclei.size(); ++a)
    for (std::size_t b = a + 1; b < nuclei.size(); ++b)
      out.e_nuc += charges[a] * charges[b] / std::sqrt(dist2(nuclei[a], nuclei[b]));
  return out;
}

// Transform (h, eri) by an orthogonal matrix x (columns = new orbitals).
Hamiltonian transform_basis(const AoIntegrals& ao, const RealMatrix& x, int n_alpha, int n_beta) {
  const int n = static_cast<int>(x.cols());
  Hamiltonian ham;
  ham.n_orb = n;
  ham.n_alpha = n_alpha;
  ham.n_beta = n_beta;
  ham.e_core = ao.e_nuc;
  ham.h1 = x.transpose() * ao.hcore * x;
  ham.eri = TwoBodyIntegrals(n);
  const int nao = static_cast<int>(x.rows());
  std::vector<RealMatrix> half(nao * nao);
  for (int a = 0; a < nao; ++a)
    for (int b = 0; b < nao; ++b) {
      RealMatrix m(nao, nao);
      for (int c = 0; c < nao; ++c)
        for (int d = 0; d < nao; ++d) m(c, d) = ao.eri(a, b, c, d);
      half[a * nao + b] = x.transpose() * m * x;
    }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r <= p; ++r)
        for (int s = 0; s <= r; ++s) {
          double acc = 0.0;
          for (int a = 0; a < nao; ++a)
            for (int b = 0; b < nao; ++b) acc += x(a, p) * x(b, q) * half[a * nao + b](r, s);
          ham.eri.set(p, q, r, s, acc);
        }
  return ham;
}

RealMatrix lowdin(const RealMatrix& s) {
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(s);
  return es.eigenvectors() * es.eigenvalues().array().rsqrt().matrix().asDiagonal() *
         es.eigenvectors().transpose();
}

struct UhfResult {
  RealMatrix c_up, c_dn;  // occupied columns in the orthonormal basis
  double energy = 0.0;
  bool converged = false;
};

UhfResult run_uhf(const Hamiltonian& ham, double mix_angle) {
  const int n = ham.n_orb;
  const int na = ham.n_alpha, nb = ham.n_beta;
  auto coulomb = [&](const RealMatrix& d) {
    RealMatrix j = RealMatrix::Zero(n, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) j(p, q) += ham.eri(p, q, r, s) * d(r, s);
    return j;
  };
  auto exchange = [&](const RealMatrix& d) {
    RealMatrix k = RealMatrix::Zero(n, n);
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q)
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s) k(p, q) += ham.eri(p, r, s, q) * d(r, s);
    return k;
  };

  Eigen::SelfAdjointEigenSolver<RealMatrix> core(ham.h1);
  RealMatrix c_up = core.eigenvectors().leftCols(na);
  RealMatrix c_dn = core.eigenvectors().leftCols(nb);
  if (na < n && na > 0) {  // break spin symmetry by mixing HOMO and LUMO
    const RealVector homo = c_up.col(na - 1), lumo = core.eigenvectors().col(na);
    c_up.col(na - 1) = std::cos(mix_angle) * homo + std::sin(mix_angle) * lumo;
    c_dn.col(nb - 1) = std::cos(mix_angle) * homo - std::sin(mix_angle) * lumo;
  }

  UhfResult res;
  RealMatrix d_up = c_up * c_up.transpose(), d_dn = c_dn * c_dn.transpose();
  for (int iter = 0; iter < 1000; ++iter) {
    const RealMatrix j = coulomb(d_up + d_dn);
    const RealMatrix f_up = ham.h1 + j - exchange(d_up);
    const RealMatrix f_dn = ham.h1 + j - exchange(d_dn);
    const double e_new =
        ham.e_core + 0.5 * ((d_up + d_dn).cwiseProduct(ham.h1).sum() +
                            d_up.cwiseProduct(f_up).sum() + d_dn.cwiseProduct(f_dn).sum());
    Eigen::SelfAdjointEigenSolver<RealMatrix> eu(f_up), ed(f_dn);
    c_up = eu.eigenvectors().leftCols(na);
    c_dn = ed.eigenvectors().leftCols(nb);
    const double damp = iter < 10 ? 0.4 : 1.0;
    const RealMatrix d_up_new = (1 - damp) * d_up + damp * c_up * c_up.transpose();
    const RealMatrix d_dn_new = (1 - damp) * d_dn + damp * c_dn * c_dn.transpose();
    const double delta =
        (d_up_new - d_up).cwiseAbs().maxCoeff() + (d_dn_new - d_dn).cwiseAbs().maxCoeff();
    d_up = d_up_new;
    d_dn = d_dn_new;
    if (delta < 1e-13 && std::abs(e_new - res.energy) < 1e-13) {
      res.energy = e_new;
      res.converged = true;
      break;
    }
    res.energy = e_new;
  }
  res.c_up = c_up;
  res.c_dn = c_dn;
  return res;
}

Hamiltonian build_hydrogen_cluster(const std::vector<std::array<double, 3>>& coords_angstrom,
                                   int n_alpha, int n_beta) {
  std::vector<Shell> shells;
  std::vector<std::array<double, 3>> nuclei;
  std::vector<double> charges;
  for (const auto& c : coords_angstrom) {
    std::array<double, 3> bohr{c[0] * kBohrPerAngstrom, c[1] * kBohrPerAngstrom,
                               c[2] * kBohrPerAngstrom};
    shells.push_back(sto3g_hydrogen(bohr));
    nuclei.push_back(bohr);
    charges.push_back(1.0);
  }
  const AoIntegrals ao = compute_ao_integrals(shells, nuclei, charges);
  const RealMatrix x = lowdin(ao.s);
  const Hamiltonian lowdin_ham = transform_basis(ao, x, n_alpha, n_beta);

  // Natural-orbital basis of the FCI ground state, occupations descending.
  const auto fci = oracle::fci_solve(lowdin_ham);
  const RealMatrix dm = oracle::one_body_density(fci.basis, fci.ground).real();
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(dm);
  const int n = lowdin_ham.n_orb;
  RealMatrix no(n, n);
  for (int i = 0; i < n; ++i) no.col(i) = es.eigenvectors().col(n - 1 - i);
  for (int i = 0; i < n; ++i) {  // deterministic sign: largest component positive
    int arg = 0;
    no.col(i).cwiseAbs().maxCoeff(&arg);
    if (no(arg, i) < 0) no.col(i) *= -1.0;
  }
  return transform_basis(ao, x * no, n_alpha, n_beta);
}

void emit_random_psd(const std::string& path) {
  RngStream rng(20260808);
  Hamiltonian ham;
  ham.n_orb = 3;
  ham.n_alpha = 2;
  ham.n_beta = 1;
  ham.e_core = 0.5;
  ham.h1 = RealMatrix::Zero(3, 3);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j <= i; ++j) ham.h1(i, j) = ham.h1(j, i) = rng.next_normal();
  ham.eri = TwoBodyIntegrals(3);
  std::vector<RealMatrix> ls;
  for (int g = 0; g < 4; ++g) {
    RealMatrix l(3, 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j <= i; ++j) l(i, j) = l(j, i) = 0.3 * rng.next_normal();
    ls.push_back(l);
  }
  for (int p = 0; p < 3; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r <= p; ++r)
        for (int s = 0; s <= r; ++s) {
          double v = 0.0;
          for (const auto& l : ls) v += l(p, q) * l(r, s);
          ham.eri.set(p, q, r, s, v);
        }
  write_fcidump_file(ham, path);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string outdir = argc > 1 ? argv[1] : "fixtures";

  // Square H4, side 1.23 Angstrom.
  const std::vector<std::array<double, 3>> h4 = {
      {0, 0, 0}, {0, 0, 1.23}, {1.23, 0, 0}, {1.23, 0, 1.23}};
  const Hamiltonian h4_ham = build_hydrogen_cluster(h4, 2, 2);
  write_fcidump_file(h4_ham, outdir + "/h4_sto3g.fcidump");
  const auto h4_fci = oracle::fci_solve(h4_ham);
  std::printf("H4/STO-3G (natural-orbital basis): E_FCI = %.6f\n", h4_fci.energy);

  // Dominant configuration amplitudes, used to pick the pairing layout.
  const auto& basis = h4_fci.basis;
  auto coeff = [&](uint64_t up, uint64_t dn) {
    return h4_fci.ground(basis.index_of(up, dn)).real();
  };
  std::printf("  c(0011,0011)=%+.4f c(0101,0101)=%+.4f c(1001,1001)=%+.4f\n", coeff(3, 3),
              coeff(5, 5), coeff(9, 9));
  std::printf("  c(0110,0110)=%+.4f c(1010,1010)=%+.4f c(1100,1100)=%+.4f\n", coeff(6, 6),
              coeff(10, 10), coeff(12, 12));

  // UHF trial in the fixture basis: several symmetry-breaking mixes, keep best.
  UhfResult best;
  best.energy = 1e9;
  for (double angle : {0.3, 0.6, 0.9, 1.2, -0.6}) {
    const UhfResult uhf = run_uhf(h4_ham, angle);
    if (uhf.converged && uhf.energy < best.energy) best = uhf;
  }
  std::printf("H4 UHF energy = %.8f (converged %d)\n", best.energy, best.converged);
  SlaterDeterminant uhf_det;
  uhf_det.up = best.c_up.cast<cdouble>();
  uhf_det.dn = best.c_dn.cast<cdouble>();
  write_slater_file(uhf_det, outdir + "/h4_sto3g_uhf.slater");

  // H2 at 0.7414 Angstrom.
  const std::vector<std::array<double, 3>> h2 = {{0, 0, 0}, {0, 0, 0.7414}};
  const Hamiltonian h2_ham = build_hydrogen_cluster(h2, 1, 1);
  write_fcidump_file(h2_ham, outdir + "/h2_sto3g.fcidump");
  const auto h2_fci = oracle::fci_solve(h2_ham);
  std::printf("H2/STO-3G (natural-orbital basis): E_FCI = %.6f\n", h2_fci.energy);

  emit_random_psd(outdir + "/random_psd.fcidump");
  std::printf("fixtures written to %s\n", outdir.c_str());
  return 0;
}
