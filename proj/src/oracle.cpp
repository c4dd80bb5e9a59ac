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

#include "qcqmc/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>
#include <thread>

#include <Eigen/Eigenvalues>

namespace qcqmc::oracle {

namespace {

uint64_t binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  uint64_t r = 1;
  for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
  return r;
}

void enumerate_masks(int n, int k, std::vector<uint64_t>& out) {
  out.clear();
  if (k == 0) {
    out.push_back(0);
    return;
  }
  uint64_t mask = (1ull << k) - 1;
  const uint64_t limit = 1ull << n;
  while (mask < limit) {
    out.push_back(mask);
    const uint64_t c = mask & -mask;
    const uint64_t r = mask + c;
    mask = (((r ^ mask) >> 2) / c) | r;  // next combination, ascending order
  }
}

std::size_t mask_rank(uint64_t mask) {  // rank in ascending enumeration (colex)
  std::size_t rank = 0;
  int j = 1;
  while (mask) {
    const int p = std::countr_zero(mask);
    rank += binom(p, j);
    mask &= mask - 1;
    ++j;
  }
  return rank;
}

// Parity of occupied orbitals strictly between p and r.
int single_sign(uint64_t mask, int p, int r) {
  const int lo = std::min(p, r), hi = std::max(p, r);
  const uint64_t between = mask & ((1ull << hi) - 1) & ~((1ull << (lo + 1)) - 1);
  return (std::popcount(between) & 1) ? -1 : 1;
}

}  // namespace

SectorBasis SectorBasis::build(int n_orb, int n_alpha, int n_beta) {
  if (n_orb > 48) throw std::invalid_argument("sector basis: n_orb too large");
  SectorBasis b;
  b.n_orb = n_orb;
  b.n_alpha = n_alpha;
  b.n_beta = n_beta;
  enumerate_masks(n_orb, n_alpha, b.up_masks);
  enumerate_masks(n_orb, n_beta, b.dn_masks);
  return b;
}

std::size_t SectorBasis::index_of(uint64_t up, uint64_t dn) const {
  return mask_rank(up) * dn_masks.size() + mask_rank(dn);
}

SpinIntegrals SpinIntegrals::from(const Hamiltonian& ham) {
  const int n = ham.n_orb;
  if (n > 20) throw std::invalid_argument("spin integrals: n_orb too large to materialize");
  SpinIntegrals out;
  out.n_orb = n;
  out.e_core = ham.e_core;
  out.h_up = ham.h1.cast<cdouble>();
  out.h_dn = out.h_up;
  const std::size_t n4 = static_cast<std::size_t>(n) * n * n * n;
  out.eri_uu.resize(n4);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) out.eri_uu[out.flat(p, q, r, s)] = ham.eri(p, q, r, s);
  out.eri_ud = out.eri_uu;
  out.eri_dd = out.eri_uu;
  return out;
}

SpinIntegrals SpinIntegrals::rotated(const Hamiltonian& ham, const CholeskyFactors& chol,
                                     const Matrix& u_up, const Matrix& u_dn) {
  const int n = ham.n_orb;
  SpinIntegrals out;
  out.n_orb = n;
  out.e_core = ham.e_core;
  out.h_up = u_up.adjoint() * ham.h1 * u_up;
  out.h_dn = u_dn.adjoint() * ham.h1 * u_dn;
  const std::size_t n4 = static_cast<std::size_t>(n) * n * n * n;
  out.eri_uu.assign(n4, 0.0);
  out.eri_ud.assign(n4, 0.0);
  out.eri_dd.assign(n4, 0.0);
  for (const auto& chol_vec : chol.vectors) {
    const Matrix a_up = u_up.adjoint() * chol_vec * u_up;
    const Matrix a_dn = u_dn.adjoint() * chol_vec * u_dn;
    std::size_t idx = 0;
    for (int p = 0; p < n; ++p)
      for (int q = 0; q < n; ++q) {
        const cdouble lu = a_up(p, q), ld = a_dn(p, q);
        for (int r = 0; r < n; ++r)
          for (int s = 0; s < n; ++s, ++idx) {
            out.eri_uu[idx] += lu * a_up(r, s);
            out.eri_ud[idx] += lu * a_dn(r, s);
            out.eri_dd[idx] += ld * a_dn(r, s);
          }
      }
  }
  return out;
}

cdouble diagonal_element(const SpinIntegrals& ints, uint64_t up, uint64_t dn) {
  cdouble e = ints.e_core;
  std::vector<int> oup, odn;
  for (uint64_t m = up; m; m &= m - 1) oup.push_back(std::countr_zero(m));
  for (uint64_t m = dn; m; m &= m - 1) odn.push_back(std::countr_zero(m));
  for (int p : oup) e += ints.h_up(p, p);
  for (int p : odn) e += ints.h_dn(p, p);
  for (int p : oup)
    for (int q : oup) e += 0.5 * (ints.uu(p, p, q, q) - ints.uu(p, q, q, p));
  for (int p : odn)
    for (int q : odn) e += 0.5 * (ints.dd(p, p, q, q) - ints.dd(p, q, q, p));
  for (int p : oup)
    for (int q : odn) e += ints.ud(p, p, q, q);
  return e;
}

void connected_elements(const SpinIntegrals& ints, uint64_t up, uint64_t dn,
                        const std::function<void(uint64_t, uint64_t, cdouble)>& cb) {
  const int n = ints.n_orb;
  std::vector<int> oup, odn, vup, vdn;
  for (int p = 0; p < n; ++p) {
    (up >> p & 1 ? oup : vup).push_back(p);
    (dn >> p & 1 ? odn : vdn).push_back(p);
  }

  cb(up, dn, diagonal_element(ints, up, dn));

  // Singles. <D_{p->r}|H|D> = sign [ h(r,p) + sum_occ (rp|qq) - same-spin (rq|qp) ].
  auto single_up = [&](int p, int r) {
    cdouble me = ints.h_up(r, p);
    for (int q : oup) me += ints.uu(r, p, q, q) - ints.uu(r, q, q, p);
    for (int q : odn) me += ints.ud(r, p, q, q);
    return me * static_cast<double>(single_sign(up, p, r));
  };
  auto single_dn = [&](int p, int r) {
    cdouble me = ints.h_dn(r, p);
    for (int q : odn) me += ints.dd(r, p, q, q) - ints.dd(r, q, q, p);
    for (int q : oup) me += ints.ud(q, q, r, p);
    return me * static_cast<double>(single_sign(dn, p, r));
  };
  for (int p : oup)
    for (int r : vup) cb(up ^ (1ull << p) ^ (1ull << r), dn, single_up(p, r));
  for (int p : odn)
    for (int r : vdn) cb(up, dn ^ (1ull << p) ^ (1ull << r), single_dn(p, r));

  // Same-spin doubles, p<q annihilated, r<s created:
  // sign [ (rp|sq) - (sp|rq) ], sign from sequential application.
  auto doubles_same = [&](uint64_t mask, const std::vector<int>& occ, const std::vector<int>& vir,
                          auto eri, bool is_up) {
    for (std::size_t ip = 0; ip < occ.size(); ++ip)
      for (std::size_t iq = ip + 1; iq < occ.size(); ++iq)
        for (std::size_t ir = 0; ir < vir.size(); ++ir)
          for (std::size_t is = ir + 1; is < vir.size(); ++is) {
            const int p = occ[ip], q = occ[iq], r = vir[ir], s = vir[is];
            int sign = single_sign(mask, p, r);
            const uint64_t mid = mask ^ (1ull << p) ^ (1ull << r);
            sign *= single_sign(mid, q, s);
            const cdouble me =
                static_cast<double>(sign) * (eri(r, p, s, q) - eri(s, p, r, q));
            const uint64_t nm = mid ^ (1ull << q) ^ (1ull << s);
            if (is_up)
              cb(nm, dn, me);
            else
              cb(up, nm, me);
          }
  };
  doubles_same(up, oup, vup, [&](int a, int b, int c, int d) { return ints.uu(a, b, c, d); }, true);
  doubles_same(dn, odn, vdn, [&](int a, int b, int c, int d) { return ints.dd(a, b, c, d); }, false);

  // Opposite-spin doubles: independent singles in each sector, element (rp|sq).
  for (int p : oup)
    for (int r : vup) {
      const int su = single_sign(up, p, r);
      const uint64_t nu = up ^ (1ull << p) ^ (1ull << r);
      for (int q : odn)
        for (int s : vdn) {
          const int sd = single_sign(dn, q, s);
          cb(nu, dn ^ (1ull << q) ^ (1ull << s),
             static_cast<double>(su * sd) * ints.ud(r, p, s, q));
        }
    }
}

void apply_hamiltonian(const SpinIntegrals& ints, const SectorBasis& basis, const Vector& x,
                       Vector& y, int threads) {
  const std::size_t nd = basis.dn_masks.size();
  y.setZero(static_cast<Eigen::Index>(basis.size()));
  // Row-oriented accumulation keeps the parallel loop race-free:
  // y(row) = sum over connections <row|H|conn> x(conn), with
  // connected_elements supplying <conn|H|row> and hermiticity the conjugate.
  auto row_work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t iu = lo; iu < hi; ++iu)
      for (std::size_t id = 0; id < nd; ++id) {
        const std::size_t row = iu * nd + id;
        cdouble acc = 0.0;
        connected_elements(ints, basis.up_masks[iu], basis.dn_masks[id],
                           [&](uint64_t u2, uint64_t d2, cdouble me) {
                             acc += std::conj(me) * x(basis.index_of(u2, d2));
                           });
        y(row) = acc;
      }
  };
  const std::size_t nu = basis.up_masks.size();
  if (threads <= 1 || nu < 2) {
    row_work(0, nu);
    return;
  }
  const int nt = std::min<std::size_t>(threads, nu);
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) {
    const std::size_t lo = nu * t / nt, hi = nu * (t + 1) / nt;
    pool.emplace_back(row_work, lo, hi);
  }
  for (auto& th : pool) th.join();
}

RealVector hamiltonian_diagonal(const SpinIntegrals& ints, const SectorBasis& basis) {
  const std::size_t nd = basis.dn_masks.size();
  RealVector diag(basis.size());
  for (std::size_t iu = 0; iu < basis.up_masks.size(); ++iu)
    for (std::size_t id = 0; id < nd; ++id)
      diag(iu * nd + id) = diagonal_element(ints, basis.up_masks[iu], basis.dn_masks[id]).real();
  return diag;
}

namespace {

Matrix dense_sector_matrix(const SpinIntegrals& ints, const SectorBasis& basis) {
  const std::size_t dim = basis.size();
  Matrix h = Matrix::Zero(dim, dim);
  const std::size_t nd = basis.dn_masks.size();
  for (std::size_t iu = 0; iu < basis.up_masks.size(); ++iu)
    for (std::size_t id = 0; id < nd; ++id) {
      const std::size_t col = iu * nd + id;
      connected_elements(ints, basis.up_masks[iu], basis.dn_masks[id],
                         [&](uint64_t u2, uint64_t d2, cdouble me) {
                           h(basis.index_of(u2, d2), col) += me;
                         });
    }
  return h;
}

}  // namespace

FciResult fci_solve(const Hamiltonian& ham, std::size_t max_dim, int threads) {
  FciResult res;
  res.basis = SectorBasis::build(ham.n_orb, ham.n_alpha, ham.n_beta);
  const std::size_t dim = res.basis.size();
  if (dim > max_dim) throw std::runtime_error("fci_solve: sector dimension too large");
  const SpinIntegrals ints = SpinIntegrals::from(ham);

  if (dim <= 512) {
    const Matrix h = dense_sector_matrix(ints, res.basis);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    res.energy = es.eigenvalues()(0);
    res.ground = es.eigenvectors().col(0);
    return res;
  }

  // Davidson with diagonal preconditioning.
  const RealVector diag = hamiltonian_diagonal(ints, res.basis);
  Eigen::Index seed;
  diag.minCoeff(&seed);
  std::vector<Vector> vs, hvs;
  Vector v = Vector::Zero(dim);
  v(seed) = 1.0;
  const int max_sub = 24;
  double theta = 0.0;
  Vector ground;
  for (int iter = 0; iter < 300; ++iter) {
    // Orthonormalize v against the subspace (twice for stability).
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& w : vs) v -= w.dot(v) * w;
    const double nrm = v.norm();
    if (nrm < 1e-12) throw std::runtime_error("fci_solve: subspace breakdown");
    v /= nrm;
    Vector hv;
    apply_hamiltonian(ints, res.basis, v, hv, threads);
    vs.push_back(v);
    hvs.push_back(hv);

    const int m = static_cast<int>(vs.size());
    Matrix sub(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) sub(i, j) = vs[i].dot(hvs[j]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sub);
    theta = es.eigenvalues()(0);
    const Vector c = es.eigenvectors().col(0);
    ground = Vector::Zero(dim);
    Vector hg = Vector::Zero(dim);
    for (int i = 0; i < m; ++i) {
      ground += c(i) * vs[i];
      hg += c(i) * hvs[i];
    }
    const Vector resid = hg - theta * ground;
    res.iterations = iter + 1;
    if (resid.norm() <= 1e-8) {
      res.energy = theta;
      res.ground = ground;
      return res;
    }
    if (m >= max_sub) {  // restart from the current best
      vs.clear();
      hvs.clear();
      v = ground;
      continue;
    }
    v = resid;
    for (std::size_t i = 0; i < dim; ++i) {
      const double denom = diag(i) - theta;
      v(i) /= (std::abs(denom) > 1e-8) ? denom : 1e-8;
    }
  }
  throw std::runtime_error("fci_solve: Davidson did not converge");
}

std::vector<EnergyPoint> imaginary_time_exact(const Hamiltonian& ham, const SectorBasis& basis,
                                              const Vector& psi0, double dt, int n_steps) {
  const std::size_t dim = basis.size();
  if (psi0.size() != static_cast<Eigen::Index>(dim))
    throw std::invalid_argument("imaginary_time_exact: vector size mismatch");
  const SpinIntegrals ints = SpinIntegrals::from(ham);

  auto rayleigh = [&](const Vector& v) {
    Vector hv;
    apply_hamiltonian(ints, basis, v, hv);
    return v.dot(hv).real() / v.squaredNorm();
  };

  std::vector<EnergyPoint> out;
  Vector v = psi0.normalized();
  out.push_back({0.0, rayleigh(v)});
  if (dim <= 4096) {
    const Matrix h = dense_sector_matrix(ints, basis);
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    Vector coeff = es.eigenvectors().adjoint() * v;
    for (int s = 1; s <= n_steps; ++s) {
      coeff = (es.eigenvalues().array() * (-dt)).exp().matrix().asDiagonal() * coeff;
      const double nrm = coeff.norm();
      if (nrm < 1e-280) throw std::runtime_error("imaginary_time_exact: propagation stagnated");
      coeff /= nrm;
      v = es.eigenvectors() * coeff;
      out.push_back({s * dt, rayleigh(v)});
    }
    return out;
  }
  // Matrix-free Taylor application of exp(-dt H) per step.
  for (int s = 1; s <= n_steps; ++s) {
    Vector acc = v, term = v;
    for (int k = 1; k <= 40; ++k) {
      Vector hv;
      apply_hamiltonian(ints, basis, term, hv);
      term = (-dt / k) * hv;
      acc += term;
      if (term.norm() < 1e-14 * acc.norm()) break;
    }
    const double nrm = acc.norm();
    if (nrm < 1e-280) throw std::runtime_error("imaginary_time_exact: propagation stagnated");
    v = acc / nrm;
    out.push_back({s * dt, rayleigh(v)});
  }
  return out;
}

double variational_energy_exact(const Hamiltonian& ham, const SectorBasis& basis, const Vector& v) {
  const double nrm2 = v.squaredNorm();
  if (nrm2 <= 0.0) throw std::invalid_argument("variational_energy_exact: zero vector");
  const SpinIntegrals ints = SpinIntegrals::from(ham);
  Vector hv;
  apply_hamiltonian(ints, basis, v, hv);
  return v.dot(hv).real() / nrm2;
}

std::pair<Matrix, Matrix> one_body_density_by_spin(const SectorBasis& basis, const Vector& v) {
  const int n = basis.n_orb;
  Matrix d_up = Matrix::Zero(n, n), d_dn = Matrix::Zero(n, n);
  const std::size_t nd = basis.dn_masks.size();
  for (std::size_t iu = 0; iu < basis.up_masks.size(); ++iu)
    for (std::size_t id = 0; id < nd; ++id) {
      const cdouble cx = v(iu * nd + id);
      if (cx == cdouble(0.0)) continue;
      const uint64_t up = basis.up_masks[iu], dn = basis.dn_masks[id];
      for (int q = 0; q < n; ++q) {
        if (up >> q & 1) {
          d_up(q, q) += std::conj(cx) * cx;
          for (int p = 0; p < n; ++p) {
            if (p == q || (up >> p & 1)) continue;
            const uint64_t up2 = up ^ (1ull << q) ^ (1ull << p);
            const double sign = single_sign(up, q, p);
            d_up(p, q) += sign * std::conj(v(basis.index_of(up2, dn))) * cx;
          }
        }
        if (dn >> q & 1) {
          d_dn(q, q) += std::conj(cx) * cx;
          for (int p = 0; p < n; ++p) {
            if (p == q || (dn >> p & 1)) continue;
            const uint64_t dn2 = dn ^ (1ull << q) ^ (1ull << p);
            const double sign = single_sign(dn, q, p);
            d_dn(p, q) += sign * std::conj(v(basis.index_of(up, dn2))) * cx;
          }
        }
      }
    }
  const double nrm = v.squaredNorm();
  return {d_up / nrm, d_dn / nrm};
}

Matrix one_body_density(const SectorBasis& basis, const Vector& v) {
  auto [d_up, d_dn] = one_body_density_by_spin(basis, v);
  return d_up + d_dn;
}

}  // namespace qcqmc::oracle
