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

// Brute-force reference constructions used only by tests. Everything here is
// built from first principles (dense Jordan-Wigner operators on the full Fock
// space) so it stays independent of the implementation paths it checks.

#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "qcqmc/hamiltonian.hpp"
#include "qcqmc/rng.hpp"
#include "qcqmc/slater.hpp"
#include "qcqmc/types.hpp"

namespace qcqmc::testing {

// Dense creation operator for fermionic mode p (up-spin spatial orbitals are
// modes 0..n-1, down-spin modes n..2n-1; basis index bit q = mode q).
inline Matrix dense_creation(int n_modes, int p) {
  const std::size_t dim = 1ull << n_modes;
  Matrix c = Matrix::Zero(dim, dim);
  for (std::size_t x = 0; x < dim; ++x) {
    if (x >> p & 1) continue;
    const int parity = std::popcount(x & ((1ull << p) - 1));
    c(x | (1ull << p), x) = (parity & 1) ? -1.0 : 1.0;
  }
  return c;
}

// Fock-space vector of a spin-blocked Slater determinant: up columns applied
// first, then down columns, each column as sum_p W(p, j) c^dag_{mode}.
inline Vector dense_determinant_state(const SlaterDeterminant& det) {
  const int n = det.n_orb();
  const int n_modes = 2 * n;
  const std::size_t dim = 1ull << n_modes;
  Vector v = Vector::Zero(dim);
  v(0) = 1.0;
  auto apply_column = [&](const Vector& coeffs, int mode_offset) {
    Vector w = Vector::Zero(dim);
    for (int p = 0; p < n; ++p) {
      if (coeffs(p) == cdouble(0.0)) continue;
      const int mode = mode_offset + p;
      for (std::size_t x = 0; x < dim; ++x) {
        if (v(x) == cdouble(0.0) || (x >> mode & 1)) continue;
        const int parity = std::popcount(x & ((1ull << mode) - 1));
        w(x | (1ull << mode)) += ((parity & 1) ? -1.0 : 1.0) * coeffs(p) * v(x);
      }
    }
    v = w;
  };
  // Apply right-to-left so column 0 of the up block ends up as the leftmost
  // creation operator (the minor convention used by det_amplitude).
  for (int j = det.n_beta() - 1; j >= 0; --j) apply_column(det.dn.col(j), n);
  for (int j = det.n_alpha() - 1; j >= 0; --j) apply_column(det.up.col(j), 0);
  return v;
}

// Dense many-body Hamiltonian on the full Fock space from spatial integrals.
inline Matrix dense_fock_hamiltonian(const Hamiltonian& ham) {
  const int n = ham.n_orb;
  const int n_modes = 2 * n;
  const std::size_t dim = 1ull << n_modes;
  std::vector<Matrix> cr(n_modes), an(n_modes);
  for (int m = 0; m < n_modes; ++m) {
    cr[m] = dense_creation(n_modes, m);
    an[m] = cr[m].adjoint();
  }
  Matrix h = ham.e_core * Matrix::Identity(dim, dim);
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      if (ham.h1(p, q) == 0.0) continue;
      h += ham.h1(p, q) * (cr[p] * an[q] + cr[n + p] * an[n + q]);
    }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s < n; ++s) {
          const double v = ham.eri(p, q, r, s);
          if (v == 0.0) continue;
          for (int sp : {0, n})
            for (int sr : {0, n})
              h += 0.5 * v * cr[sp + p] * cr[sr + r] * an[sr + s] * an[sp + q];
        }
  return h;
}

inline Matrix random_complex_matrix(int rows, int cols, RngStream& rng) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cdouble(rng.next_normal(), rng.next_normal());
  return m;
}

inline RealMatrix random_symmetric(int n, RngStream& rng) {
  RealMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = rng.next_normal();
  return m;
}

// Random small Hamiltonian with PSD two-body integrals (assembled from a few
// random Cholesky-like factors so the factorization precondition holds).
inline Hamiltonian random_psd_hamiltonian(int n_orb, int n_alpha, int n_beta, int n_factors,
                                          RngStream& rng, double scale = 0.3) {
  Hamiltonian ham;
  ham.n_orb = n_orb;
  ham.n_alpha = n_alpha;
  ham.n_beta = n_beta;
  ham.e_core = rng.next_normal();
  ham.h1 = random_symmetric(n_orb, rng);
  ham.eri = TwoBodyIntegrals(n_orb);
  std::vector<RealMatrix> ls;
  for (int g = 0; g < n_factors; ++g) ls.push_back(scale * random_symmetric(n_orb, rng));
  for (int p = 0; p < n_orb; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r <= p; ++r)
        for (int s = 0; s <= r; ++s) {
          double v = 0.0;
          for (const auto& l : ls) v += l(p, q) * l(r, s);
          ham.eri.set(p, q, r, s, v);
        }
  return ham;
}

// Every n-qubit stabilizer state as a dense vector, built from the affine
// form: support on a coset h + span(M) with amplitudes
// 2^{-k/2} i^{sum c_i t_i} (-1)^{sum_{i<j} B_ij t_i t_j}. Independent of the
// tableau machinery; counts must equal 2^n prod_k (2^k + 1).
inline std::vector<Vector> enumerate_stabilizer_states(int n) {
  std::vector<Vector> states;
  const std::size_t dim = 1ull << n;
  std::vector<int> cols(n);
  for (int k = 0; k <= n; ++k) {
    // Choose pivot columns p_0 < ... < p_{k-1}.
    std::vector<int> pivots(k);
    for (int i = 0; i < k; ++i) pivots[i] = i;
    while (true) {
      // Free positions: row i may have support on non-pivot columns > p_i.
      std::vector<std::pair<int, int>> free_pos;
      for (int i = 0; i < k; ++i)
        for (int j = pivots[i] + 1; j < n; ++j)
          if (std::find(pivots.begin(), pivots.end(), j) == pivots.end())
            free_pos.emplace_back(i, j);
      const std::size_t n_free = free_pos.size();
      for (std::size_t fill = 0; fill < (1ull << n_free); ++fill) {
        std::vector<uint64_t> rows(k, 0);
        for (int i = 0; i < k; ++i) rows[i] = 1ull << pivots[i];
        for (std::size_t f = 0; f < n_free; ++f)
          if (fill >> f & 1) rows[free_pos[f].first] |= 1ull << free_pos[f].second;
        // Shifts supported off the pivot columns.
        uint64_t nonpivot_mask = ((n == 64) ? ~0ull : (1ull << n) - 1);
        for (int p : pivots) nonpivot_mask &= ~(1ull << p);
        std::vector<uint64_t> shifts;
        for (uint64_t h = 0;; h = ((h | ~nonpivot_mask) + 1) & nonpivot_mask) {
          shifts.push_back(h);
          if (h == nonpivot_mask) break;
          if (nonpivot_mask == 0) break;
        }
        for (uint64_t h : shifts) {
          const int n_quad = k * (k - 1) / 2;
          for (std::size_t cbits = 0; cbits < (1ull << (2 * k)); ++cbits)
            for (std::size_t bbits = 0; bbits < (1ull << n_quad); ++bbits) {
              Vector v = Vector::Zero(dim);
              const double mag = std::pow(2.0, -0.5 * k);
              for (uint64_t t = 0; t < (1ull << k); ++t) {
                uint64_t x = h;
                int ipower = 0;
                for (int i = 0; i < k; ++i)
                  if (t >> i & 1) {
                    x ^= rows[i];
                    ipower += static_cast<int>((cbits >> (2 * i)) & 3);
                  }
                int q = 0;
                for (int i = 0, e = 0; i < k; ++i)
                  for (int j = i + 1; j < k; ++j, ++e)
                    if ((bbits >> e & 1) && (t >> i & 1) && (t >> j & 1)) q ^= 1;
                static const cdouble ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
                v(x) = mag * ipow[ipower & 3] * (q ? -1.0 : 1.0);
              }
              states.push_back(std::move(v));
            }
        }
      }
      // Next pivot combination.
      int i = k - 1;
      while (i >= 0 && pivots[i] == n - k + i) --i;
      if (i < 0) break;
      ++pivots[i];
      for (int j = i + 1; j < k; ++j) pivots[j] = pivots[j - 1] + 1;
      if (k == 0) break;
    }
    if (k == 0 && n >= 0) {
      // The k = 0 case has no pivot combinations to advance; handled above.
    }
  }
  return states;
}

}  // namespace qcqmc::testing
