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

#include "qcqmc/stab.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace qcqmc::stab {

namespace {

int parity(uint64_t v) { return std::popcount(v) & 1; }

const cdouble kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

// F2 Gauss-Jordan inverse of an n x n bit matrix (rows as words).
std::vector<uint64_t> invert_bits(std::vector<uint64_t> rows, int n) {
  std::vector<uint64_t> inv(n);
  for (int i = 0; i < n; ++i) inv[i] = 1ull << i;
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r)
      if (rows[r] >> col & 1) {
        pivot = r;
        break;
      }
    if (pivot < 0) throw std::runtime_error("stab: singular bit matrix");
    std::swap(rows[col], rows[pivot]);
    std::swap(inv[col], inv[pivot]);
    for (int r = 0; r < n; ++r)
      if (r != col && (rows[r] >> col & 1)) {
        rows[r] ^= rows[col];
        inv[r] ^= inv[col];
      }
  }
  return inv;
}

uint64_t matvec_bits(const std::vector<uint64_t>& rows, uint64_t v) {
  uint64_t out = 0;
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (parity(rows[r] & v)) out |= 1ull << r;
  return out;
}

}  // namespace

Pauli Pauli::hermitian(uint64_t x, uint64_t z, bool negative) {
  Pauli p;
  p.x = x;
  p.z = z;
  p.phase = static_cast<uint8_t>((std::popcount(x & z) + (negative ? 2 : 0)) & 3);
  return p;
}

Pauli Pauli::times(const Pauli& other) const {
  Pauli out;
  out.x = x ^ other.x;
  out.z = z ^ other.z;
  out.phase = static_cast<uint8_t>((phase + other.phase + 2 * parity(z & other.x)) & 3);
  return out;
}

bool Pauli::negative_of(const Pauli& other) const {
  return x == other.x && z == other.z && ((phase - other.phase) & 3) == 2;
}

CliffordTableau CliffordTableau::identity(int n) {
  if (n < 1 || n > 32) throw std::invalid_argument("stab: qubit count must be in [1, 32]");
  CliffordTableau t;
  t.n = n;
  for (int j = 0; j < n; ++j) {
    t.x_image.push_back(Pauli::hermitian(1ull << j, 0));
    t.z_image.push_back(Pauli::hermitian(0, 1ull << j));
  }
  return t;
}

namespace {

void conj_h(Pauli& p, int q) {
  const uint64_t bit = 1ull << q;
  const bool xb = p.x & bit, zb = p.z & bit;
  if (xb && zb) p.phase = static_cast<uint8_t>((p.phase + 2) & 3);
  if (xb != zb) {
    p.x ^= bit;
    p.z ^= bit;
  }
}

void conj_p(Pauli& p, int q) {
  const uint64_t bit = 1ull << q;
  if (p.x & bit) {
    p.phase = static_cast<uint8_t>((p.phase + 1) & 3);
    p.z ^= bit;
  }
}

void conj_x(Pauli& p, int q) {
  if (p.z >> q & 1) p.phase = static_cast<uint8_t>((p.phase + 2) & 3);
}

void conj_z(Pauli& p, int q) {
  if (p.x >> q & 1) p.phase = static_cast<uint8_t>((p.phase + 2) & 3);
}

void conj_cnot(Pauli& p, int c, int t) {
  // X products map to X products and Z to Z, so no reordering phase arises
  // in the i^p X^x Z^z encoding.
  if (p.x >> c & 1) p.x ^= 1ull << t;
  if (p.z >> t & 1) p.z ^= 1ull << c;
}

void conj_cz(Pauli& p, int a, int b) {
  const bool xa = p.x >> a & 1, xb = p.x >> b & 1;
  if (xa && xb) p.phase = static_cast<uint8_t>((p.phase + 2) & 3);
  if (xa) p.z ^= 1ull << b;
  if (xb) p.z ^= 1ull << a;
}

}  // namespace

void CliffordTableau::left_h(int q) {
  for (auto& p : x_image) conj_h(p, q);
  for (auto& p : z_image) conj_h(p, q);
}
void CliffordTableau::left_p(int q) {
  for (auto& p : x_image) conj_p(p, q);
  for (auto& p : z_image) conj_p(p, q);
}
void CliffordTableau::left_x(int q) {
  for (auto& p : x_image) conj_x(p, q);
  for (auto& p : z_image) conj_x(p, q);
}
void CliffordTableau::left_z(int q) {
  for (auto& p : x_image) conj_z(p, q);
  for (auto& p : z_image) conj_z(p, q);
}
void CliffordTableau::left_cnot(int c, int t) {
  for (auto& p : x_image) conj_cnot(p, c, t);
  for (auto& p : z_image) conj_cnot(p, c, t);
}
void CliffordTableau::left_cz(int a, int b) {
  for (auto& p : x_image) conj_cz(p, a, b);
  for (auto& p : z_image) conj_cz(p, a, b);
}
void CliffordTableau::left_swap(int a, int b) {
  left_cnot(a, b);
  left_cnot(b, a);
  left_cnot(a, b);
}

Pauli CliffordTableau::image(const Pauli& p) const {
  Pauli prod;
  prod.phase = p.phase;
  bool first = true;
  for (int j = 0; j < n; ++j)
    if (p.x >> j & 1) {
      prod = first ? Pauli{x_image[j].x, x_image[j].z,
                           static_cast<uint8_t>((x_image[j].phase + prod.phase) & 3)}
                   : prod.times(x_image[j]);
      first = false;
    }
  for (int j = 0; j < n; ++j)
    if (p.z >> j & 1) {
      prod = first ? Pauli{z_image[j].x, z_image[j].z,
                           static_cast<uint8_t>((z_image[j].phase + prod.phase) & 3)}
                   : prod.times(z_image[j]);
      first = false;
    }
  return prod;
}

CliffordTableau CliffordTableau::compose(const CliffordTableau& rhs) const {
  if (n != rhs.n) throw std::invalid_argument("stab: compose size mismatch");
  CliffordTableau out;
  out.n = n;
  for (int j = 0; j < n; ++j) {
    out.x_image.push_back(image(rhs.x_image[j]));
    out.z_image.push_back(image(rhs.z_image[j]));
  }
  return out;
}

CliffordTableau CliffordTableau::inverse() const {
  std::vector<uint64_t> m(2 * n);
  for (int j = 0; j < n; ++j) {
    m[j] = x_image[j].x | (x_image[j].z << n);
    m[n + j] = z_image[j].x | (z_image[j].z << n);
  }
  const std::vector<uint64_t> minv = invert_bits(std::move(m), 2 * n);
  const uint64_t mask = (n == 32) ? 0xffffffffull : ((1ull << n) - 1);
  CliffordTableau out;
  out.n = n;
  for (int j = 0; j < n; ++j) {
    Pauli cand = Pauli::hermitian(minv[j] & mask, (minv[j] >> n) & mask);
    if (image(cand).negative_of(Pauli::hermitian(1ull << j, 0)))
      cand = Pauli::hermitian(cand.x, cand.z, true);
    out.x_image.push_back(cand);
    Pauli candz = Pauli::hermitian(minv[n + j] & mask, (minv[n + j] >> n) & mask);
    if (image(candz).negative_of(Pauli::hermitian(0, 1ull << j)))
      candz = Pauli::hermitian(candz.x, candz.z, true);
    out.z_image.push_back(candz);
  }
  return out;
}

bool CliffordTableau::check_symplectic() const {
  auto sp = [&](const Pauli& a, const Pauli& b) { return parity(a.x & b.z) ^ parity(a.z & b.x); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (sp(x_image[i], x_image[j]) != 0) return false;
      if (sp(z_image[i], z_image[j]) != 0) return false;
      if (sp(x_image[i], z_image[j]) != (i == j ? 1 : 0)) return false;
    }
  return true;
}

std::vector<uint8_t> CliffordTableau::key() const {
  std::vector<uint8_t> out;
  for (const auto* rows : {&x_image, &z_image})
    for (const auto& p : *rows) {
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<uint8_t>(p.x >> (8 * b)));
      for (int b = 0; b < 8; ++b) out.push_back(static_cast<uint8_t>(p.z >> (8 * b)));
      out.push_back(p.phase);
    }
  return out;
}

CliffordTableau sample_uniform_clifford(int n, RngStream& rng) {
  if (n < 1 || n > 32) throw std::invalid_argument("stab: qubit count must be in [1, 32]");
  const int d = 2 * n;
  const uint64_t xmask = (n == 32) ? 0xffffffffull : ((1ull << n) - 1);
  auto sp = [&](uint64_t u, uint64_t v) {
    return parity(((u & xmask) & (v >> n)) ^ ((u >> n) & (v & xmask)));
  };

  std::vector<uint64_t> comp(d);
  for (int i = 0; i < d; ++i) comp[i] = 1ull << i;
  std::vector<uint64_t> a_rows, b_rows;

  for (int j = 0; j < n; ++j) {
    const int dim = static_cast<int>(comp.size());
    const uint64_t cmask = (dim >= 64) ? ~0ull : ((1ull << dim) - 1);
    uint64_t coeff = 0;
    while (coeff == 0) coeff = rng.next_u64() & cmask;
    uint64_t a = 0;
    for (int k = 0; k < dim; ++k)
      if (coeff >> k & 1) a ^= comp[k];

    int pivot = -1;
    for (int k = 0; k < dim; ++k)
      if (sp(a, comp[k])) {
        pivot = k;
        break;
      }
    if (pivot < 0) throw std::runtime_error("stab: degenerate symplectic complement");
    uint64_t bcoeff = rng.next_u64() & cmask;
    int acc = 0;
    for (int k = 0; k < dim; ++k)
      if (k != pivot && (bcoeff >> k & 1) && sp(a, comp[k])) acc ^= 1;
    if (acc == 0)
      bcoeff |= 1ull << pivot;
    else
      bcoeff &= ~(1ull << pivot);
    uint64_t b = 0;
    for (int k = 0; k < dim; ++k)
      if (bcoeff >> k & 1) b ^= comp[k];
    a_rows.push_back(a);
    b_rows.push_back(b);

    std::vector<uint64_t> reduced;
    for (uint64_t v : comp) {
      uint64_t w = v;
      if (sp(w, b)) w ^= a;
      if (sp(w, a)) w ^= b;
      for (uint64_t r : reduced) {
        const int lead = 63 - std::countl_zero(r);
        if (w >> lead & 1) w ^= r;
      }
      if (w) reduced.push_back(w);
    }
    if (static_cast<int>(reduced.size()) != dim - 2)
      throw std::runtime_error("stab: complement reduction failed");
    comp = std::move(reduced);
  }

  CliffordTableau out;
  out.n = n;
  for (int j = 0; j < n; ++j) {
    out.x_image.push_back(Pauli::hermitian(a_rows[j] & xmask, a_rows[j] >> n, rng.next_u64() & 1));
    out.z_image.push_back(Pauli::hermitian(b_rows[j] & xmask, b_rows[j] >> n, rng.next_u64() & 1));
  }
  return out;
}

uint64_t GForm::apply_post(uint64_t y) const {
  return matvec_bits(delta_post, y) ^ delta_post_offset;
}

uint64_t GForm::linear_map(uint64_t x) const {
  uint64_t out = x;
  for (int i = 0; i < n; ++i)
    if ((i_set >> i & 1) && (x >> i & 1)) out ^= delta[i];
  return out;
}

int GForm::phase_power(uint64_t x) const {
  int power = 0;
  for (int i = 0; i < n; ++i) {
    if (!(x >> i & 1) || !(i_set >> i & 1)) continue;
    if (gamma[i] >> i & 1) power += 1;
    power += 2 * std::popcount(gamma[i] & x & ~((1ull << (i + 1)) - 1));
  }
  return power & 3;
}

GForm to_measurement_form(const CliffordTableau& u) {
  const int n = u.n;
  const CliffordTableau uinv = u.inverse();
  std::vector<Pauli> rows = uinv.z_image;  // U^dag Z_j U, signs included
  std::vector<uint64_t> combo(n);
  for (int i = 0; i < n; ++i) combo[i] = 1ull << i;
  auto mul_rows = [&](int dst, int src) {
    rows[dst] = rows[dst].times(rows[src]);
    combo[dst] ^= combo[src];
  };
  auto swap_rows = [&](int i, int j) {
    std::swap(rows[i], rows[j]);
    std::swap(combo[i], combo[j]);
  };

  // RREF of the X parts; pivot columns form I.
  std::vector<int> pivot_of_col(n, -1);
  int rank = 0;
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = rank; r < n; ++r)
      if (rows[r].x >> col & 1) {
        pivot = r;
        break;
      }
    if (pivot < 0) continue;
    swap_rows(rank, pivot);
    for (int r = 0; r < n; ++r)
      if (r != rank && (rows[r].x >> col & 1)) mul_rows(r, rank);
    pivot_of_col[col] = rank;
    ++rank;
  }
  uint64_t i_set = 0;
  for (int col = 0; col < n; ++col)
    if (pivot_of_col[col] >= 0) i_set |= 1ull << col;

  // RREF of the pure-Z rows over the complement columns.
  std::vector<int> z_pivot_of_col(n, -1);
  int zrank = 0;
  for (int col = 0; col < n; ++col) {
    if (i_set >> col & 1) continue;
    int pivot = -1;
    for (int r = rank + zrank; r < n; ++r)
      if (rows[r].z >> col & 1) {
        pivot = r;
        break;
      }
    if (pivot < 0) throw std::runtime_error("stab: measurement reduction failed (z rank)");
    swap_rows(rank + zrank, pivot);
    for (int r = 0; r < n; ++r)
      if (r != rank + zrank && (rows[r].z >> col & 1)) mul_rows(r, rank + zrank);
    z_pivot_of_col[col] = rank + zrank;
    ++zrank;
  }
  if (rank + zrank != n) throw std::runtime_error("stab: measurement reduction failed (rank)");

  // Order rows by their pivot qubit.
  {
    std::vector<Pauli> rows2(n);
    std::vector<uint64_t> combo2(n);
    for (int col = 0; col < n; ++col) {
      const int src = (i_set >> col & 1) ? pivot_of_col[col] : z_pivot_of_col[col];
      rows2[col] = rows[src];
      combo2[col] = combo[src];
    }
    rows = std::move(rows2);
    combo = std::move(combo2);
  }

  GForm g;
  g.n = n;
  g.i_set = i_set;
  g.gamma.assign(n, 0);
  g.delta.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (i_set >> i & 1) {
      if ((rows[i].x & i_set) != (1ull << i))
        throw std::runtime_error("stab: unexpected X structure in reduction");
      if (rows[i].z & ~i_set) throw std::runtime_error("stab: unexpected Z tail on an I row");
      g.gamma[i] = rows[i].z;
      g.delta[i] = rows[i].x & ~i_set;
    } else {
      if (rows[i].x) throw std::runtime_error("stab: unexpected X support on a pure-Z row");
      if ((rows[i].z & ~i_set) != (1ull << i))
        throw std::runtime_error("stab: unexpected Z structure in reduction");
    }
  }
  for (int i = 0; i < n; ++i) {
    if (!(i_set >> i & 1)) continue;
    for (int j = 0; j < n; ++j) {
      if ((i_set >> j & 1) && ((g.gamma[i] >> j & 1) != (g.gamma[j] >> i & 1)))
        throw std::runtime_error("stab: gamma not symmetric");
      if (!(i_set >> j & 1) && ((g.delta[i] >> j & 1) != (rows[j].z >> i & 1)))
        throw std::runtime_error("stab: delta inconsistent with Z tails");
    }
  }

  // Signs of the reduced generators versus those realized by the circuit.
  const CliffordTableau gt_inv = gform_tableau(g).inverse();
  uint64_t t_bits = 0;
  for (int i = 0; i < n; ++i) {
    const Pauli qg = gt_inv.z_image[i];
    if (qg.x != rows[i].x || qg.z != rows[i].z)
      throw std::runtime_error("stab: emitted circuit measures a different group");
    if (qg.negative_of(rows[i]))
      t_bits |= 1ull << i;
    else if (!(qg == rows[i]))
      throw std::runtime_error("stab: generator phase is not a sign");
  }

  // Outcome relabeling x = Cinv (y + t) + nu, from expressing the original
  // generators as signed products of the reduced ones.
  const std::vector<uint64_t> cinv = invert_bits(combo, n);
  g.delta_post = cinv;
  uint64_t nu = 0;
  for (int j = 0; j < n; ++j) {
    Pauli prod;
    bool first = true;
    for (int i = 0; i < n; ++i)
      if (cinv[j] >> i & 1) {
        prod = first ? rows[i] : prod.times(rows[i]);
        first = false;
      }
    if (first) throw std::runtime_error("stab: empty outcome combination");
    if (prod.x != uinv.z_image[j].x || prod.z != uinv.z_image[j].z)
      throw std::runtime_error("stab: outcome combination mismatch");
    if (prod.negative_of(uinv.z_image[j])) nu |= 1ull << j;
  }
  g.delta_post_offset = matvec_bits(cinv, t_bits) ^ nu;
  return g;
}

std::vector<Gate> gform_circuit(const GForm& g) {
  std::vector<Gate> gates;
  std::vector<std::pair<int, int>> edges;
  uint64_t t_set = 0;
  for (int i = 0; i < g.n; ++i) {
    if (!(g.i_set >> i & 1)) continue;
    for (int j = i + 1; j < g.n; ++j)
      if ((g.i_set >> j & 1) && (g.gamma[i] >> j & 1)) edges.emplace_back(i, j);
    for (int j = 0; j < g.n; ++j)
      if (g.delta[i] >> j & 1) {
        edges.emplace_back(i, j);
        t_set |= 1ull << j;
      }
  }
  for (int q = 0; q < g.n; ++q)
    if (t_set >> q & 1) gates.push_back({Gate::Kind::H, q, -1});
  // Greedy parallel scheduling keeps the two-qubit depth at the CZ layer's
  // edge chromatic index.
  std::vector<std::pair<int, int>> remaining = edges;
  while (!remaining.empty()) {
    uint64_t busy = 0;
    std::vector<std::pair<int, int>> defer;
    for (auto [a, b] : remaining) {
      if ((busy >> a & 1) || (busy >> b & 1)) {
        defer.emplace_back(a, b);
        continue;
      }
      busy |= (1ull << a) | (1ull << b);
      gates.push_back({Gate::Kind::CZ, a, b});
    }
    remaining = std::move(defer);
  }
  for (int q = 0; q < g.n; ++q)
    if (t_set >> q & 1) gates.push_back({Gate::Kind::H, q, -1});
  for (int q = 0; q < g.n; ++q)
    if ((g.i_set >> q & 1) && (g.gamma[q] >> q & 1)) gates.push_back({Gate::Kind::P, q, -1});
  for (int q = 0; q < g.n; ++q)
    if (g.i_set >> q & 1) gates.push_back({Gate::Kind::H, q, -1});
  return gates;
}

int two_qubit_depth(const std::vector<Gate>& gates, int n) {
  std::vector<int> level(n, 0);
  int depth = 0;
  for (const auto& gate : gates) {
    if (gate.kind != Gate::Kind::CZ && gate.kind != Gate::Kind::CNOT) continue;
    const int layer = std::max(level[gate.a], level[gate.b]) + 1;
    level[gate.a] = level[gate.b] = layer;
    depth = std::max(depth, layer);
  }
  return depth;
}

CliffordTableau gform_tableau(const GForm& g) {
  CliffordTableau t = CliffordTableau::identity(g.n);
  for (const auto& gate : gform_circuit(g)) {
    switch (gate.kind) {
      case Gate::Kind::H: t.left_h(gate.a); break;
      case Gate::Kind::P: t.left_p(gate.a); break;
      case Gate::Kind::CZ: t.left_cz(gate.a, gate.b); break;
      case Gate::Kind::CNOT: t.left_cnot(gate.a, gate.b); break;
    }
  }
  return t;
}

namespace {

// Affine form of an H-free Clifford: F|x> = i^{q(x)} |Delta x + delta>, with
// q(x) = sum_i Gamma_ii x_i + 2 sum_{i<j} Gamma_ij x_i x_j + 2 gamma.x.
struct HFreeForm {
  int n = 0;
  std::vector<uint64_t> delta_rows;
  std::vector<uint64_t> delta_inv_rows;
  uint64_t offset = 0;
  std::vector<uint64_t> gamma;
  uint64_t gamma_lin = 0;

  uint64_t forward(uint64_t x) const { return matvec_bits(delta_rows, x) ^ offset; }
  uint64_t backward(uint64_t y) const { return matvec_bits(delta_inv_rows, y ^ offset); }
  int phase_power(uint64_t x) const {
    int power = 0;
    for (int i = 0; i < n; ++i) {
      if (!(x >> i & 1)) continue;
      if (gamma[i] >> i & 1) power += 1;
      power += 2 * std::popcount(gamma[i] & x & ~((1ull << (i + 1)) - 1));
    }
    power += 2 * std::popcount(gamma_lin & x);
    return power & 3;
  }
};

HFreeForm extract_hfree(const CliffordTableau& f) {
  const int n = f.n;
  HFreeForm out;
  out.n = n;
  std::vector<uint64_t> delta_cols(n);
  for (int j = 0; j < n; ++j) {
    if (f.z_image[j].x) throw std::runtime_error("stab: operator is not H-free");
    delta_cols[j] = f.x_image[j].x;
  }
  out.delta_rows.assign(n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (delta_cols[j] >> i & 1) out.delta_rows[i] |= 1ull << j;
  out.delta_inv_rows = invert_bits(out.delta_rows, n);

  // F Z_j F^dag = (-1)^{(Delta^{-1} delta)_j} Z^{...}: signs give delta.
  uint64_t s = 0;
  for (int j = 0; j < n; ++j) {
    if ((f.z_image[j].phase & 1) != 0) throw std::runtime_error("stab: bad Z-image phase");
    if ((f.z_image[j].phase & 3) == 2) s |= 1ull << j;
  }
  out.offset = matvec_bits(out.delta_rows, s);

  // F X_j F^dag = i^{Gamma_jj} (-1)^{gamma_j + Gamma_j . s} X^{Delta e_j} Z^{Delta^{-T} Gamma_j}.
  std::vector<uint64_t> gamma_cols(n, 0);
  for (int j = 0; j < n; ++j) {
    const uint64_t w = f.x_image[j].z;
    uint64_t gcol = 0;  // Gamma e_j = Delta^T w
    for (int i = 0; i < n; ++i)
      if (parity(delta_cols[i] & w)) gcol |= 1ull << i;
    gamma_cols[j] = gcol;
  }
  out.gamma.assign(n, 0);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      if (gamma_cols[j] >> i & 1) out.gamma[i] |= 1ull << j;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if ((out.gamma[i] >> j & 1) != (out.gamma[j] >> i & 1))
        throw std::runtime_error("stab: extracted gamma is not symmetric");

  uint64_t gamma_lin = 0;
  for (int j = 0; j < n; ++j) {
    const Pauli& a = f.x_image[j];
    const int gjj = out.gamma[j] >> j & 1;
    if ((a.phase & 1) != gjj) throw std::runtime_error("stab: X-image phase parity mismatch");
    const int r = ((a.phase - gjj) >> 1) & 1;
    if (r ^ parity(gamma_cols[j] & s)) gamma_lin |= 1ull << j;
  }
  out.gamma_lin = gamma_lin;
  return out;
}

}  // namespace

cdouble stab_amplitude(const CliffordTableau& u, uint64_t b, uint64_t beta) {
  const GForm g = to_measurement_form(u);
  const CliffordTableau f = u.compose(gform_tableau(g).inverse());
  const HFreeForm hf = extract_hfree(f);
  const uint64_t z = hf.backward(b);
  const cdouble bra = gform_bra_amplitude(g, z, beta);
  if (bra == cdouble(0.0)) return 0.0;
  return bra * std::conj(kIPow[hf.phase_power(z)]);
}

cdouble gform_bra_amplitude(const GForm& g, uint64_t y, uint64_t beta) {
  const uint64_t mapped = g.linear_map(beta);
  const uint64_t outside = ~g.i_set;
  if ((mapped & outside) != (y & outside)) return 0.0;
  const int k = std::popcount(g.i_set);
  const double mag = std::pow(2.0, -0.5 * k);
  const double sign = parity(beta & y & g.i_set) ? -1.0 : 1.0;
  return std::conj(kIPow[g.phase_power(beta)]) * mag * sign;
}

cdouble gform_ket0_amplitude(const GForm& g, uint64_t y) {
  if (y & ~g.i_set) return 0.0;
  return std::pow(2.0, -0.5 * std::popcount(g.i_set));
}

Matrix dense_unitary(const std::vector<Gate>& gates, int n) {
  const std::size_t dim = 1ull << n;
  Matrix u = Matrix::Identity(dim, dim);
  for (const auto& gate : gates) {
    Matrix m = Matrix::Zero(dim, dim);
    for (std::size_t x = 0; x < dim; ++x) {
      switch (gate.kind) {
        case Gate::Kind::H: {
          const double inv = 1.0 / std::sqrt(2.0);
          const uint64_t bit = 1ull << gate.a;
          m(x & ~bit, x) += (x & bit) ? inv : inv;
          m(x | bit, x) += (x & bit) ? -inv : inv;
          break;
        }
        case Gate::Kind::P:
          m(x, x) = (x >> gate.a & 1) ? cdouble(0, 1) : cdouble(1, 0);
          break;
        case Gate::Kind::CZ:
          m(x, x) = ((x >> gate.a & 1) && (x >> gate.b & 1)) ? -1.0 : 1.0;
          break;
        case Gate::Kind::CNOT: {
          const uint64_t y = (x >> gate.a & 1) ? (x ^ (1ull << gate.b)) : x;
          m(y, x) = 1.0;
          break;
        }
      }
    }
    u = (m * u).eval();
  }
  return u;
}

Matrix dense_unitary(const CliffordTableau& u) {
  const GForm g = to_measurement_form(u);
  const CliffordTableau f = u.compose(gform_tableau(g).inverse());
  const HFreeForm hf = extract_hfree(f);
  const std::size_t dim = 1ull << u.n;
  const Matrix gmat = dense_unitary(gform_circuit(g), u.n);
  Matrix fmat = Matrix::Zero(dim, dim);
  for (std::size_t x = 0; x < dim; ++x) fmat(hf.forward(x), x) = kIPow[hf.phase_power(x)];
  return fmat * gmat;
}

}  // namespace qcqmc::stab
