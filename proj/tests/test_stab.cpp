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
#include <map>
#include <set>

#include "doctest.h"
#include "qcqmc/stab.hpp"
#include "test_oracles.hpp"

using namespace qcqmc;
using stab::CliffordTableau;
using stab::GForm;
using stab::Pauli;

namespace {

Matrix dense_pauli(const Pauli& p, int n) {
  const std::size_t dim = 1ull << n;
  Matrix m = Matrix::Zero(dim, dim);
  static const cdouble ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  for (std::size_t col = 0; col < dim; ++col) {
    // X^x Z^z |col> = (-1)^{z.col} |col ^ x>.
    const double sign = (std::popcount(p.z & col) & 1) ? -1.0 : 1.0;
    m(col ^ p.x, col) = ipow[p.phase & 3] * sign;
  }
  return m;
}

struct RandomCircuit {
  CliffordTableau tableau;
  std::vector<stab::Gate> gates;
};

RandomCircuit random_circuit(int n, int n_gates, RngStream& rng) {
  RandomCircuit rc;
  rc.tableau = CliffordTableau::identity(n);
  for (int g = 0; g < n_gates; ++g) {
    const int kind = static_cast<int>(rng.next_below(4));
    const int a = static_cast<int>(rng.next_below(n));
    int b = static_cast<int>(rng.next_below(n));
    if (b == a) b = (a + 1) % n;
    switch (kind) {
      case 0:
        rc.tableau.left_h(a);
        rc.gates.push_back({stab::Gate::Kind::H, a, -1});
        break;
      case 1:
        rc.tableau.left_p(a);
        rc.gates.push_back({stab::Gate::Kind::P, a, -1});
        break;
      case 2:
        if (n < 2) break;
        rc.tableau.left_cnot(a, b);
        rc.gates.push_back({stab::Gate::Kind::CNOT, a, b});
        break;
      default:
        if (n < 2) break;
        rc.tableau.left_cz(a, b);
        rc.gates.push_back({stab::Gate::Kind::CZ, a, b});
        break;
    }
  }
  return rc;
}

// All of C_2 (11520 elements modulo global phase).
std::vector<CliffordTableau> enumerate_c2() {
  std::vector<CliffordTableau> out;
  auto make_pauli = [](int bits4, bool neg) {
    return Pauli::hermitian(bits4 & 3, (bits4 >> 2) & 3, neg);
  };
  for (int rx0 = 1; rx0 < 16; ++rx0)
    for (int rz0 = 1; rz0 < 16; ++rz0)
      for (int rx1 = 1; rx1 < 16; ++rx1)
        for (int rz1 = 1; rz1 < 16; ++rz1) {
          CliffordTableau t;
          t.n = 2;
          t.x_image = {make_pauli(rx0, false), make_pauli(rx1, false)};
          t.z_image = {make_pauli(rz0, false), make_pauli(rz1, false)};
          if (!t.check_symplectic()) continue;
          for (int signs = 0; signs < 16; ++signs) {
            CliffordTableau s = t;
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

TEST_SUITE("stab") {

TEST_CASE("pauli product phases follow the XZ reordering rule") {
  const Pauli x = Pauli::hermitian(1, 0);
  const Pauli z = Pauli::hermitian(0, 1);
  const Pauli y = Pauli::hermitian(1, 1);
  CHECK(y.phase == 1);  // Y = i XZ
  // XZ = -ZX.
  const Pauli xz = x.times(z);
  const Pauli zx = z.times(x);
  CHECK(xz.x == zx.x);
  CHECK(((zx.phase - xz.phase) & 3) == 2);
  // Y^2 = I.
  const Pauli y2 = y.times(y);
  CHECK(y2.x == 0);
  CHECK(y2.z == 0);
  CHECK(y2.phase == 0);
}

TEST_CASE("gate conjugation matches dense matrices") {
  RngStream rng(61);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(2));
    const auto rc = random_circuit(n, 18, rng);
    const Matrix u = stab::dense_unitary(rc.gates, n);
    for (int j = 0; j < n; ++j) {
      for (const Pauli gen :
           {Pauli::hermitian(1ull << j, 0), Pauli::hermitian(0, 1ull << j)}) {
        const Matrix lhs = u * dense_pauli(gen, n) * u.adjoint();
        const Matrix rhs = dense_pauli(rc.tableau.image(gen), n);
        CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }
}

TEST_CASE("compose and inverse behave as operator product and inverse") {
  RngStream rng(62);
  for (int trial = 0; trial < 20; ++trial) {
    const auto rc1 = random_circuit(3, 14, rng);
    const auto rc2 = random_circuit(3, 14, rng);
    // Apply rc2 first, then rc1.
    CliffordTableau both = CliffordTableau::identity(3);
    auto apply = [&](const std::vector<stab::Gate>& gates) {
      for (const auto& g : gates) switch (g.kind) {
          case stab::Gate::Kind::H: both.left_h(g.a); break;
          case stab::Gate::Kind::P: both.left_p(g.a); break;
          case stab::Gate::Kind::CZ: both.left_cz(g.a, g.b); break;
          case stab::Gate::Kind::CNOT: both.left_cnot(g.a, g.b); break;
        }
    };
    apply(rc2.gates);
    apply(rc1.gates);
    const CliffordTableau composed = rc1.tableau.compose(rc2.tableau);
    CHECK(composed.key() == both.key());

    const CliffordTableau inv = rc1.tableau.inverse();
    const CliffordTableau ident = rc1.tableau.compose(inv);
    CHECK(ident.key() == CliffordTableau::identity(3).key());
  }
}

TEST_CASE("decomposed dense unitary equals the gate-built dense unitary") {
  RngStream rng(63);
  for (int trial = 0; trial < 25; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(3));
    const auto rc = random_circuit(n, 20, rng);
    const Matrix direct = stab::dense_unitary(rc.gates, n);
    const Matrix decomposed = stab::dense_unitary(rc.tableau);
    // Equal up to a global phase.
    cdouble phase = 0.0;
    for (Eigen::Index c = 0; c < direct.cols() && phase == cdouble(0.0); ++c)
      for (Eigen::Index r = 0; r < direct.rows(); ++r)
        if (std::abs(direct(r, c)) > 1e-8) {
          phase = decomposed(r, c) / direct(r, c);
          break;
        }
    CHECK(std::abs(std::abs(phase) - 1.0) < 1e-10);
    CHECK((decomposed - phase * direct).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("uniform sampling produces valid symplectic tableaus") {
  RngStream rng(64);
  for (int trial = 0; trial < 200; ++trial) {
    const int n = 1 + static_cast<int>(rng.next_below(5));
    const auto t = stab::sample_uniform_clifford(n, rng);
    REQUIRE(t.check_symplectic());
  }
}

TEST_CASE("single-qubit sampling covers the 24 Cliffords uniformly") {
  RngStream rng(65);
  std::map<std::vector<uint8_t>, int> counts;
  const int n_draws = 120000;
  for (int i = 0; i < n_draws; ++i) counts[stab::sample_uniform_clifford(1, rng).key()]++;
  CHECK(counts.size() == 24);
  const double expect = n_draws / 24.0;
  const double sigma = std::sqrt(expect * (1.0 - 1.0 / 24.0));
  for (const auto& [key, count] : counts) CHECK(std::abs(count - expect) < 5.0 * sigma);
}

TEST_CASE("two-qubit sampling reaches all 11520 elements with uniform frequency") {
  RngStream rng(66);
  std::map<std::vector<uint8_t>, int> counts;
  const int n_draws = 600000;
  for (int i = 0; i < n_draws; ++i) counts[stab::sample_uniform_clifford(2, rng).key()]++;
  CHECK(counts.size() == 11520);
  double chi2 = 0.0;
  const double expect = n_draws / 11520.0;
  for (const auto& [key, count] : counts) chi2 += (count - expect) * (count - expect) / expect;
  // 11519 dof: mean 11519, sd ~152.
  CHECK(chi2 > 11519 - 5 * 152);
  CHECK(chi2 < 11519 + 5 * 152);
}

TEST_CASE("measurement form of the identity and of a single Hadamard") {
  const auto ident = CliffordTableau::identity(3);
  const GForm g = stab::to_measurement_form(ident);
  CHECK(g.i_set == 0);
  CHECK(stab::gform_circuit(g).empty());
  CHECK(g.apply_post(0b101) == 0b101);

  CliffordTableau h0 = CliffordTableau::identity(3);
  h0.left_h(0);
  const GForm gh = stab::to_measurement_form(h0);
  CHECK(gh.i_set == 0b001);
  CHECK(gh.delta[0] == 0);
  CHECK((gh.gamma[0] & ~1ull) == 0);
}

TEST_CASE("exhaustive two-qubit POVM equivalence with affine post-processing") {
  const auto group = enumerate_c2();
  REQUIRE(group.size() == 11520);
  RngStream rng(67);
  Vector psi = Vector::Zero(4);
  for (int i = 0; i < 4; ++i) psi(i) = cdouble(rng.next_normal(), rng.next_normal());
  psi /= psi.norm();

  for (const auto& u : group) {
    // Operator-level check of the decomposition-based dense realization.
    const Matrix du = stab::dense_unitary(u);
    const GForm g = stab::to_measurement_form(u);
    const Matrix dg = stab::dense_unitary(stab::gform_circuit(g), 2);
    const Vector pu = du * psi;
    const Vector pg = dg * psi;
    for (uint64_t y = 0; y < 4; ++y) {
      const uint64_t x = g.apply_post(y);
      CHECK(std::abs(std::norm(pg(y)) - std::norm(pu(x))) < 1e-12);
    }
  }
}

TEST_CASE("dense realization respects the tableau on every two-qubit element") {
  const auto group = enumerate_c2();
  RngStream rng(68);
  // Spot-check a deterministic subsample at the operator level.
  for (std::size_t idx = 0; idx < group.size(); idx += 97) {
    const auto& u = group[idx];
    const Matrix du = stab::dense_unitary(u);
    for (int j = 0; j < 2; ++j) {
      const Matrix lhs = du * dense_pauli(Pauli::hermitian(1ull << j, 0), 2) * du.adjoint();
      CHECK((lhs - dense_pauli(u.image(Pauli::hermitian(1ull << j, 0)), 2)).cwiseAbs().maxCoeff() <
            1e-12);
      const Matrix lhz = du * dense_pauli(Pauli::hermitian(0, 1ull << j), 2) * du.adjoint();
      CHECK((lhz - dense_pauli(u.image(Pauli::hermitian(0, 1ull << j)), 2)).cwiseAbs().maxCoeff() <
            1e-12);
    }
  }
}

TEST_CASE("gform circuits match the closed-form action and respect the depth bound") {
  RngStream rng(69);
  for (int trial = 0; trial < 20; ++trial) {
    const auto u = stab::sample_uniform_clifford(3, rng);
    const GForm g = stab::to_measurement_form(u);
    const Matrix dg = stab::dense_unitary(stab::gform_circuit(g), 3);
    // Closed form: G|x> = i^{q(x_I)} H_I |Lx>.
    const std::size_t dim = 8;
    Matrix expected = Matrix::Zero(dim, dim);
    static const cdouble ipow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
    const int k = std::popcount(g.i_set);
    for (uint64_t x = 0; x < dim; ++x) {
      const uint64_t m = g.linear_map(x);
      const cdouble ph = ipow[g.phase_power(x)] * std::pow(2.0, -0.5 * k);
      for (uint64_t y = 0; y < dim; ++y) {
        if ((y & ~g.i_set) != (m & ~g.i_set)) continue;
        const double sign = (std::popcount(y & m & g.i_set) & 1) ? -1.0 : 1.0;
        expected(y, x) = ph * sign;
      }
    }
    CHECK((dg - expected).cwiseAbs().maxCoeff() < 1e-12);
  }

  RngStream rng8(70);
  int max_depth = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto u = stab::sample_uniform_clifford(8, rng8);
    const GForm g = stab::to_measurement_form(u);
    max_depth = std::max(max_depth, stab::two_qubit_depth(stab::gform_circuit(g), 8));
  }
  CHECK(max_depth <= 2 * 8 + 2);
}

TEST_CASE("stabilizer amplitudes: identity, hadamard wall, and dense reference") {
  const auto ident = CliffordTableau::identity(3);
  for (uint64_t b = 0; b < 8; ++b)
    for (uint64_t beta = 0; beta < 8; ++beta)
      CHECK(std::abs(stab::stab_amplitude(ident, b, beta) - cdouble(b == beta ? 1.0 : 0.0)) <
            1e-14);

  CliffordTableau hwall = CliffordTableau::identity(3);
  for (int q = 0; q < 3; ++q) hwall.left_h(q);
  for (uint64_t b = 0; b < 8; ++b)
    for (uint64_t beta = 0; beta < 8; ++beta) {
      const double expect = std::pow(2.0, -1.5) * ((std::popcount(b & beta) & 1) ? -1.0 : 1.0);
      CHECK(std::abs(stab::stab_amplitude(hwall, b, beta) - expect) < 1e-14);
    }

  RngStream rng(71);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_below(2));
    const auto rc = random_circuit(n, 16, rng);
    const Matrix du = stab::dense_unitary(rc.tableau);
    const std::size_t dim = 1ull << n;
    for (int probe = 0; probe < 25; ++probe) {
      const uint64_t b = rng.next_below(dim);
      const uint64_t beta = rng.next_below(dim);
      const cdouble expect = std::conj(du(b, beta));  // <beta|U^dag|b> = conj(<b|U|beta>)
      const cdouble got = stab::stab_amplitude(rc.tableau, b, beta);
      CHECK(std::abs(got - expect) < 1e-10);
      // Magnitudes are 0 or 2^{-s/2}.
      const double mag2 = std::norm(got);
      if (mag2 > 1e-14) {
        const double s = -std::log2(mag2);
        CHECK(std::abs(s - std::round(s)) < 1e-9);
      }
    }
  }
}

TEST_CASE("estimator kernels with and without the affine record agree") {
  RngStream rng(72);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = 3;
    const auto u = stab::sample_uniform_clifford(n, rng);
    const GForm g = stab::to_measurement_form(u);
    for (uint64_t y = 0; y < 8; ++y)
      for (uint64_t beta = 0; beta < 8; ++beta) {
        const uint64_t b = g.apply_post(y);
        const cdouble via_g =
            stab::gform_bra_amplitude(g, y, beta) * stab::gform_ket0_amplitude(g, y);
        const cdouble via_u =
            stab::stab_amplitude(u, b, beta) * std::conj(stab::stab_amplitude(u, b, 0));
        CHECK(std::abs(via_g - via_u) < 1e-12);
      }
  }
}

TEST_CASE("exact single-qubit measurement channel inverts to the identity") {
  // Enumerate C_1 via sampling keys (24 elements), then check
  // (2^n + 1) M(rho) - tr(rho) I = rho with exact outcome probabilities.
  RngStream rng(73);
  std::map<std::vector<uint8_t>, CliffordTableau> group;
  while (group.size() < 24) {
    auto t = stab::sample_uniform_clifford(1, rng);
    group.emplace(t.key(), std::move(t));
  }
  Matrix rho(2, 2);
  rho << cdouble(0.7, 0.0), cdouble(0.1, 0.2), cdouble(0.1, -0.2), cdouble(0.3, 0.0);
  Matrix channel = Matrix::Zero(2, 2);
  for (const auto& [key, u] : group) {
    const Matrix du = stab::dense_unitary(u);
    for (int b = 0; b < 2; ++b) {
      const Vector state = du.adjoint().col(b);
      const double prob = (state.adjoint() * rho * state)(0, 0).real();
      channel += prob * state * state.adjoint() / 24.0;
    }
  }
  const Matrix inverted = 3.0 * channel - Matrix::Identity(2, 2);
  CHECK((inverted - rho).cwiseAbs().maxCoeff() < 1e-12);
}

}  // TEST_SUITE
