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

#include "qcqmc/trial.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"
#include "qcqmc/rng.hpp"

namespace qcqmc {

namespace {

constexpr double kOverlapFloor = 1e-280;

Matrix adjugate(const Matrix& m) {
  const int k = static_cast<int>(m.rows());
  if (k == 0) return Matrix::Zero(0, 0);
  if (k == 1) return Matrix::Ones(1, 1);
  Matrix adj(k, k);
  if (k == 2) {
    adj << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return adj;
  }
  Matrix minor(k - 1, k - 1);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) {
      for (int r = 0, rr = 0; r < k; ++r) {
        if (r == i) continue;
        for (int c = 0, cc = 0; c < k; ++c) {
          if (c == j) continue;
          minor(rr, cc++) = m(r, c);
        }
        ++rr;
      }
      adj(j, i) = (((i + j) & 1) ? -1.0 : 1.0) * minor.determinant();
    }
  return adj;
}

// Complete an orthonormal n x k block to a full n x n unitary.
Matrix complete_to_unitary(const Matrix& q) {
  const int n = static_cast<int>(q.rows()), k = static_cast<int>(q.cols());
  Eigen::HouseholderQR<Matrix> qr(q);
  const Matrix full = qr.householderQ() * Matrix::Identity(n, n);
  Matrix u(n, n);
  u.leftCols(k) = q;
  u.rightCols(n - k) = full.rightCols(n - k);
  return u;
}

uint64_t low_bits(int k) { return (k >= 64) ? ~0ull : ((1ull << k) - 1); }

SlaterDeterminant columns_at(const Matrix& u_up, const Matrix& u_dn, uint64_t up, uint64_t dn) {
  SlaterDeterminant det;
  det.up = Matrix(u_up.rows(), std::popcount(up));
  det.dn = Matrix(u_dn.rows(), std::popcount(dn));
  int c = 0;
  for (int p = 0; p < u_up.cols(); ++p)
    if (up >> p & 1) det.up.col(c++) = u_up.col(p);
  c = 0;
  for (int p = 0; p < u_dn.cols(); ++p)
    if (dn >> p & 1) det.dn.col(c++) = u_dn.col(p);
  return det;
}

}  // namespace

void CircuitTrialSpec::validate() const {
  if (n_orb < 1) throw std::invalid_argument("trial spec: n_orb must be positive");
  if (pairs.empty()) throw std::invalid_argument("trial spec: at least one pair required");
  if (pp_thetas.size() != pairs.size())
    throw std::invalid_argument("trial spec: one angle per pair required");
  uint64_t used = 0;
  for (auto [occ, virt] : pairs) {
    if (occ < 0 || occ >= n_orb || virt < 0 || virt >= n_orb || occ == virt)
      throw std::invalid_argument("trial spec: bad pair orbitals");
    const uint64_t mask = (1ull << occ) | (1ull << virt);
    if (used & mask) throw std::invalid_argument("trial spec: pairs must use disjoint orbitals");
    used |= mask;
  }
  for (double t : pp_thetas)
    if (!std::isfinite(t)) throw std::invalid_argument("trial spec: non-finite angle");
  for (const auto& layer : layers) {
    if (layer.pairs.size() != layer.thetas.size())
      throw std::invalid_argument("trial spec: one angle per layer pair required");
    for (std::size_t i = 0; i < layer.pairs.size(); ++i) {
      auto [a, b] = layer.pairs[i];
      if (a < 0 || a >= 2 * n_orb || b < 0 || b >= 2 * n_orb || a == b)
        throw std::invalid_argument("trial spec: layer spin orbitals out of range");
      if (layer.kind == CircuitLayer::Kind::Hopping && (a < n_orb) != (b < n_orb))
        throw std::invalid_argument("trial spec: hopping pairs must connect equal spins");
      if (!std::isfinite(layer.thetas[i]))
        throw std::invalid_argument("trial spec: non-finite layer angle");
    }
  }
  if (!qubit_map.empty()) {
    if (static_cast<int>(qubit_map.size()) != 2 * n_orb)
      throw std::invalid_argument("trial spec: qubit map size mismatch");
    uint64_t seen = 0;
    for (int q : qubit_map) {
      if (q < 0 || q >= 2 * n_orb || (seen >> q & 1))
        throw std::invalid_argument("trial spec: qubit map is not a permutation");
      seen |= 1ull << q;
    }
  }
}

CircuitTrialSpec load_trial_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trial spec: " + path);
  nlohmann::json j;
  in >> j;
  if (j.value("format", "") != "trialspec" || j.value("version", 0) != 1)
    throw std::runtime_error("unsupported trial spec header in " + path);
  CircuitTrialSpec spec;
  spec.n_orb = j.at("n_orb").get<int>();
  for (const auto& p : j.at("pairs")) spec.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  spec.pp_thetas = j.at("pp_thetas").get<std::vector<double>>();
  for (const auto& jl : j.value("layers", nlohmann::json::array())) {
    CircuitLayer layer;
    const std::string kind = jl.at("kind").get<std::string>();
    if (kind == "density")
      layer.kind = CircuitLayer::Kind::DensityDensity;
    else if (kind == "hopping")
      layer.kind = CircuitLayer::Kind::Hopping;
    else
      throw std::runtime_error("unknown layer kind: " + kind);
    for (const auto& p : jl.at("pairs")) layer.pairs.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
    layer.thetas = jl.at("thetas").get<std::vector<double>>();
    spec.layers.push_back(std::move(layer));
  }
  spec.qubit_map = j.value("qubit_map", std::vector<int>{});
  spec.optimizer_converged = j.value("optimizer_converged", true);
  spec.validate();
  return spec;
}

void save_trial_spec(const CircuitTrialSpec& spec, const std::string& path) {
  nlohmann::ordered_json j;
  j["format"] = "trialspec";
  j["version"] = 1;
  j["n_orb"] = spec.n_orb;
  j["pairs"] = nlohmann::json::array();
  for (auto [o, v] : spec.pairs) j["pairs"].push_back({o, v});
  j["pp_thetas"] = spec.pp_thetas;
  j["layers"] = nlohmann::json::array();
  for (const auto& layer : spec.layers) {
    nlohmann::ordered_json jl;
    jl["kind"] = layer.kind == CircuitLayer::Kind::DensityDensity ? "density" : "hopping";
    jl["pairs"] = nlohmann::json::array();
    for (auto [a, b] : layer.pairs) jl["pairs"].push_back({a, b});
    jl["thetas"] = layer.thetas;
    j["layers"].push_back(jl);
  }
  if (!spec.qubit_map.empty()) j["qubit_map"] = spec.qubit_map;
  j["optimizer_converged"] = spec.optimizer_converged;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trial spec: " + path);
  out << j.dump(2) << "\n";
}

namespace {

// Parametrized circuit ops. Pair rotations carry four qubits; layer gates two.
struct ParamOp {
  enum class Type { PairRotation, Density, Hopping };
  Type type;
  int q[4] = {-1, -1, -1, -1};
  uint64_t hop_string = 0;  // parity mask for hopping gates
};

std::vector<ParamOp> circuit_ops(const CircuitTrialSpec& spec) {
  std::vector<ParamOp> ops;
  const int n = spec.n_orb;
  for (auto [occ, virt] : spec.pairs) {
    ParamOp op;
    op.type = ParamOp::Type::PairRotation;
    op.q[0] = spec.qubit_of(occ);          // occ up
    op.q[1] = spec.qubit_of(virt);         // virt up
    op.q[2] = spec.qubit_of(n + occ);      // occ dn
    op.q[3] = spec.qubit_of(n + virt);     // virt dn
    ops.push_back(op);
  }
  for (const auto& layer : spec.layers)
    for (std::size_t i = 0; i < layer.pairs.size(); ++i) {
      auto [a, b] = layer.pairs[i];
      ParamOp op;
      op.type = layer.kind == CircuitLayer::Kind::Hopping ? ParamOp::Type::Hopping
                                                          : ParamOp::Type::Density;
      op.q[0] = spec.qubit_of(a);
      op.q[1] = spec.qubit_of(b);
      if (op.type == ParamOp::Type::Hopping) {
        // Jordan-Wigner string over the modes strictly between a and b,
        // mapped onto their qubits.
        const int lo = std::min(a, b), hi = std::max(a, b);
        for (int m = lo + 1; m < hi; ++m) op.hop_string |= 1ull << spec.qubit_of(m);
      }
      ops.push_back(op);
    }
  return ops;
}

// Hopping rotation with an explicit parity mask (general qubit layouts).
void apply_hopping(qsim::StateVector& s, int qi, int qj, uint64_t string, double theta) {
  const uint64_t ib = 1ull << qi, jb = 1ull << qj;
  const double c = std::cos(theta), sn = std::sin(theta);
  for (uint64_t x = 0; x < s.dim(); ++x) {
    if (!(x & ib) || (x & jb)) continue;
    const uint64_t y = (x ^ ib) | jb;
    const double parity = (std::popcount(x & string) & 1) ? -1.0 : 1.0;
    const cdouble vi = s.amp(x), vj = s.amp(y);
    s.amp(x) = c * vi + parity * sn * vj;
    s.amp(y) = -parity * sn * vi + c * vj;
  }
}

// Apply the generator of each op type (for analytic gradients).
void apply_generator(qsim::StateVector& s, const ParamOp& op) {
  Vector out = Vector::Zero(s.dim());
  if (op.type == ParamOp::Type::PairRotation) {
    // d/dt CRy(2t) = (|1><1|_c x (-iY)_t) CRy(2t)
    const uint64_t cb = 1ull << op.q[0], tb = 1ull << op.q[1];
    for (uint64_t x = 0; x < s.dim(); ++x) {
      if (!(x & cb)) continue;
      if (x & tb)
        out(x ^ tb) -= s.amp(x);
      else
        out(x | tb) += s.amp(x);
    }
  } else if (op.type == ParamOp::Type::Density) {
    const uint64_t mask = (1ull << op.q[0]) | (1ull << op.q[1]);
    for (uint64_t x = 0; x < s.dim(); ++x)
      if ((x & mask) == mask) out(x) = cdouble(0.0, 1.0) * s.amp(x);
  } else {
    const uint64_t ib = 1ull << op.q[0], jb = 1ull << op.q[1];
    for (uint64_t x = 0; x < s.dim(); ++x) {
      if (!(x & ib) || (x & jb)) continue;
      const uint64_t y = (x ^ ib) | jb;
      const double parity = (std::popcount(x & op.hop_string) & 1) ? -1.0 : 1.0;
      out(x) += parity * s.amp(y);
      out(y) -= parity * s.amp(x);
    }
  }
  s.amp = std::move(out);
}

void apply_op(qsim::StateVector& s, const ParamOp& op, double theta, bool insert_generator) {
  switch (op.type) {
    case ParamOp::Type::PairRotation:
      qsim::apply_controlled_ry(s, op.q[0], op.q[1], 2.0 * theta);
      if (insert_generator) apply_generator(s, op);
      qsim::apply_cnot(s, op.q[1], op.q[0]);
      qsim::apply_cnot(s, op.q[0], op.q[2]);
      qsim::apply_cnot(s, op.q[1], op.q[3]);
      return;
    case ParamOp::Type::Density:
      qsim::apply_cphase(s, op.q[0], op.q[1], theta);
      if (insert_generator) apply_generator(s, op);
      return;
    case ParamOp::Type::Hopping:
      apply_hopping(s, op.q[0], op.q[1], op.hop_string, theta);
      if (insert_generator) apply_generator(s, op);
      return;
  }
}

std::vector<double> gather_angles(const CircuitTrialSpec& spec) {
  std::vector<double> angles = spec.pp_thetas;
  for (const auto& layer : spec.layers)
    angles.insert(angles.end(), layer.thetas.begin(), layer.thetas.end());
  return angles;
}

CircuitTrialSpec with_angles(const CircuitTrialSpec& spec, const std::vector<double>& angles) {
  CircuitTrialSpec out = spec;
  std::size_t k = 0;
  for (double& t : out.pp_thetas) t = angles[k++];
  for (auto& layer : out.layers)
    for (double& t : layer.thetas) t = angles[k++];
  return out;
}

// Statevector of the circuit from the pair reference (no vacuum branch), with
// an optional derivative-generator insertion at parameter slot `insert_at`.
qsim::StateVector build_circuit_state(const CircuitTrialSpec& spec,
                                      const std::vector<double>& angles, int insert_at = -1) {
  auto state = qsim::StateVector::vacuum(spec.n_qubits());
  for (auto [occ, virt] : spec.pairs) qsim::apply_x(state, spec.qubit_of(occ));
  const auto ops = circuit_ops(spec);
  for (std::size_t k = 0; k < ops.size(); ++k)
    apply_op(state, ops[k], angles[k], static_cast<int>(k) == insert_at);
  return state;
}

Vector gather_sector(const CircuitTrialSpec& spec, const oracle::SectorBasis& basis,
                     const qsim::StateVector& state) {
  const int n = spec.n_orb;
  Vector amps(basis.size());
  std::size_t idx = 0;
  for (uint64_t up : basis.up_masks)
    for (uint64_t dn : basis.dn_masks) {
      uint64_t bits = 0;
      for (int p = 0; p < n; ++p) {
        if (up >> p & 1) bits |= 1ull << spec.qubit_of(p);
        if (dn >> p & 1) bits |= 1ull << spec.qubit_of(n + p);
      }
      amps(idx++) = state.amp(bits);
    }
  return amps;
}

}  // namespace

std::pair<oracle::SectorBasis, Vector> build_pp_state(const CircuitTrialSpec& spec) {
  spec.validate();
  const int eta = spec.n_pairs();
  const auto basis = oracle::SectorBasis::build(spec.n_orb, eta, eta);
  const auto state = build_circuit_state(spec, gather_angles(spec));
  return {basis, gather_sector(spec, basis, state)};
}

qsim::StateVector prepare_tau(const CircuitTrialSpec& spec) {
  spec.validate();
  if (spec.n_pairs() == 0) throw std::invalid_argument("prepare_tau requires eta > 0");
  auto state = qsim::StateVector::vacuum(spec.n_qubits());
  // Hadamard plus a CNOT ladder builds (|0...0> + |all pair references>)/sqrt(2).
  const int lead = spec.qubit_of(spec.pairs[0].first);
  qsim::apply_h(state, lead);
  for (int i = 1; i < spec.n_pairs(); ++i)
    qsim::apply_cnot(state, lead, spec.qubit_of(spec.pairs[i].first));
  const auto ops = circuit_ops(spec);
  const auto angles = gather_angles(spec);
  for (std::size_t k = 0; k < ops.size(); ++k) apply_op(state, ops[k], angles[k], false);
  return state;
}

TrialWavefunction TrialWavefunction::single_det(SlaterDeterminant det) {
  TrialWavefunction t;
  t.kind_ = Kind::SingleDet;
  t.n_orb_ = det.n_orb();
  t.n_alpha_ = det.n_alpha();
  t.n_beta_ = det.n_beta();
  t.ref_ = std::move(det);
  return t;
}

TrialWavefunction TrialWavefunction::multi_det(oracle::SectorBasis basis, Vector amplitudes) {
  if (static_cast<std::size_t>(amplitudes.size()) != basis.size())
    throw std::invalid_argument("multi_det: amplitude count mismatch");
  TrialWavefunction t;
  t.kind_ = Kind::MultiDet;
  t.n_orb_ = basis.n_orb;
  t.n_alpha_ = basis.n_alpha;
  t.n_beta_ = basis.n_beta;
  t.basis_ = std::move(basis);
  t.amps_ = std::move(amplitudes);
  return t;
}

TrialWavefunction TrialWavefunction::circuit(const CircuitTrialSpec& spec) {
  auto [basis, amps] = build_pp_state(spec);
  TrialWavefunction t = multi_det(std::move(basis), std::move(amps));
  t.kind_ = Kind::Circuit;
  t.spec_ = spec;
  return t;
}

TrialWavefunction TrialWavefunction::shadow_reconstructed(oracle::SectorBasis basis,
                                                          Vector amplitudes,
                                                          RealVector std_errors) {
  TrialWavefunction t = multi_det(std::move(basis), std::move(amplitudes));
  t.kind_ = Kind::ShadowReconstructed;
  t.amp_stderr_ = std::move(std_errors);
  return t;
}

int TrialWavefunction::n_orb() const { return n_orb_; }
int TrialWavefunction::n_alpha() const { return n_alpha_; }
int TrialWavefunction::n_beta() const { return n_beta_; }

void TrialWavefunction::set_offline_rotation(Matrix r_up, Matrix r_dn) {
  if (r_up.rows() != n_orb_ || r_up.cols() != n_orb_ || r_dn.rows() != n_orb_ ||
      r_dn.cols() != n_orb_)
    throw std::invalid_argument("offline rotation: shape mismatch");
  const double dev_u =
      (r_up.adjoint() * r_up - Matrix::Identity(n_orb_, n_orb_)).cwiseAbs().maxCoeff();
  const double dev_d =
      (r_dn.adjoint() * r_dn - Matrix::Identity(n_orb_, n_orb_)).cwiseAbs().maxCoeff();
  if (dev_u > 1e-10 || dev_d > 1e-10)
    throw std::invalid_argument("offline rotation: matrix is not unitary");
  if (kind_ == Kind::SingleDet) {  // fold into the reference determinant
    ref_.up = r_up * ref_.up;
    ref_.dn = r_dn * ref_.dn;
    return;
  }
  has_rotation_ = true;
  rot_up_ = std::move(r_up);
  rot_dn_ = std::move(r_dn);
}

cdouble TrialWavefunction::overlap(const SlaterDeterminant& det) const {
  if (det.n_orb() != n_orb_ || det.n_alpha() != n_alpha_ || det.n_beta() != n_beta_)
    throw std::invalid_argument("trial overlap: sector mismatch");
  if (kind_ == Kind::SingleDet) return qcqmc::overlap(det, ref_);
  SlaterDeterminant rotated;
  const SlaterDeterminant* w = &det;
  if (has_rotation_) {
    rotated.up = rot_up_.adjoint() * det.up;
    rotated.dn = rot_dn_.adjoint() * det.dn;
    w = &rotated;
  }
  cdouble acc = 0.0;
  std::size_t idx = 0;
  for (uint64_t up : basis_.up_masks) {
    const cdouble mu = std::conj(block_minor(w->up, up));
    if (mu == cdouble(0.0)) {
      idx += basis_.dn_masks.size();
      continue;
    }
    for (uint64_t dn : basis_.dn_masks) {
      const cdouble a = amps_(idx++);
      if (a != cdouble(0.0)) acc += mu * std::conj(block_minor(w->dn, dn)) * a;
    }
  }
  return acc;
}

TrialWavefunction::TransitionMatrices TrialWavefunction::one_body_transitions(
    const SlaterDeterminant& det) const {
  TransitionMatrices out;
  if (kind_ == Kind::SingleDet) {
    const auto [gu, gd] = greens_function(ref_, det);
    out.den = qcqmc::overlap(ref_, det);
    // <T|c^dag_p c_q|W>/<T|W> = G(q,p); return unnormalized transposed G.
    out.up = gu.transpose() * out.den;
    out.dn = gd.transpose() * out.den;
    return out;
  }
  SlaterDeterminant rotated;
  const SlaterDeterminant* w = &det;
  if (has_rotation_) {
    rotated.up = rot_up_.adjoint() * det.up;
    rotated.dn = rot_dn_.adjoint() * det.dn;
    w = &rotated;
  }
  const int n = n_orb_;
  Matrix m_up = Matrix::Zero(n, n), m_dn = Matrix::Zero(n, n);
  cdouble den = 0.0;
  std::size_t idx = 0;
  for (uint64_t up : basis_.up_masks) {
    Matrix minor_u(n_alpha_, n_alpha_);
    std::vector<int> rows_u;
    for (int p = 0; p < n; ++p)
      if (up >> p & 1) {
        minor_u.row(rows_u.size()) = w->up.row(p);
        rows_u.push_back(p);
      }
    const Matrix adj_u = adjugate(minor_u);
    const cdouble det_u = n_alpha_ ? minor_u.determinant() : cdouble(1.0);
    const Matrix pu = w->up * adj_u;  // pu(q, pos) = <beta_u|c^dag_{rows[pos]} c_q|W_u>
    for (uint64_t dn : basis_.dn_masks) {
      const cdouble a = std::conj(amps_(idx++));
      if (a == cdouble(0.0)) continue;
      Matrix minor_d(n_beta_, n_beta_);
      std::vector<int> rows_d;
      for (int p = 0; p < n; ++p)
        if (dn >> p & 1) {
          minor_d.row(rows_d.size()) = w->dn.row(p);
          rows_d.push_back(p);
        }
      const Matrix adj_d = adjugate(minor_d);
      const cdouble det_d = n_beta_ ? minor_d.determinant() : cdouble(1.0);
      den += a * det_u * det_d;
      const Matrix pd = w->dn * adj_d;
      for (std::size_t pos = 0; pos < rows_u.size(); ++pos)
        m_up.row(rows_u[pos]) += a * det_d * pu.col(pos).transpose();
      for (std::size_t pos = 0; pos < rows_d.size(); ++pos)
        m_dn.row(rows_d[pos]) += a * det_u * pd.col(pos).transpose();
    }
  }
  if (has_rotation_) {
    m_up = (rot_up_.conjugate() * m_up * rot_up_.transpose()).eval();
    m_dn = (rot_dn_.conjugate() * m_dn * rot_dn_.transpose()).eval();
  }
  out.up = std::move(m_up);
  out.dn = std::move(m_dn);
  out.den = den;
  return out;
}

namespace {

cdouble local_energy_wick(const TrialWavefunction& trial, const Hamiltonian& ham,
                          const CholeskyFactors& chol, const SlaterDeterminant& det) {
  const auto [gu, gd] = greens_function(trial.reference_determinant(), det);
  const Matrix h1 = ham.h1.cast<cdouble>();
  cdouble e = ham.e_core + (h1 * gu).trace() + (h1 * gd).trace();
  for (const auto& l : chol.vectors) {
    const Matrix lc = l.cast<cdouble>();
    const Matrix lu = lc * gu, ld = lc * gd;
    const cdouble direct = lu.trace() + ld.trace();
    e += 0.5 * (direct * direct - (lu * lu).trace() - (ld * ld).trace());
  }
  return e;
}

}  // namespace

cdouble local_energy_by_queries(const TrialWavefunction& trial, const Hamiltonian& ham,
                                const CholeskyFactors& chol, const SlaterDeterminant& det) {
  const auto [q, lf] = orthonormalize(det);
  const Matrix u_up = complete_to_unitary(q.up);
  const Matrix u_dn = complete_to_unitary(q.dn);
  const auto ints = oracle::SpinIntegrals::rotated(ham, chol, u_up, u_dn);
  const uint64_t ref_up = low_bits(det.n_alpha()), ref_dn = low_bits(det.n_beta());

  const cdouble den = std::conj(trial.overlap(q));
  if (std::abs(den) < kOverlapFloor)
    throw std::runtime_error("local_energy: trial overlap vanishes");
  cdouble num = 0.0;
  oracle::connected_elements(ints, ref_up, ref_dn, [&](uint64_t u2, uint64_t d2, cdouble me) {
    if (me == cdouble(0.0)) return;
    const SlaterDeterminant xdet = columns_at(u_up, u_dn, u2, d2);
    num += std::conj(trial.overlap(xdet)) * me;
  });
  return num / den;
}

cdouble local_energy(const TrialWavefunction& trial, const Hamiltonian& ham,
                     const CholeskyFactors& chol, const SlaterDeterminant& det) {
  if (trial.kind() == TrialWavefunction::Kind::SingleDet)
    return local_energy_wick(trial, ham, chol, det);
  return local_energy_by_queries(trial, ham, chol, det);
}

Vector force_bias(const TrialWavefunction& trial, const CholeskyFactors& chol,
                  const SlaterDeterminant& det) {
  const std::size_t ng = chol.vectors.size();
  Vector fb(ng);
  if (trial.kind() == TrialWavefunction::Kind::SingleDet) {
    const auto [gu, gd] = greens_function(trial.reference_determinant(), det);
    for (std::size_t g = 0; g < ng; ++g) {
      const Matrix lc = chol.vectors[g].cast<cdouble>();
      fb(g) = (lc * gu).trace() + (lc * gd).trace();
    }
    return fb;
  }
  const auto tm = trial.one_body_transitions(det);
  if (std::abs(tm.den) < kOverlapFloor)
    throw std::runtime_error("force_bias: trial overlap vanishes");
  for (std::size_t g = 0; g < ng; ++g) {
    const Matrix lc = chol.vectors[g].cast<cdouble>();
    fb(g) = (lc.cwiseProduct(tm.up).sum() + lc.cwiseProduct(tm.dn).sum()) / tm.den;
  }
  return fb;
}

OptimizeResult optimize_pp(const Hamiltonian& ham, const CircuitTrialSpec& spec_template,
                           const OptimizeOptions& options) {
  spec_template.validate();
  const auto ops = circuit_ops(spec_template);
  const int n_params = static_cast<int>(ops.size());
  const auto basis =
      oracle::SectorBasis::build(spec_template.n_orb, spec_template.n_pairs(),
                                 spec_template.n_pairs());
  const auto ints = oracle::SpinIntegrals::from(ham);

  auto energy_and_gradient = [&](const std::vector<double>& angles, RealVector* grad) {
    const auto state = build_circuit_state(spec_template, angles);
    const Vector psi = gather_sector(spec_template, basis, state);
    Vector hpsi;
    oracle::apply_hamiltonian(ints, basis, psi, hpsi);
    const double energy = psi.dot(hpsi).real();  // |psi| = 1 by unitarity
    if (grad) {
      grad->resize(n_params);
      for (int k = 0; k < n_params; ++k) {
        const auto dstate = build_circuit_state(spec_template, angles, k);
        const Vector dpsi = gather_sector(spec_template, basis, dstate);
        (*grad)(k) = 2.0 * (dpsi.dot(hpsi) - energy * dpsi.dot(psi)).real();
      }
    }
    return energy;
  };

  OptimizeResult best;
  best.energy = 1e300;
  RngStream rng(RngStream::derive(options.seed, 0x0b7a11));
  for (int restart = 0; restart < std::max(1, options.restarts); ++restart) {
    std::vector<double> angles = gather_angles(spec_template);
    if (restart > 0)
      for (double& a : angles) a += options.perturbation * rng.next_normal();

    RealVector grad;
    double energy = energy_and_gradient(angles, &grad);
    RealMatrix hinv = RealMatrix::Identity(n_params, n_params);
    bool converged = grad.norm() <= options.gradient_tol;
    for (int iter = 0; iter < options.max_iterations && !converged; ++iter) {
      RealVector dir = -hinv * grad;
      if (dir.dot(grad) >= 0.0) {  // reset when curvature estimate goes bad
        hinv.setIdentity();
        dir = -grad;
      }
      double step = 1.0;
      std::vector<double> next(angles);
      double e_next = energy;
      for (int ls = 0; ls < 40; ++ls) {
        for (int k = 0; k < n_params; ++k) next[k] = angles[k] + step * dir(k);
        e_next = energy_and_gradient(next, nullptr);
        if (e_next <= energy + 1e-4 * step * dir.dot(grad)) break;
        step *= 0.5;
      }
      RealVector grad_next;
      energy_and_gradient(next, &grad_next);
      const RealVector s = step * dir;
      const RealVector y = grad_next - grad;
      const double sy = s.dot(y);
      if (sy > 1e-12) {
        const RealMatrix term = RealMatrix::Identity(n_params, n_params) - s * y.transpose() / sy;
        hinv = (term * hinv * term.transpose() + s * s.transpose() / sy).eval();
      }
      angles = next;
      energy = e_next;
      grad = grad_next;
      converged = grad.norm() <= options.gradient_tol;
    }
    if (energy < best.energy) {
      best.energy = energy;
      best.spec = with_angles(spec_template, angles);
      best.gradient_norm = grad.norm();
      best.converged = converged;
    }
  }
  best.spec.optimizer_converged = best.converged;
  return best;
}

void write_multidet_file(const oracle::SectorBasis& basis, const Vector& amps,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write multidet file: " + path);
  out << "# MDET v1\n";
  out.precision(17);
  auto bits = [&](uint64_t mask) {
    std::string s(basis.n_orb, '0');
    for (int p = 0; p < basis.n_orb; ++p)
      if (mask >> p & 1) s[p] = '1';
    return s;
  };
  std::size_t idx = 0;
  for (uint64_t up : basis.up_masks)
    for (uint64_t dn : basis.dn_masks) {
      const cdouble a = amps(idx++);
      if (a == cdouble(0.0)) continue;
      out << bits(up) << " " << bits(dn) << " " << a.real() << " " << a.imag() << "\n";
    }
}

std::pair<oracle::SectorBasis, Vector> read_multidet_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open multidet file: " + path);
  std::string line;
  int n_orb = -1, n_alpha = -1, n_beta = -1;
  std::vector<std::tuple<uint64_t, uint64_t, cdouble>> rows;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string su, sd;
    double re, im;
    if (!(ss >> su >> sd >> re >> im))
      throw std::runtime_error("multidet parse error at line " + std::to_string(line_no));
    if (n_orb < 0) n_orb = static_cast<int>(su.size());
    if (static_cast<int>(su.size()) != n_orb || static_cast<int>(sd.size()) != n_orb)
      throw std::runtime_error("multidet: inconsistent bitstring length at line " +
                               std::to_string(line_no));
    uint64_t up = 0, dn = 0;
    for (int p = 0; p < n_orb; ++p) {
      if (su[p] == '1') up |= 1ull << p;
      if (sd[p] == '1') dn |= 1ull << p;
    }
    if (n_alpha < 0) {
      n_alpha = std::popcount(up);
      n_beta = std::popcount(dn);
    }
    if (std::popcount(up) != n_alpha || std::popcount(dn) != n_beta)
      throw std::runtime_error("multidet: inconsistent Hamming weight at line " +
                               std::to_string(line_no));
    rows.emplace_back(up, dn, cdouble(re, im));
  }
  if (rows.empty()) throw std::runtime_error("multidet file is empty: " + path);
  auto basis = oracle::SectorBasis::build(n_orb, n_alpha, n_beta);
  Vector amps = Vector::Zero(basis.size());
  for (const auto& [up, dn, a] : rows) amps(basis.index_of(up, dn)) = a;
  return {std::move(basis), std::move(amps)};
}

}  // namespace qcqmc
