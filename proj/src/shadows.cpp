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

#include "qcqmc/shadows.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <thread>

#include "qcqmc/oracle.hpp"

namespace qcqmc::shadows {

namespace {

void parallel_chunks(std::size_t n_items, int threads,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  if (threads <= 1 || n_items < 2) {
    fn(0, n_items);
    return;
  }
  const int nt = static_cast<int>(std::min<std::size_t>(threads, n_items));
  std::vector<std::thread> pool;
  for (int t = 0; t < nt; ++t) pool.emplace_back(fn, n_items * t / nt, n_items * (t + 1) / nt);
  for (auto& th : pool) th.join();
}

}  // namespace

int Ensemble::total_qubits() const {
  int total = 0;
  for (int s : part_sizes) total += s;
  return total;
}

ShadowRecord acquire_shadow(const qsim::StateVector& tau, const Ensemble& ensemble,
                            int n_cliffords, int shots, const qsim::NoiseModel& noise,
                            uint64_t seed, int threads) {
  if (ensemble.total_qubits() != tau.n_qubits)
    throw std::invalid_argument("acquire_shadow: ensemble size does not match the state");
  if (n_cliffords < 1 || shots < 1)
    throw std::invalid_argument("acquire_shadow: need at least one Clifford and one shot");
  ShadowRecord record;
  record.ensemble = ensemble;
  record.n_qubits = tau.n_qubits;
  record.shots_per_clifford = shots;
  record.noise = noise;
  record.seed = seed;
  record.entries.resize(n_cliffords);

  parallel_chunks(n_cliffords, threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) {
      RngStream rng(RngStream::derive(seed, 0x53484457, k));
      ShadowEntry entry;
      qsim::StateVector rotated = tau;
      int offset = 0;
      for (int part_size : ensemble.part_sizes) {
        stab::CliffordTableau u = ensemble.force_identity
                                      ? stab::CliffordTableau::identity(part_size)
                                      : stab::sample_uniform_clifford(part_size, rng);
        stab::GForm g = stab::to_measurement_form(u);
        for (const auto& gate : stab::gform_circuit(g)) {
          switch (gate.kind) {
            case stab::Gate::Kind::H: qsim::apply_h(rotated, offset + gate.a); break;
            case stab::Gate::Kind::P: qsim::apply_p(rotated, offset + gate.a); break;
            case stab::Gate::Kind::CZ:
              qsim::apply_cz(rotated, offset + gate.a, offset + gate.b);
              break;
            case stab::Gate::Kind::CNOT:
              qsim::apply_cnot(rotated, offset + gate.a, offset + gate.b);
              break;
          }
        }
        entry.parts.push_back(std::move(g));
        offset += part_size;
      }
      entry.outcomes = qsim::sample_measurements(rotated, noise, rng, shots);
      record.entries[k] = std::move(entry);
    }
  });
  return record;
}

namespace {

// Per-Clifford mean of the estimator kernel for one beta.
cdouble entry_mean(const ShadowEntry& entry, uint64_t beta) {
  static const cdouble kIPow[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  struct PartData {
    uint64_t mask;
    uint64_t i_set;
    uint64_t mapped;
    cdouble phase;
  };
  std::vector<PartData> parts;
  double prefactor = 2.0;
  int offset = 0;
  for (const auto& g : entry.parts) {
    PartData pd;
    pd.mask = (g.n >= 64) ? ~0ull : ((1ull << g.n) - 1);
    const uint64_t beta_p = (beta >> offset) & pd.mask;
    pd.i_set = g.i_set;
    pd.mapped = g.linear_map(beta_p);
    pd.phase = std::conj(kIPow[g.phase_power(beta_p)]);
    parts.push_back(pd);
    prefactor *= (std::pow(2.0, g.n) + 1.0) * std::pow(2.0, -std::popcount(g.i_set));
    offset += g.n;
  }
  cdouble acc = 0.0;
  for (uint64_t y : entry.outcomes) {
    cdouble term = prefactor;
    int off = 0;
    for (std::size_t p = 0; p < parts.size(); ++p) {
      const auto& pd = parts[p];
      const int np = entry.parts[p].n;
      const uint64_t yp = (y >> off) & pd.mask;
      // <y|G|0> needs y supported on I; <beta|G^dag|y> needs the outside-I
      // pattern of the mapped beta to match (here: to vanish as well).
      if ((yp & ~pd.i_set) != 0 || (pd.mapped & ~pd.i_set & pd.mask) != 0) {
        term = 0.0;
        break;
      }
      const double sign = (std::popcount(pd.mapped & yp & pd.i_set) & 1) ? -1.0 : 1.0;
      term *= pd.phase * sign;
      off += np;
    }
    acc += term;
  }
  return acc / static_cast<double>(entry.outcomes.size());
}

}  // namespace

OverlapEstimate estimate_basis_overlap(const ShadowRecord& record, uint64_t beta,
                                       const EstimatorOptions& options) {
  if (record.entries.empty()) throw std::invalid_argument("estimate_basis_overlap: empty record");
  int offset = 0;
  for (int part_size : record.ensemble.part_sizes) {
    const uint64_t mask = (part_size >= 64) ? ~0ull : ((1ull << part_size) - 1);
    if (((beta >> offset) & mask) == 0)
      throw std::invalid_argument("estimate_basis_overlap: beta vanishes on a part");
    offset += part_size;
  }

  const std::size_t n_cliffords = record.entries.size();
  std::vector<cdouble> means(n_cliffords);
  for (std::size_t k = 0; k < n_cliffords; ++k) means[k] = entry_mean(record.entries[k], beta);

  OverlapEstimate out;
  out.n_samples = static_cast<long>(n_cliffords) * record.shots_per_clifford;
  cdouble mean = 0.0;
  for (const cdouble& m : means) mean += m;
  mean /= static_cast<double>(n_cliffords);

  if (options.median_of_means && n_cliffords >= static_cast<std::size_t>(2 * options.n_batches)) {
    const int nb = options.n_batches;
    std::vector<double> re, im;
    for (int b = 0; b < nb; ++b) {
      cdouble acc = 0.0;
      const std::size_t lo = n_cliffords * b / nb, hi = n_cliffords * (b + 1) / nb;
      for (std::size_t k = lo; k < hi; ++k) acc += means[k];
      acc /= static_cast<double>(hi - lo);
      re.push_back(acc.real());
      im.push_back(acc.imag());
    }
    std::sort(re.begin(), re.end());
    std::sort(im.begin(), im.end());
    out.value = cdouble(re[nb / 2], im[nb / 2]);
  } else {
    out.value = mean;
  }

  if (n_cliffords > 1) {
    double var = 0.0;
    for (const cdouble& m : means) var += std::norm(m - mean);
    var /= static_cast<double>(n_cliffords - 1);
    out.std_error = std::sqrt(var / static_cast<double>(n_cliffords));
  }
  return out;
}

TrialWavefunction reconstruct_trial(const ShadowRecord& record, int n_orb, int n_alpha,
                                    int n_beta, const EstimatorOptions& options, int threads) {
  if (record.entries.empty()) throw std::invalid_argument("reconstruct_trial: empty record");
  if (record.n_qubits != 2 * n_orb)
    throw std::invalid_argument("reconstruct_trial: qubit count does not match the orbital count");
  auto basis = oracle::SectorBasis::build(n_orb, n_alpha, n_beta);
  if (basis.size() > 1000000)
    throw std::runtime_error(
        "reconstruct_trial: sector too large to enumerate; use the sampling overlap estimator");
  Vector amps(basis.size());
  RealVector errs(basis.size());
  const std::size_t nd = basis.dn_masks.size();
  parallel_chunks(basis.up_masks.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t iu = lo; iu < hi; ++iu)
      for (std::size_t id = 0; id < nd; ++id) {
        const uint64_t beta =
            basis.up_masks[iu] | (basis.dn_masks[id] << static_cast<unsigned>(n_orb));
        const OverlapEstimate est = estimate_basis_overlap(record, beta, options);
        amps(iu * nd + id) = est.value;
        errs(iu * nd + id) = est.std_error;
      }
  });
  return TrialWavefunction::shadow_reconstructed(std::move(basis), std::move(amps),
                                                 std::move(errs));
}

cdouble estimate_walker_overlap(const TrialWavefunction& trial, const SlaterDeterminant& det) {
  return trial.overlap(det);
}

double variational_energy(const TrialWavefunction& trial, const Hamiltonian& ham) {
  if (trial.kind() == TrialWavefunction::Kind::SingleDet)
    throw std::invalid_argument("variational_energy: amplitude-map trial required");
  const double norm2 = trial.amplitudes().squaredNorm();
  if (norm2 <= 0.0) throw std::runtime_error("variational_energy: reconstructed norm vanishes");
  return oracle::variational_energy_exact(ham, trial.basis(), trial.amplitudes());
}

OverlapEstimate sampling_overlap(const std::function<cdouble(uint64_t)>& psi_amplitude,
                                 const AmplitudeSource& phi, long n_samples, RngStream& rng) {
  if (n_samples < 1) throw std::invalid_argument("sampling_overlap: need at least one sample");
  std::vector<cdouble> kept;
  kept.reserve(n_samples);
  long rejected = 0;
  for (long s = 0; s < n_samples; ++s) {
    const uint64_t x = phi.sample(rng);
    const cdouble phix = phi.amplitude(x);
    if (std::abs(phix) < 1e-300) {
      ++rejected;
      continue;
    }
    kept.push_back(std::conj(psi_amplitude(x)) / std::conj(phix));
  }
  if (rejected > n_samples / 2)
    throw std::runtime_error("sampling_overlap: more than half of the samples hit zero amplitude");
  if (kept.empty()) throw std::runtime_error("sampling_overlap: no accepted samples");
  const long accepted = static_cast<long>(kept.size());
  cdouble mean = 0.0;
  for (const cdouble& v : kept) mean += v;
  mean /= static_cast<double>(accepted);
  double var_acc = 0.0;
  for (const cdouble& v : kept) var_acc += std::norm(v - mean);
  OverlapEstimate out;
  out.value = mean;
  out.n_samples = accepted;
  if (accepted > 1)
    out.std_error =
        std::sqrt(var_acc / static_cast<double>(accepted - 1) / static_cast<double>(accepted));
  return out;
}

namespace {

void put_u64(std::ofstream& out, uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); }
uint64_t get_u64(std::ifstream& in) {
  uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 8);
  return v;
}

void write_gform(std::ofstream& out, const stab::GForm& g) {
  out.write("STAB v1\0", 8);
  put_u64(out, static_cast<uint64_t>(g.n));
  put_u64(out, g.i_set);
  for (int i = 0; i < g.n; ++i) put_u64(out, g.gamma[i]);
  for (int i = 0; i < g.n; ++i) put_u64(out, g.delta[i]);
  for (int i = 0; i < g.n; ++i) put_u64(out, g.delta_post[i]);
  put_u64(out, g.delta_post_offset);
}

stab::GForm read_gform(std::ifstream& in) {
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, "STAB v1\0", 8) != 0)
    throw std::runtime_error("shadow record: bad STAB block magic");
  stab::GForm g;
  g.n = static_cast<int>(get_u64(in));
  g.i_set = get_u64(in);
  g.gamma.resize(g.n);
  g.delta.resize(g.n);
  g.delta_post.resize(g.n);
  for (int i = 0; i < g.n; ++i) g.gamma[i] = get_u64(in);
  for (int i = 0; i < g.n; ++i) g.delta[i] = get_u64(in);
  for (int i = 0; i < g.n; ++i) g.delta_post[i] = get_u64(in);
  g.delta_post_offset = get_u64(in);
  return g;
}

}  // namespace

void write_shadow_record(const ShadowRecord& record, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write shadow record: " + path);
  out.write("SHDW v1\0", 8);
  put_u64(out, record.ensemble.kind == Ensemble::Kind::Global ? 0 : 1);
  put_u64(out, record.ensemble.part_sizes.size());
  for (int s : record.ensemble.part_sizes) put_u64(out, static_cast<uint64_t>(s));
  put_u64(out, static_cast<uint64_t>(record.n_qubits));
  put_u64(out, static_cast<uint64_t>(record.shots_per_clifford));
  double p = record.noise.depolarizing_p;
  out.write(reinterpret_cast<const char*>(&p), 8);
  put_u64(out, record.seed);
  put_u64(out, record.entries.size());
  const int outcome_bytes = (record.n_qubits + 7) / 8;
  for (const auto& entry : record.entries) {
    for (const auto& g : entry.parts) write_gform(out, g);
    for (uint64_t y : entry.outcomes) out.write(reinterpret_cast<const char*>(&y), outcome_bytes);
  }
}

ShadowRecord read_shadow_record(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open shadow record: " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, "SHDW v1\0", 8) != 0)
    throw std::runtime_error("bad shadow record magic in " + path);
  ShadowRecord record;
  record.ensemble.kind = get_u64(in) == 0 ? Ensemble::Kind::Global : Ensemble::Kind::Partitioned;
  const uint64_t n_parts = get_u64(in);
  for (uint64_t i = 0; i < n_parts; ++i)
    record.ensemble.part_sizes.push_back(static_cast<int>(get_u64(in)));
  record.n_qubits = static_cast<int>(get_u64(in));
  record.shots_per_clifford = static_cast<int>(get_u64(in));
  in.read(reinterpret_cast<char*>(&record.noise.depolarizing_p), 8);
  record.seed = get_u64(in);
  const uint64_t n_entries = get_u64(in);
  const int outcome_bytes = (record.n_qubits + 7) / 8;
  for (uint64_t k = 0; k < n_entries; ++k) {
    ShadowEntry entry;
    for (uint64_t p = 0; p < n_parts; ++p) entry.parts.push_back(read_gform(in));
    entry.outcomes.resize(record.shots_per_clifford);
    for (auto& y : entry.outcomes) {
      y = 0;
      in.read(reinterpret_cast<char*>(&y), outcome_bytes);
    }
    record.entries.push_back(std::move(entry));
  }
  if (!in) throw std::runtime_error("truncated shadow record: " + path);
  return record;
}

void write_estimates_csv(const TrialWavefunction& trial, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write estimates csv: " + path);
  out << "beta_up,beta_dn,re,im,stderr\n";
  const auto& basis = trial.basis();
  auto bits = [&](uint64_t mask) {
    std::string s(basis.n_orb, '0');
    for (int p = 0; p < basis.n_orb; ++p)
      if (mask >> p & 1) s[p] = '1';
    return s;
  };
  char buf[160];
  std::size_t idx = 0;
  const bool have_err =
      trial.amplitude_std_errors().size() == trial.amplitudes().size();
  for (uint64_t up : basis.up_masks)
    for (uint64_t dn : basis.dn_masks) {
      const cdouble a = trial.amplitudes()(idx);
      const double err = have_err ? trial.amplitude_std_errors()(idx) : 0.0;
      std::snprintf(buf, sizeof buf, "%s,%s,%.17g,%.17g,%.17g\n", bits(up).c_str(),
                    bits(dn).c_str(), a.real(), a.imag(), err);
      out << buf;
      ++idx;
    }
}

}  // namespace qcqmc::shadows
