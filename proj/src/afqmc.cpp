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

#include "qcqmc/afqmc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <thread>

#include "qcqmc/oracle.hpp"

namespace qcqmc::afqmc {

namespace {

constexpr double kOverlapFloor = 1e-280;
constexpr double kForceBiasCap = 10.0;

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

Propagator build_propagator(const Hamiltonian& ham, const CholeskyFactors& chol,
                            const TrialWavefunction& trial, double dt) {
  if (dt <= 0.0) throw std::invalid_argument("build_propagator: dt must be positive");
  const int n = ham.n_orb;
  Propagator prop;
  prop.dt = dt;
  prop.chol = chol.vectors;

  // Trial expectation values of the auxiliary-field operators.
  const std::size_t ng = chol.vectors.size();
  prop.mf_shift = Vector::Zero(ng);
  if (trial.kind() == TrialWavefunction::Kind::SingleDet) {
    prop.mf_shift = force_bias(trial, chol, trial.reference_determinant());
  } else if (ng > 0) {
    auto [d_up, d_dn] = oracle::one_body_density_by_spin(trial.basis(), trial.amplitudes());
    if (trial.has_offline_rotation()) {
      d_up = (trial.rotation_up().conjugate() * d_up * trial.rotation_up().transpose()).eval();
      d_dn = (trial.rotation_dn().conjugate() * d_dn * trial.rotation_dn().transpose()).eval();
    }
    for (std::size_t g = 0; g < ng; ++g) {
      const Matrix lc = chol.vectors[g].cast<cdouble>();
      prop.mf_shift(g) = lc.cwiseProduct(d_up).sum() + lc.cwiseProduct(d_dn).sum();
    }
  }

  prop.h0 = ham.e_core;
  for (std::size_t g = 0; g < ng; ++g) prop.h0 -= 0.5 * prop.mf_shift(g) * prop.mf_shift(g);

  // h' = h1 - 1/2 sum_r (pr|rq) + sum_g <v_g> L_g.
  Matrix h_eff = ham.h1.cast<cdouble>();
  for (int p = 0; p < n; ++p)
    for (int q = 0; q < n; ++q) {
      double closure = 0.0;
      for (int r = 0; r < n; ++r) closure += ham.eri(p, r, r, q);
      h_eff(p, q) -= 0.5 * closure;
    }
  for (std::size_t g = 0; g < ng; ++g)
    h_eff += prop.mf_shift(g) * chol.vectors[g].cast<cdouble>();
  prop.half_onebody_up = expm((-0.5 * dt) * h_eff);
  prop.half_onebody_dn = prop.half_onebody_up;
  return prop;
}

void propagate_step(Walker& walker, const Propagator& prop, const TrialWavefunction& trial,
                    double energy_shift, RngStream& rng, StepDiagnostics* diag) {
  if (walker.dead()) return;
  const double sqdt = std::sqrt(prop.dt);
  const std::size_t ng = prop.chol.size();
  CholeskyFactors chol_view;
  chol_view.vectors = prop.chol;

  Vector xbar = Vector::Zero(ng);
  if (ng > 0) {
    const Vector fb = force_bias(trial, chol_view, walker.det);
    for (std::size_t g = 0; g < ng; ++g) {
      cdouble shift = cdouble(0.0, -1.0) * sqdt * (fb(g) - prop.mf_shift(g));
      if (std::abs(shift) > kForceBiasCap) {
        shift *= kForceBiasCap / std::abs(shift);
        if (diag) ++diag->capped_force_bias;
      }
      xbar(g) = shift;
    }
  }

  const int n = walker.det.n_orb();
  Matrix a = Matrix::Zero(n, n);
  cdouble field_dot_shift = 0.0;  // sum_g xi_g <v_g>
  cdouble gauss_log = 0.0;        // sum_g (x_g xbar_g - xbar_g^2 / 2)
  for (std::size_t g = 0; g < ng; ++g) {
    const double x = rng.next_normal();
    const cdouble xi = x - xbar(g);
    a += cdouble(0.0, 1.0) * sqdt * xi * prop.chol[g].cast<cdouble>();
    field_dot_shift += xi * prop.mf_shift(g);
    gauss_log += x * xbar(g) - 0.5 * xbar(g) * xbar(g);
  }

  const Matrix b = prop.half_onebody_up * expm(a) * prop.half_onebody_up;
  SlaterDeterminant next;
  next.up = b * walker.det.up;
  next.dn = (prop.half_onebody_dn * expm(a) * prop.half_onebody_dn) * walker.det.dn;

  const cdouble ovlp_new = trial.overlap(next);
  if (std::abs(ovlp_new) < kOverlapFloor || std::abs(walker.overlap_cache) < kOverlapFloor) {
    walker.weight = 0.0;
    if (diag) ++diag->killed_by_overlap;
    return;
  }

  // Full one-step state ratio including the propagator scalars.
  const cdouble ratio = std::conj(ovlp_new / walker.overlap_cache);
  const cdouble scalar_log =
      -prop.dt * (prop.h0 - energy_shift) - cdouble(0.0, 1.0) * sqdt * field_dot_shift;
  const cdouble s_full = ratio * std::exp(scalar_log);
  const double cos_theta = std::cos(std::arg(s_full));
  walker.det = std::move(next);
  walker.overlap_cache = ovlp_new;
  if (cos_theta <= 0.0) {
    walker.weight = 0.0;
    if (diag) ++diag->killed_by_cosine;
    return;
  }
  walker.weight *= std::abs(s_full * std::exp(gauss_log)) * cos_theta;
}

MixedEnergy measure_mixed_energy(const std::vector<Walker>& walkers,
                                 const TrialWavefunction& trial, const Hamiltonian& ham,
                                 const CholeskyFactors& chol, int threads) {
  std::vector<cdouble> eloc(walkers.size(), 0.0);
  parallel_chunks(walkers.size(), threads, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i)
      if (!walkers[i].dead()) eloc[i] = local_energy(trial, ham, chol, walkers[i].det);
  });
  MixedEnergy out;
  double num_real = 0.0;
  for (std::size_t i = 0; i < walkers.size(); ++i) {
    if (walkers[i].dead()) continue;
    out.weighted_num += walkers[i].weight * eloc[i];
    num_real += walkers[i].weight * eloc[i].real();
    out.total_weight += walkers[i].weight;
    ++out.n_alive;
  }
  if (out.total_weight <= 0.0) throw std::runtime_error("measure_mixed_energy: all walkers dead");
  out.energy = num_real / out.total_weight;
  return out;
}

void population_control(std::vector<Walker>& walkers, int target_count, RngStream& rng) {
  if (target_count < 1) throw std::invalid_argument("population_control: target must be >= 1");
  double total = 0.0;
  int alive = 0;
  for (const auto& w : walkers)
    if (!w.dead()) {
      total += w.weight;
      ++alive;
    }
  if (total <= 0.0 || alive == 0)
    throw std::runtime_error("population_control: total weight vanished");

  const double cap = 4.0 * total / alive;
  double capped_total = 0.0;
  for (auto& w : walkers) {
    if (w.dead()) continue;
    w.weight = std::min(w.weight, cap);
    capped_total += w.weight;
  }

  const double stride = capped_total / target_count;
  const double offset = rng.next_double() * stride;
  std::vector<Walker> next;
  next.reserve(target_count);
  double cumulative = 0.0;
  std::size_t src = 0;
  auto advance_to = [&](double position) {
    while (src < walkers.size()) {
      if (!walkers[src].dead() && cumulative + walkers[src].weight > position) return;
      if (!walkers[src].dead()) cumulative += walkers[src].weight;
      ++src;
    }
    // Roundoff at the very end: fall back to the last live walker.
    do {
      --src;
    } while (src > 0 && walkers[src].dead());
  };
  for (int k = 0; k < target_count; ++k) {
    advance_to(offset + k * stride);
    Walker copy = walkers[src];
    copy.weight = stride;
    next.push_back(std::move(copy));
  }
  walkers = std::move(next);
}

namespace {

struct RunState {
  long step = 0;  // completed propagation steps
  std::vector<Walker> walkers;
  std::vector<SeriesRow> rows;
  double energy_shift = 0.0;
  double imaginary_residue = 0.0;
  StepDiagnostics diag;
};

void write_checkpoint(const std::string& path, const RunState& state, const RunParams& params) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  const char magic[8] = {'A', 'F', 'Q', 'M', ' ', 'v', '1', '\0'};
  out.write(magic, 8);
  auto put_u64 = [&](uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  auto put_f64 = [&](double v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  put_u64(params.seed);
  put_u64(static_cast<uint64_t>(state.step));
  put_f64(state.energy_shift);
  put_f64(state.imaginary_residue);
  put_u64(static_cast<uint64_t>(state.diag.killed_by_cosine));
  put_u64(static_cast<uint64_t>(state.diag.killed_by_overlap));
  put_u64(static_cast<uint64_t>(state.diag.capped_force_bias));
  put_u64(params.config_hash.size());
  out.write(params.config_hash.data(), static_cast<std::streamsize>(params.config_hash.size()));
  put_u64(state.rows.size());
  for (const auto& row : state.rows) {
    put_f64(row.tau);
    put_f64(row.e_num);
    put_f64(row.weight);
    put_u64(static_cast<uint64_t>(row.n_walkers));
  }
  put_u64(state.walkers.size());
  const auto& w0 = state.walkers.front();
  put_u64(static_cast<uint64_t>(w0.det.n_orb()));
  put_u64(static_cast<uint64_t>(w0.det.n_alpha()));
  put_u64(static_cast<uint64_t>(w0.det.n_beta()));
  for (const auto& w : state.walkers) {
    put_f64(w.weight);
    put_f64(w.log_scale);
    put_f64(w.overlap_cache.real());
    put_f64(w.overlap_cache.imag());
    for (const Matrix* block : {&w.det.up, &w.det.dn})
      for (Eigen::Index c = 0; c < block->cols(); ++c)
        for (Eigen::Index r = 0; r < block->rows(); ++r) {
          put_f64((*block)(r, c).real());
          put_f64((*block)(r, c).imag());
        }
  }
}

RunState read_checkpoint(const std::string& path, const RunParams& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, 8);
  if (std::memcmp(magic, "AFQM v1\0", 8) != 0)
    throw std::runtime_error("bad checkpoint magic in " + path);
  auto get_u64 = [&]() {
    uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  auto get_f64 = [&]() {
    double v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  RunState state;
  if (get_u64() != params.seed) throw std::runtime_error("checkpoint seed mismatch");
  state.step = static_cast<long>(get_u64());
  state.energy_shift = get_f64();
  state.imaginary_residue = get_f64();
  state.diag.killed_by_cosine = static_cast<long>(get_u64());
  state.diag.killed_by_overlap = static_cast<long>(get_u64());
  state.diag.capped_force_bias = static_cast<long>(get_u64());
  std::string hash(get_u64(), '\0');
  in.read(hash.data(), static_cast<std::streamsize>(hash.size()));
  if (hash != params.config_hash) throw std::runtime_error("checkpoint config hash mismatch");
  const uint64_t n_rows = get_u64();
  for (uint64_t i = 0; i < n_rows; ++i) {
    SeriesRow row;
    row.tau = get_f64();
    row.e_num = get_f64();
    row.weight = get_f64();
    row.n_walkers = static_cast<int>(get_u64());
    state.rows.push_back(row);
  }
  const uint64_t n_walkers = get_u64();
  const int n_orb = static_cast<int>(get_u64());
  const int n_alpha = static_cast<int>(get_u64());
  const int n_beta = static_cast<int>(get_u64());
  for (uint64_t i = 0; i < n_walkers; ++i) {
    Walker w;
    w.weight = get_f64();
    w.log_scale = get_f64();
    const double re = get_f64(), im = get_f64();
    w.overlap_cache = cdouble(re, im);
    w.det.up = Matrix(n_orb, n_alpha);
    w.det.dn = Matrix(n_orb, n_beta);
    for (Matrix* block : {&w.det.up, &w.det.dn})
      for (Eigen::Index c = 0; c < block->cols(); ++c)
        for (Eigen::Index r = 0; r < block->rows(); ++r) {
          const double br = get_f64(), bi = get_f64();
          (*block)(r, c) = cdouble(br, bi);
        }
    state.walkers.push_back(std::move(w));
  }
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  return state;
}

SlaterDeterminant default_initial_det(const TrialWavefunction& trial) {
  if (trial.kind() == TrialWavefunction::Kind::SingleDet) return trial.reference_determinant();
  // Identity determinant at the configuration with the largest trial amplitude.
  Eigen::Index arg = 0;
  trial.amplitudes().cwiseAbs().maxCoeff(&arg);
  const auto& basis = trial.basis();
  const std::size_t nd = basis.dn_masks.size();
  const uint64_t up = basis.up_masks[static_cast<std::size_t>(arg) / nd];
  const uint64_t dn = basis.dn_masks[static_cast<std::size_t>(arg) % nd];
  SlaterDeterminant det = SlaterDeterminant::from_occupation(basis.n_orb, up, dn);
  if (trial.has_offline_rotation()) {
    det.up = (trial.rotation_up() * det.up).eval();
    det.dn = (trial.rotation_dn() * det.dn).eval();
  }
  return det;
}

EnergyTimeSeries run_impl(const Hamiltonian& ham, const CholeskyFactors& chol,
                          const TrialWavefunction& trial, const RunParams& params,
                          RunState state) {
  const Propagator prop = build_propagator(ham, chol, trial, params.dt);
  const long total_steps = params.n_equilibration_steps + params.n_steps;

  std::vector<StepDiagnostics> local_diag(state.walkers.size());
  for (long step = state.step; step < total_steps; ++step) {
    for (auto& d : local_diag) d = StepDiagnostics{};
    parallel_chunks(state.walkers.size(), params.threads, [&](std::size_t lo, std::size_t hi) {
      for (std::size_t i = lo; i < hi; ++i) {
        RngStream rng(RngStream::derive(params.seed, 0x70726f70, step, i));
        propagate_step(state.walkers[i], prop, trial, state.energy_shift, rng, &local_diag[i]);
      }
    });

    if (params.orthonormalize_every > 0 && (step + 1) % params.orthonormalize_every == 0) {
      parallel_chunks(state.walkers.size(), params.threads, [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) {
          auto& w = state.walkers[i];
          if (w.dead()) continue;
          auto [q, lf] = orthonormalize(w.det);
          w.det = std::move(q);
          w.log_scale += lf;
          w.overlap_cache = trial.overlap(w.det);
          if (std::abs(w.overlap_cache) < kOverlapFloor) {
            w.weight = 0.0;
            ++local_diag[i].killed_by_overlap;
          }
        }
      });
    }
    for (const auto& d : local_diag) {
      state.diag.killed_by_cosine += d.killed_by_cosine;
      state.diag.killed_by_overlap += d.killed_by_overlap;
      state.diag.capped_force_bias += d.capped_force_bias;
    }

    if (params.population_control_every > 0 &&
        (step + 1) % params.population_control_every == 0) {
      RngStream rng(RngStream::derive(params.seed, 0x706f7063, step));
      population_control(state.walkers, params.n_walkers, rng);
    }

    const long k = step - params.n_equilibration_steps;
    if (k >= 0 && params.measure_every > 0 && (k + 1) % params.measure_every == 0) {
      const MixedEnergy me = measure_mixed_energy(state.walkers, trial, ham, chol, params.threads);
      SeriesRow row;
      row.tau = (step + 1) * params.dt;
      row.e_num = me.energy * me.total_weight;
      row.weight = me.total_weight;
      row.n_walkers = me.n_alive;
      state.rows.push_back(row);
      state.imaginary_residue = std::max(state.imaginary_residue,
                                         std::abs(me.weighted_num.imag()) / me.total_weight);
    }

    state.step = step + 1;
    if (!params.checkpoint_path.empty() && params.checkpoint_every > 0 &&
        state.step % params.checkpoint_every == 0)
      write_checkpoint(params.checkpoint_path, state, params);
  }
  if (!params.checkpoint_path.empty())
    write_checkpoint(params.checkpoint_path, state, params);

  EnergyTimeSeries out;
  out.rows = std::move(state.rows);
  out.seed = params.seed;
  out.config_hash = params.config_hash;
  out.imaginary_residue = state.imaginary_residue;
  out.diagnostics = state.diag;
  return out;
}

}  // namespace

EnergyTimeSeries run(const Hamiltonian& ham, const CholeskyFactors& chol,
                     const TrialWavefunction& trial, const RunParams& params) {
  RunState state;
  const SlaterDeterminant init =
      params.initial_det ? *params.initial_det : default_initial_det(trial);
  const cdouble ovlp = trial.overlap(init);
  if (std::abs(ovlp) < 1e-12)
    throw std::runtime_error("afqmc: initial determinant is orthogonal to the trial");
  state.energy_shift =
      params.energy_shift ? *params.energy_shift : local_energy(trial, ham, chol, init).real();
  Walker w;
  w.det = init;
  w.weight = 1.0;
  w.overlap_cache = ovlp;
  state.walkers.assign(params.n_walkers, w);
  return run_impl(ham, chol, trial, params, std::move(state));
}

EnergyTimeSeries run_resumed(const Hamiltonian& ham, const CholeskyFactors& chol,
                             const TrialWavefunction& trial, const RunParams& params,
                             const std::string& checkpoint_path) {
  return run_impl(ham, chol, trial, params, read_checkpoint(checkpoint_path, params));
}

BlockReport blocking_analysis(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n < 32) throw std::invalid_argument("blocking_analysis: need at least 32 samples");
  BlockReport report;
  double mean = 0.0;
  for (double s : samples) mean += s;
  mean /= static_cast<double>(n);
  report.mean = mean;

  std::vector<double> level = samples;
  int block_size = 1;
  while (level.size() >= 32) {
    const std::size_t nb = level.size();
    double acc = 0.0;
    for (double v : level) acc += v;
    const double m = acc / static_cast<double>(nb);
    double var = 0.0;
    for (double v : level) var += (v - m) * (v - m);
    var /= static_cast<double>(nb - 1);
    BlockLevel bl;
    bl.block_size = block_size;
    bl.n_blocks = static_cast<int>(nb);
    bl.std_error = std::sqrt(var / static_cast<double>(nb));
    bl.std_error_error = bl.std_error / std::sqrt(2.0 * static_cast<double>(nb - 1));
    report.levels.push_back(bl);

    std::vector<double> half(nb / 2);
    for (std::size_t i = 0; i < nb / 2; ++i) half[i] = 0.5 * (level[2 * i] + level[2 * i + 1]);
    level = std::move(half);
    block_size *= 2;
  }

  // Plateau: first level whose successors never exceed it by more than twice
  // their own uncertainty.
  const int nl = static_cast<int>(report.levels.size());
  int chosen = nl - 1;
  bool converged = false;
  for (int i = 0; i < nl; ++i) {
    bool stable = true;
    for (int j = i + 1; j < nl; ++j)
      if (report.levels[j].std_error >
          report.levels[i].std_error + 2.0 * report.levels[j].std_error_error) {
        stable = false;
        break;
      }
    if (stable) {
      chosen = i;
      converged = true;
      break;
    }
  }
  report.plateau_block_size = report.levels[chosen].block_size;
  report.std_error = report.levels[chosen].std_error;
  report.converged = converged;
  return report;
}

void write_series_csv(const EnergyTimeSeries& series, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write series csv: " + path);
  out << "tau,e_num,weight,nwalkers\n";
  char buf[128];
  for (const auto& row : series.rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%d\n", row.tau, row.e_num, row.weight,
                  row.n_walkers);
    out << buf;
  }
}

}  // namespace qcqmc::afqmc
