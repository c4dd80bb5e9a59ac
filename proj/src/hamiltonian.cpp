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

#include "qcqmc/hamiltonian.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qcqmc {

namespace {

std::size_t tri(std::size_t a, std::size_t b) {  // a >= b
  return a * (a + 1) / 2 + b;
}

[[noreturn]] void parse_fail(int line_no, const std::string& what) {
  throw std::runtime_error("fcidump parse error at line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

TwoBodyIntegrals::TwoBodyIntegrals(int n_orb) : n_orb_(n_orb) {
  const std::size_t np = static_cast<std::size_t>(n_orb) * (n_orb + 1) / 2;
  data_.assign(np * (np + 1) / 2, 0.0);
}

std::size_t TwoBodyIntegrals::index(int p, int q, int r, int s) const {
  const std::size_t pq = tri(std::max(p, q), std::min(p, q));
  const std::size_t rs = tri(std::max(r, s), std::min(r, s));
  return tri(std::max(pq, rs), std::min(pq, rs));
}

Hamiltonian parse_fcidump(std::istream& in) {
  std::string header;
  std::string line;
  int line_no = 0;
  bool header_done = false;
  // The namelist runs from &FCI to &END or a bare "/".
  while (std::getline(in, line)) {
    ++line_no;
    std::string upper(line);
    std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
    header += " " + upper;
    if (upper.find("&END") != std::string::npos || upper.find("$END") != std::string::npos ||
        upper.find('/') != std::string::npos) {
      header_done = true;
      break;
    }
  }
  if (!header_done) parse_fail(line_no, "namelist header not terminated");
  if (header.find("&FCI") == std::string::npos) parse_fail(1, "missing &FCI namelist");

  auto header_int = [&](const std::string& key, bool required, int fallback) -> int {
    std::size_t pos = header.find(key);
    while (pos != std::string::npos) {
      // Reject partial matches such as NELEC inside KNELEC.
      if (pos > 0 && (std::isalnum(header[pos - 1]) || header[pos - 1] == '_')) {
        pos = header.find(key, pos + 1);
        continue;
      }
      std::size_t eq = header.find('=', pos + key.size());
      if (eq == std::string::npos) parse_fail(1, "malformed header field " + key);
      std::size_t start = eq + 1;
      while (start < header.size() && std::isspace(header[start])) ++start;
      std::size_t end = start;
      while (end < header.size() && (std::isdigit(header[end]) || header[end] == '-' || header[end] == '+'))
        ++end;
      if (end == start) parse_fail(1, "malformed header value for " + key);
      return std::stoi(header.substr(start, end - start));
    }
    if (required) parse_fail(1, "missing header field " + key);
    return fallback;
  };

  const int n_orb = header_int("NORB", true, 0);
  const int n_elec = header_int("NELEC", true, 0);
  const int ms2 = header_int("MS2", false, 0);
  if (n_orb <= 0) parse_fail(1, "NORB must be positive");
  if (n_elec < 0 || (n_elec + ms2) % 2 != 0) parse_fail(1, "inconsistent NELEC/MS2");

  Hamiltonian ham;
  ham.n_orb = n_orb;
  ham.n_alpha = (n_elec + ms2) / 2;
  ham.n_beta = (n_elec - ms2) / 2;
  if (ham.n_beta < 0 || ham.n_alpha + ham.n_beta > 2 * n_orb)
    parse_fail(1, "electron count out of range");
  ham.h1 = RealMatrix::Zero(n_orb, n_orb);
  ham.eri = TwoBodyIntegrals(n_orb);

  std::vector<uint8_t> eri_seen(ham.eri.n_unique(), 0);
  std::vector<uint8_t> h1_seen(static_cast<std::size_t>(n_orb) * (n_orb + 1) / 2, 0);
  bool core_seen = false;

  while (std::getline(in, line)) {
    ++line_no;
    // Fortran-style D exponents.
    for (char& c : line)
      if (c == 'D' || c == 'd') c = 'E';
    std::istringstream ss(line);
    double value;
    int p, q, r, s;
    if (!(ss >> value)) {
      std::string rest;
      ss.clear();
      ss >> rest;
      if (rest.empty()) continue;  // blank line
      parse_fail(line_no, "expected numeric value");
    }
    if (!(ss >> p >> q >> r >> s)) parse_fail(line_no, "expected four indices");
    if (p < 0 || q < 0 || r < 0 || s < 0 || p > n_orb || q > n_orb || r > n_orb || s > n_orb)
      parse_fail(line_no, "index out of range");
    const int nz = (p > 0) + (q > 0) + (r > 0) + (s > 0);
    if (p == 0 && q == 0 && r == 0 && s == 0) {
      if (core_seen && std::abs(value - ham.e_core) > 1e-10)
        parse_fail(line_no, "conflicting duplicate core energy");
      ham.e_core = value;
      core_seen = true;
    } else if (nz == 2 && p > 0 && q > 0 && r == 0 && s == 0) {
      const std::size_t idx = tri(std::max(p, q) - 1, std::min(p, q) - 1);
      if (h1_seen[idx] && std::abs(value - ham.h1(p - 1, q - 1)) > 1e-10)
        parse_fail(line_no, "conflicting duplicate one-body entry");
      h1_seen[idx] = 1;
      ham.h1(p - 1, q - 1) = value;
      ham.h1(q - 1, p - 1) = value;
    } else if (nz == 4) {
      const std::size_t idx = ham.eri.index(p - 1, q - 1, r - 1, s - 1);
      if (eri_seen[idx] && std::abs(value - ham.eri(p - 1, q - 1, r - 1, s - 1)) > 1e-10)
        parse_fail(line_no, "conflicting duplicate two-body entry");
      eri_seen[idx] = 1;
      ham.eri.set(p - 1, q - 1, r - 1, s - 1, value);
    } else {
      parse_fail(line_no, "unrecognized index pattern");
    }
  }
  return ham;
}

Hamiltonian parse_fcidump_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open fcidump file: " + path);
  return parse_fcidump(in);
}

void write_fcidump(const Hamiltonian& ham, std::ostream& out) {
  const int n = ham.n_orb;
  out << "&FCI NORB=" << n << ",NELEC=" << ham.n_alpha + ham.n_beta
      << ",MS2=" << ham.n_alpha - ham.n_beta << ",\n ORBSYM=";
  for (int i = 0; i < n; ++i) out << "1,";
  out << "\n ISYM=1,\n&END\n";
  char buf[96];
  auto emit = [&](double v, int p, int q, int r, int s) {
    std::snprintf(buf, sizeof buf, "%24.16E %3d %3d %3d %3d\n", v, p, q, r, s);
    out << buf;
  };
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r <= p; ++r)
        for (int s = 0; s <= r; ++s) {
          if (tri(p, q) < tri(r, s)) continue;
          const double v = ham.eri(p, q, r, s);
          if (v != 0.0) emit(v, p + 1, q + 1, r + 1, s + 1);
        }
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      if (ham.h1(p, q) != 0.0) emit(ham.h1(p, q), p + 1, q + 1, 0, 0);
  emit(ham.e_core, 0, 0, 0, 0);
}

void write_fcidump_file(const Hamiltonian& ham, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fcidump file: " + path);
  write_fcidump(ham, out);
}

CholeskyFactors cholesky_factorize(const Hamiltonian& ham, double tol) {
  const int n = ham.n_orb;
  const int npq = n * n;
  auto pq_pair = [n](int pq) { return std::make_pair(pq / n, pq % n); };

  std::vector<double> diag(npq);
  for (int pq = 0; pq < npq; ++pq) {
    auto [p, q] = pq_pair(pq);
    diag[pq] = ham.eri(p, q, p, q);
  }

  CholeskyFactors out;
  out.tol = tol;
  std::vector<std::vector<double>> rows;  // previous factors as flat (pq) rows
  for (int iter = 0; iter < npq; ++iter) {
    int pivot = 0;
    double dmax = diag[0];
    for (int pq = 1; pq < npq; ++pq)
      if (diag[pq] > dmax) {
        dmax = diag[pq];
        pivot = pq;
      }
    const double dmin = *std::min_element(diag.begin(), diag.end());
    if (dmin < -tol) {
      auto [p, q] = pq_pair(static_cast<int>(std::min_element(diag.begin(), diag.end()) - diag.begin()));
      throw std::runtime_error("integrals not PSD: pivot " + std::to_string(dmin) + " at (" +
                               std::to_string(p) + "," + std::to_string(q) + ")");
    }
    if (dmax <= tol) break;

    auto [pp, pp2] = pq_pair(pivot);
    std::vector<double> col(npq);
    for (int rs = 0; rs < npq; ++rs) {
      auto [r, s] = pq_pair(rs);
      col[rs] = ham.eri(pp, pp2, r, s);
    }
    for (const auto& prev : rows) {
      const double lp = prev[pivot];
      if (lp == 0.0) continue;
      for (int rs = 0; rs < npq; ++rs) col[rs] -= lp * prev[rs];
    }
    const double inv = 1.0 / std::sqrt(dmax);
    for (int rs = 0; rs < npq; ++rs) col[rs] *= inv;
    for (int rs = 0; rs < npq; ++rs) diag[rs] -= col[rs] * col[rs];
    rows.push_back(std::move(col));
  }

  for (const auto& row : rows) {
    RealMatrix L(n, n);
    for (int pq = 0; pq < npq; ++pq) L(pq / n, pq % n) = row[pq];
    L = 0.5 * (L + L.transpose()).eval();  // symmetric up to roundoff already
    out.vectors.push_back(std::move(L));
  }
  return out;
}

double cholesky_reconstruction_error(const Hamiltonian& ham, const CholeskyFactors& chol) {
  const int n = ham.n_orb;
  double worst = 0.0;
  for (int p = 0; p < n; ++p)
    for (int q = 0; q <= p; ++q)
      for (int r = 0; r < n; ++r)
        for (int s = 0; s <= r; ++s) {
          double acc = 0.0;
          for (const auto& L : chol.vectors) acc += L(p, q) * L(r, s);
          worst = std::max(worst, std::abs(acc - ham.eri(p, q, r, s)));
        }
  return worst;
}

Hamiltonian freeze_core(const Hamiltonian& ham, const std::vector<int>& active_orbitals,
                        int n_frozen_core) {
  for (int a : active_orbitals) {
    if (a < 0 || a >= ham.n_orb) throw std::invalid_argument("active orbital out of range");
    if (a < n_frozen_core) throw std::invalid_argument("active orbital overlaps frozen core");
  }
  if (n_frozen_core < 0 || n_frozen_core > ham.n_orb)
    throw std::invalid_argument("invalid frozen core count");
  if (ham.n_alpha < n_frozen_core || ham.n_beta < n_frozen_core)
    throw std::invalid_argument("not enough electrons to fill the frozen core");

  const int n_act = static_cast<int>(active_orbitals.size());
  Hamiltonian out;
  out.n_orb = n_act;
  out.n_alpha = ham.n_alpha - n_frozen_core;
  out.n_beta = ham.n_beta - n_frozen_core;
  out.h1 = RealMatrix::Zero(n_act, n_act);
  out.eri = TwoBodyIntegrals(n_act);

  out.e_core = ham.e_core;
  for (int i = 0; i < n_frozen_core; ++i) {
    out.e_core += 2.0 * ham.h1(i, i);
    for (int j = 0; j < n_frozen_core; ++j)
      out.e_core += 2.0 * ham.eri(i, i, j, j) - ham.eri(i, j, j, i);
  }
  for (int a = 0; a < n_act; ++a)
    for (int b = 0; b < n_act; ++b) {
      const int p = active_orbitals[a], q = active_orbitals[b];
      double v = ham.h1(p, q);
      for (int i = 0; i < n_frozen_core; ++i)
        v += 2.0 * ham.eri(p, q, i, i) - ham.eri(p, i, i, q);
      out.h1(a, b) = v;
    }
  for (int a = 0; a < n_act; ++a)
    for (int b = 0; b <= a; ++b)
      for (int c = 0; c <= a; ++c)
        for (int d = 0; d <= c; ++d)
          out.eri.set(a, b, c, d,
                      ham.eri(active_orbitals[a], active_orbitals[b], active_orbitals[c],
                              active_orbitals[d]));
  return out;
}

}  // namespace qcqmc
