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

#include "qcqmc/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qcqmc {

namespace {

const std::vector<std::string> kKnownKeys = {
    "task", "fcidump", "trial", "record", "trial_spec", "series", "checkpoint", "resume",
    "output_dir", "seed", "threads", "dt", "walkers", "steps", "equilibration_steps",
    "measure_every", "orthonormalize_every", "population_control_every", "checkpoint_every",
    "energy_shift", "cholesky_tol", "n_cliffords", "shots", "depolarizing_p", "ensemble",
    "trial_optimize", "median_of_means", "equilibration_rows", "active", "core", "virtual",
    "n_instances", "atomize", "atom_energy"};

int edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::vector<int>> d(a.size() + 1, std::vector<int>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
  return d[a.size()][b.size()];
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::vector<int> parse_int_list(const std::string& value, const std::string& key) {
  std::vector<int> out;
  std::string token;
  std::istringstream ss(value);
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    try {
      out.push_back(std::stoi(token));
    } catch (...) {
      throw std::runtime_error("config: value for '" + key + "' is not an integer list");
    }
  }
  return out;
}

double parse_double(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::runtime_error("");
    return v;
  } catch (...) {
    throw std::runtime_error("config: value for '" + key + "' is not a number");
  }
}

long long parse_int(const std::string& value, const std::string& key) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::runtime_error("");
    return v;
  } catch (...) {
    throw std::runtime_error("config: value for '" + key + "' is not an integer");
  }
}

bool parse_bool(const std::string& value, const std::string& key) {
  if (value == "1" || value == "true" || value == "yes") return true;
  if (value == "0" || value == "false" || value == "no") return false;
  throw std::runtime_error("config: value for '" + key + "' is not a boolean");
}

bool file_exists(const std::string& path) {
  std::ifstream f(path);
  return f.good();
}

}  // namespace

std::string config_hash_of(const std::map<std::string, std::string>& entries) {
  uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001b3ull;
    }
  };
  for (const auto& [k, v] : entries) {
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RunConfig parse_config_text(const std::string& text) {
  std::map<std::string, std::string> entries;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  bool seed_given = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) line = line.substr(0, hash_pos);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config: expected key = value at line " + std::to_string(line_no));
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), key) == kKnownKeys.end()) {
      std::string best = kKnownKeys.front();
      int best_d = 1 << 20;
      for (const auto& known : kKnownKeys) {
        const int d = edit_distance(key, known);
        if (d < best_d) {
          best_d = d;
          best = known;
        }
      }
      throw std::runtime_error("config: unknown key '" + key + "' (did you mean '" + best + "'?)");
    }
    entries[key] = value;
  }

  RunConfig cfg;
  for (const auto& [key, value] : entries) {
    if (key == "task") cfg.task = value;
    else if (key == "fcidump") cfg.fcidump = value;
    else if (key == "trial") cfg.trial = value;
    else if (key == "record") cfg.record = value;
    else if (key == "trial_spec") cfg.trial_spec = value;
    else if (key == "series") cfg.series = value;
    else if (key == "checkpoint") cfg.checkpoint = value;
    else if (key == "resume") cfg.resume = value;
    else if (key == "output_dir") cfg.output_dir = value;
    else if (key == "seed") {
      cfg.seed = static_cast<uint64_t>(parse_int(value, key));
      seed_given = true;
    } else if (key == "threads") cfg.threads = static_cast<int>(parse_int(value, key));
    else if (key == "dt") cfg.dt = parse_double(value, key);
    else if (key == "walkers") cfg.walkers = static_cast<int>(parse_int(value, key));
    else if (key == "steps") cfg.steps = static_cast<int>(parse_int(value, key));
    else if (key == "equilibration_steps")
      cfg.equilibration_steps = static_cast<int>(parse_int(value, key));
    else if (key == "measure_every") cfg.measure_every = static_cast<int>(parse_int(value, key));
    else if (key == "orthonormalize_every")
      cfg.orthonormalize_every = static_cast<int>(parse_int(value, key));
    else if (key == "population_control_every")
      cfg.population_control_every = static_cast<int>(parse_int(value, key));
    else if (key == "checkpoint_every")
      cfg.checkpoint_every = static_cast<int>(parse_int(value, key));
    else if (key == "energy_shift") cfg.energy_shift = parse_double(value, key);
    else if (key == "cholesky_tol") cfg.cholesky_tol = parse_double(value, key);
    else if (key == "n_cliffords") cfg.n_cliffords = static_cast<int>(parse_int(value, key));
    else if (key == "shots") cfg.shots = static_cast<int>(parse_int(value, key));
    else if (key == "depolarizing_p") cfg.depolarizing_p = parse_double(value, key);
    else if (key == "ensemble") cfg.ensemble = value;
    else if (key == "trial_optimize") cfg.trial_optimize = parse_bool(value, key);
    else if (key == "median_of_means") cfg.median_of_means = parse_bool(value, key);
    else if (key == "equilibration_rows")
      cfg.equilibration_rows = static_cast<int>(parse_int(value, key));
    else if (key == "active") cfg.active_orbitals = parse_int_list(value, key);
    else if (key == "core") cfg.core_orbitals = parse_int_list(value, key);
    else if (key == "virtual") cfg.virtual_orbitals = parse_int_list(value, key);
    else if (key == "n_instances") cfg.n_instances = static_cast<int>(parse_int(value, key));
    else if (key == "atomize") cfg.atomize = static_cast<int>(parse_int(value, key));
    else if (key == "atom_energy") cfg.atom_energy = parse_double(value, key);
  }
  if (!seed_given) throw std::runtime_error("config: 'seed' is mandatory (no wall-clock default)");
  cfg.config_hash = config_hash_of(entries);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void RunConfig::validate() const {
  if (task.empty()) throw std::runtime_error("config: 'task' is required");
  const std::vector<std::string> tasks = {"fci",     "afqmc",       "shadows-acquire",
                                          "shadows-estimate", "qcafqmc", "embed-check",
                                          "blocking"};
  if (std::find(tasks.begin(), tasks.end(), task) == tasks.end())
    throw std::runtime_error("config: unknown task '" + task + "'");
  auto require_file = [&](const std::string& path, const std::string& what) {
    if (path.empty()) throw std::runtime_error("config: '" + what + "' is required for " + task);
    if (!file_exists(path))
      throw std::runtime_error("config: " + what + " file does not exist: " + path);
  };
  if (task != "blocking") require_file(fcidump, "fcidump");
  if (task == "shadows-acquire") require_file(trial_spec, "trial_spec");
  if (task == "shadows-estimate") require_file(record, "record");
  if (task == "blocking") require_file(series, "series");
  if (!resume.empty() && !file_exists(resume))
    throw std::runtime_error("config: resume checkpoint does not exist: " + resume);
  if (!trial.empty() && trial != "fci") {
    const auto colon = trial.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("config: trial must be fci or kind:path");
    const std::string kind = trial.substr(0, colon);
    if (kind != "slater" && kind != "multidet" && kind != "circuit" && kind != "shadow")
      throw std::runtime_error("config: unknown trial kind '" + kind + "'");
    require_file(trial.substr(colon + 1), "trial");
  }
}

}  // namespace qcqmc
