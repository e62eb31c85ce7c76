#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "smd/model.hpp"
#include "smd/quadrature.hpp"

namespace smd {

// Geometric ladder of cluster sizes j_min, j_min*factor, ... capped at
// j_max (values rounded to the nearest integer, duplicates removed).
struct GeometricGrid {
  std::int64_t j_min = 128;
  std::int64_t j_max = 16384;
  double factor = 2.0;

  void validate() const;
  std::vector<std::int64_t> values() const;
};

// Numerical tolerances threaded through an experiment run.
struct Tolerances {
  double trajectory_rel_tol = 1e-10;  // monomer--bulk solve
  double truncated_rel_tol = 1e-8;    // brute-force truncated solve
  double quad_rel_tol = 1e-10;
  double quad_abs_tol = 1e-15;
  int max_subdivisions = 400;

  void validate() const;
  QuadratureSpec quad_spec() const;
};

enum class InitialKind { monomer_only, power_law, explicit_list };
enum class ExperimentKind { profile_table, converge_xi, diagnostics, oracle_check };

std::string to_string(InitialKind k);
std::string to_string(ExperimentKind k);
InitialKind initial_kind_from_string(const std::string& s);
ExperimentKind experiment_kind_from_string(const std::string& s);

// Complete description of one experiment run.  Serializes to canonical
// JSON (sorted keys, every field present); the hash of that serialization
// is stamped on every output row so results are traceable to their inputs.
struct ExperimentConfig {
  // model
  int n = 2;
  double alpha = 1.0;

  // initial data
  InitialKind initial_kind = InitialKind::monomer_only;
  double c1_0 = 0.0;
  double rho = 1.0;          // power-law amplitude
  double mu = 2.0;           // power-law decay exponent
  std::int64_t K_cut = 100;  // power-law cutoff
  std::vector<std::pair<std::int64_t, double>> entries;  // explicit data

  // experiment
  ExperimentKind kind = ExperimentKind::profile_table;
  std::vector<double> xi_values;
  GeometricGrid j_grid;
  std::vector<double> tau_grid;
  Tolerances tolerances;

  // profile-table controls
  std::vector<int> profile_n_values = {2, 3, 6, 12};
  double xi_min = -6.0;
  double xi_max = 4.0;
  double xi_step = 0.05;

  void validate() const;
  ModelParams params() const;
  InitialData initial() const;

  nlohmann::json to_json() const;
  static ExperimentConfig from_json(const nlohmann::json& j);

  // FNV-1a (64-bit) over the canonical serialization.
  std::uint64_t config_hash() const;
  std::string config_hash_hex() const;  // 16 lowercase hex digits
};

// Runners write their tables and reports under out_dir and return 0 when
// every built-in quantitative check passes, 1 otherwise.  Errors (bad
// config, solver failure) are thrown, not encoded in the return value.
int run_profile_table(const ExperimentConfig& cfg, const std::string& out_dir);
int run_converge_xi(const ExperimentConfig& cfg, const std::string& out_dir);
int run_diagnostics(const ExperimentConfig& cfg, const std::string& out_dir);
int run_oracle_check(const ExperimentConfig& cfg, const std::string& out_dir);

// Dispatches on cfg.kind.
int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

}  // namespace smd
