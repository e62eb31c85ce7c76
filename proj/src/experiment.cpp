#include "smd/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "smd/closedform.hpp"
#include "smd/diagnostics.hpp"
#include "smd/errors.hpp"
#include "smd/kinetics.hpp"
#include "smd/profiles.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace smd {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double rel_gap(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw Error("cannot open output file: " + p.string());
  return os;
}

json fit_to_json(const RateFit& fit) {
  return json{{"exponent", fit.exponent},
              {"amplitude", fit.amplitude},
              {"r_squared", fit.r_squared},
              {"with_log_correction", fit.with_log_correction},
              {"points_used", fit.points_used}};
}

json lemma_check_to_json(const LemmaCheck& c) {
  json j{{"name", c.name},
         {"values", c.values},
         {"fitted", c.fitted},
         {"below_floor", c.below_floor},
         {"expected_exponent", c.expected_exponent},
         {"window", {c.window_lo, c.window_hi}},
         {"pass", c.pass}};
  if (c.fitted) j["fit"] = fit_to_json(c.fit);
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// GeometricGrid / Tolerances

void GeometricGrid::validate() const {
  if (j_min < 2) throw ValidationError("j_grid.j_min must be at least 2");
  if (j_max < j_min) throw ValidationError("j_grid.j_max must be >= j_min");
  if (!std::isfinite(factor) || factor <= 1.0) {
    throw ValidationError("j_grid.factor must exceed 1");
  }
}

std::vector<std::int64_t> GeometricGrid::values() const {
  validate();
  std::vector<std::int64_t> out;
  double v = static_cast<double>(j_min);
  std::int64_t prev = 0;
  while (true) {
    const std::int64_t ji = std::llround(v);
    if (ji > j_max) break;
    if (ji > prev) {
      out.push_back(ji);
      prev = ji;
    }
    v *= factor;
  }
  return out;
}

void Tolerances::validate() const {
  auto in_solver_range = [](double t) {
    return std::isfinite(t) && t > 1e-14 && t < 1e-3;
  };
  if (!in_solver_range(trajectory_rel_tol)) {
    throw ValidationError("trajectory_rel_tol must lie in (1e-14, 1e-3)");
  }
  if (!in_solver_range(truncated_rel_tol)) {
    throw ValidationError("truncated_rel_tol must lie in (1e-14, 1e-3)");
  }
  quad_spec().validate();
}

QuadratureSpec Tolerances::quad_spec() const {
  QuadratureSpec spec;
  spec.rel_tol = quad_rel_tol;
  spec.abs_tol = quad_abs_tol;
  spec.max_subdivisions = max_subdivisions;
  return spec;
}

// ---------------------------------------------------------------------------
// Enum names

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::monomer_only: return "monomer-only";
    case InitialKind::power_law: return "power-law";
    case InitialKind::explicit_list: return "explicit";
  }
  throw ValidationError("unknown initial kind");
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::profile_table: return "profile-table";
    case ExperimentKind::converge_xi: return "converge-xi";
    case ExperimentKind::diagnostics: return "diagnostics";
    case ExperimentKind::oracle_check: return "oracle-check";
  }
  throw ValidationError("unknown experiment kind");
}

InitialKind initial_kind_from_string(const std::string& s) {
  if (s == "monomer-only") return InitialKind::monomer_only;
  if (s == "power-law") return InitialKind::power_law;
  if (s == "explicit") return InitialKind::explicit_list;
  throw ValidationError("unknown initial kind: " + s);
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  if (s == "profile-table") return ExperimentKind::profile_table;
  if (s == "converge-xi") return ExperimentKind::converge_xi;
  if (s == "diagnostics") return ExperimentKind::diagnostics;
  if (s == "oracle-check") return ExperimentKind::oracle_check;
  throw ValidationError("unknown experiment kind: " + s);
}

// ---------------------------------------------------------------------------
// ExperimentConfig

void ExperimentConfig::validate() const {
  params();  // ModelParams constructor validates n and alpha
  if (!std::isfinite(c1_0) || c1_0 < 0.0) {
    throw ValidationError("initial.c1_0 must be nonnegative");
  }
  if (initial_kind == InitialKind::power_law) {
    if (!std::isfinite(rho) || rho <= 0.0) {
      throw ValidationError("initial.rho must be positive");
    }
    if (!std::isfinite(mu) || mu <= 0.0) {
      throw ValidationError("initial.mu must be positive");
    }
    if (K_cut < n) throw ValidationError("initial.K_cut must be >= n");
  }
  j_grid.validate();
  tolerances.validate();
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (!std::isfinite(tau_grid[i]) || tau_grid[i] <= 0.0) {
      throw ValidationError("experiment.tau_grid must be positive and finite");
    }
    if (i > 0 && tau_grid[i] <= tau_grid[i - 1]) {
      throw ValidationError("experiment.tau_grid must be strictly increasing");
    }
  }
  for (double xi : xi_values) {
    if (!std::isfinite(xi)) throw ValidationError("xi_values must be finite");
  }
  for (int pn : profile_n_values) {
    if (pn < 2) throw ValidationError("profile n_values must be >= 2");
  }
  if (!std::isfinite(xi_min) || !std::isfinite(xi_max) || xi_max < xi_min) {
    throw ValidationError("profile xi range is invalid");
  }
  if (!std::isfinite(xi_step) || xi_step <= 0.0) {
    throw ValidationError("profile xi_step must be positive");
  }
}

ModelParams ExperimentConfig::params() const { return ModelParams(n, alpha); }

InitialData ExperimentConfig::initial() const {
  const ModelParams p = params();
  switch (initial_kind) {
    case InitialKind::monomer_only:
      return InitialData(p, MonomerOnlyTail{}, c1_0);
    case InitialKind::power_law:
      return make_power_law(rho, mu, K_cut, p, c1_0);
    case InitialKind::explicit_list:
      return InitialData(p, ExplicitTail{entries}, c1_0);
  }
  throw ValidationError("unknown initial kind");
}

json ExperimentConfig::to_json() const {
  json entries_json = json::array();
  for (const auto& [j, v] : entries) {
    entries_json.push_back(json::array({j, v}));
  }
  return json{
      {"model", {{"n", n}, {"alpha", alpha}}},
      {"initial",
       {{"kind", smd::to_string(initial_kind)},
        {"c1_0", c1_0},
        {"rho", rho},
        {"mu", mu},
        {"K_cut", K_cut},
        {"entries", entries_json}}},
      {"experiment",
       {{"kind", smd::to_string(kind)},
        {"xi_values", xi_values},
        {"j_grid",
         {{"j_min", j_grid.j_min},
          {"j_max", j_grid.j_max},
          {"factor", j_grid.factor}}},
        {"tau_grid", tau_grid},
        {"tolerances",
         {{"trajectory_rel_tol", tolerances.trajectory_rel_tol},
          {"truncated_rel_tol", tolerances.truncated_rel_tol},
          {"quad_rel_tol", tolerances.quad_rel_tol},
          {"quad_abs_tol", tolerances.quad_abs_tol},
          {"max_subdivisions", tolerances.max_subdivisions}}},
        {"profile",
         {{"n_values", profile_n_values},
          {"xi_min", xi_min},
          {"xi_max", xi_max},
          {"xi_step", xi_step}}}}}};
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  if (!j.is_object()) throw ValidationError("config must be a JSON object");
  ExperimentConfig cfg;
  try {
    const json& model = j.at("model");
    cfg.n = model.at("n").get<int>();
    cfg.alpha = model.at("alpha").get<double>();

    const json initial = j.value("initial", json::object());
    cfg.initial_kind =
        initial_kind_from_string(initial.value("kind", "monomer-only"));
    cfg.c1_0 = initial.value("c1_0", 0.0);
    cfg.rho = initial.value("rho", 1.0);
    cfg.mu = initial.value("mu", 2.0);
    cfg.K_cut = initial.value("K_cut", std::int64_t{100});
    cfg.entries.clear();
    for (const auto& e : initial.value("entries", json::array())) {
      if (!e.is_array() || e.size() != 2) {
        throw ValidationError("initial.entries must be [j, value] pairs");
      }
      cfg.entries.emplace_back(e.at(0).get<std::int64_t>(),
                               e.at(1).get<double>());
    }

    const json& exp = j.at("experiment");
    cfg.kind = experiment_kind_from_string(exp.at("kind").get<std::string>());
    cfg.xi_values = exp.value("xi_values", std::vector<double>{});
    const json jg = exp.value("j_grid", json::object());
    cfg.j_grid.j_min = jg.value("j_min", std::int64_t{128});
    cfg.j_grid.j_max = jg.value("j_max", std::int64_t{16384});
    cfg.j_grid.factor = jg.value("factor", 2.0);
    cfg.tau_grid = exp.value("tau_grid", std::vector<double>{});
    const json tol = exp.value("tolerances", json::object());
    cfg.tolerances.trajectory_rel_tol = tol.value("trajectory_rel_tol", 1e-10);
    cfg.tolerances.truncated_rel_tol = tol.value("truncated_rel_tol", 1e-8);
    cfg.tolerances.quad_rel_tol = tol.value("quad_rel_tol", 1e-10);
    cfg.tolerances.quad_abs_tol = tol.value("quad_abs_tol", 1e-15);
    cfg.tolerances.max_subdivisions = tol.value("max_subdivisions", 400);
    const json prof = exp.value("profile", json::object());
    cfg.profile_n_values = prof.value("n_values", std::vector<int>{2, 3, 6, 12});
    cfg.xi_min = prof.value("xi_min", -6.0);
    cfg.xi_max = prof.value("xi_max", 4.0);
    cfg.xi_step = prof.value("xi_step", 0.05);
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::uint64_t ExperimentConfig::config_hash() const {
  const std::string dump = to_json().dump();
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string ExperimentConfig::config_hash_hex() const {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(config_hash()));
  return buf;
}

// ---------------------------------------------------------------------------
// profile-table

namespace {

constexpr const char* kProfilePlotScript =
    R"PY(#!/usr/bin/env python3
"""Plot the front profiles written to profile.csv (run from that directory)."""
import csv
from collections import defaultdict

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

curves = defaultdict(list)
with open("profile.csv") as fh:
    for row in csv.DictReader(fh):
        curves[int(row["n"])].append((float(row["xi"]), float(row["phi2"])))

fig, ax = plt.subplots(figsize=(7.0, 4.5))
for n in sorted(curves):
    pts = sorted(curves[n])
    ax.plot([p[0] for p in pts], [p[1] for p in pts], label=f"n = {n}")
ax.set_xlabel("xi")
ax.set_ylabel("phi2(xi)")
ax.set_title("Front similarity profiles")
ax.legend()
ax.grid(True, alpha=0.3)
fig.tight_layout()
fig.savefig("profile.png", dpi=150)
print("wrote profile.png")
)PY";

}  // namespace

int run_profile_table(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const QuadratureSpec spec = cfg.tolerances.quad_spec();
  const std::string hash = cfg.config_hash_hex();
  fs::create_directories(out_dir);

  auto csv = open_out(fs::path(out_dir) / "profile.csv");
  csv << "xi,n,phi2,config_hash\n";

  bool ok = true;
  const long steps = std::lround((cfg.xi_max - cfg.xi_min) / cfg.xi_step);
  for (int n : cfg.profile_n_values) {
    // Consistency gates on each curve: the closed gamma value at xi = 0 and
    // the Gaussian collapse of the tail at xi = 4.
    const double at0 = phi2(n, 0.0, spec);
    const double exact0 = std::pow(2.0, 1.0 / (2.0 * n)) *
                          std::tgamma(1.0 / (2.0 * n)) / (2.0 * n);
    ok = ok && rel_gap(at0, exact0) <= 1e-8;
    const double at4 = phi2(n, 4.0, spec);
    ok = ok && at4 < at0 * std::exp(-8.0) && at4 < 1e-3 * at0;

    for (long k = 0; k <= steps; ++k) {
      const double xi =
          (k == steps) ? cfg.xi_max : cfg.xi_min + static_cast<double>(k) * cfg.xi_step;
      csv << fmt(xi) << ',' << n << ',' << fmt(phi2(n, xi, spec)) << ','
          << hash << '\n';
    }
  }

  open_out(fs::path(out_dir) / "plot_profile.py") << kProfilePlotScript;
  return ok ? 0 : 1;
}

// ---------------------------------------------------------------------------
// converge-xi

namespace {

struct RatePlan {
  bool applicable = true;
  bool with_log = false;
  double expected = 0.0;
  double lo = 0.0;
  double hi = 0.0;
};

// Expected decay of |F - phi2| in tau, by initial-data class.  The window
// widths mirror how sharply each regime can be measured on a few octaves.
RatePlan rate_plan(const ExperimentConfig& cfg, double nu0_value) {
  const double nd = cfg.n;
  RatePlan plan;
  if (cfg.initial_kind == InitialKind::power_law) {
    if (cfg.mu > 1.0) {
      plan.with_log = false;
      plan.expected = -1.0 / (2.0 * nd);
    } else if (cfg.mu == 1.0) {
      plan.with_log = true;
      plan.expected = -1.0 / (2.0 * nd);
    } else if (cfg.mu > 1.0 - 1.0 / nd) {
      plan.with_log = false;
      plan.expected = -1.0 / (2.0 * nd) + (1.0 - cfg.mu) / 2.0;
    } else {
      // Initial mass so heavy that the front normalization cannot absorb
      // it; no convergence rate is claimed.
      plan.applicable = false;
      return plan;
    }
    plan.lo = plan.expected - 0.1;
    plan.hi = plan.expected + 0.1;
    return plan;
  }
  if (nu0_value == 0.0) {
    // No initial clusters: the log-corrected square-root decay dominates.
    plan.with_log = true;
    plan.expected = -0.5;
    plan.lo = -0.65;
    plan.hi = -0.35;
    return plan;
  }
  // Explicit data with a finite cluster count behaves like an integrable
  // power-law tail.
  plan.with_log = false;
  plan.expected = -1.0 / (2.0 * nd);
  plan.lo = plan.expected - 0.1;
  plan.hi = plan.expected + 0.1;
  return plan;
}

}  // namespace

int run_converge_xi(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  if (cfg.xi_values.empty()) {
    throw ValidationError("converge-xi needs experiment.xi_values");
  }
  const ModelParams p = cfg.params();
  const InitialData data = cfg.initial();
  const QuadratureSpec spec = cfg.tolerances.quad_spec();
  const std::vector<std::int64_t> js = cfg.j_grid.values();
  if (js.size() < 3) {
    throw ValidationError("converge-xi needs at least 3 cluster sizes");
  }
  const std::string hash = cfg.config_hash_hex();
  const double mu_column =
      cfg.initial_kind == InitialKind::power_law ? cfg.mu : 0.0;

  double tau_need = 0.0;
  for (double xi : cfg.xi_values) {
    for (std::int64_t j : js) {
      tau_need = std::max(tau_need, ScalingPoint(p, j, xi).tau);
    }
  }
  const MonomerTrajectory traj = solve_monomer_bulk(
      p, data, tau_need * (1.0 + 1e-9) + 1.0, cfg.tolerances.trajectory_rel_tol);

  fs::create_directories(out_dir);
  auto csv = open_out(fs::path(out_dir) / "converge.csv");
  csv << "n,alpha,mu,xi,j,tau,c_tilde,F,phi2,abs_err,config_hash\n";

  const RatePlan plan = rate_plan(cfg, nu0(data));
  json per_xi = json::array();
  bool all_pass = true;

  for (double xi : cfg.xi_values) {
    const double profile = phi2(p.n, xi, spec);
    std::vector<std::pair<double, double>> pts;
    pts.reserve(js.size());
    for (std::int64_t j : js) {
      const ScalingPoint sp(p, j, xi);
      const double ct = c_tilde(j, sp.tau, data, traj, spec);
      const double F = scaled_observable(p, j, sp.tau, ct);
      const double err = std::abs(F - profile);
      pts.emplace_back(sp.tau, err);
      csv << p.n << ',' << fmt(p.alpha) << ',' << fmt(mu_column) << ','
          << fmt(xi) << ',' << j << ',' << fmt(sp.tau) << ',' << fmt(ct)
          << ',' << fmt(F) << ',' << fmt(profile) << ',' << fmt(err) << ','
          << hash << '\n';
    }

    json entry{{"xi", xi}};
    if (!plan.applicable) {
      entry["verdict"] = "not-applicable";
    } else {
      const auto kept = drop_smallest_decade(pts);
      const RateFit fit = fit_rate(kept, plan.with_log);
      const bool pass = fit.r_squared >= 0.9 && fit.exponent >= plan.lo &&
                        fit.exponent <= plan.hi;
      entry["fit"] = fit_to_json(fit);
      entry["expected_exponent"] = plan.expected;
      entry["window"] = {plan.lo, plan.hi};
      entry["verdict"] = pass ? "pass" : "fail";
      all_pass = all_pass && pass;
    }
    per_xi.push_back(std::move(entry));
  }

  json report{{"config_hash", hash},
              {"kind", "converge-xi"},
              {"mu", mu_column},
              {"initial_kind", to_string(cfg.initial_kind)},
              {"rate_applicable", plan.applicable},
              {"per_xi", std::move(per_xi)},
              {"all_pass", all_pass}};
  open_out(fs::path(out_dir) / "rates.json") << report.dump(2) << '\n';
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// diagnostics

int run_diagnostics(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  if (cfg.xi_values.empty()) {
    throw ValidationError("diagnostics needs experiment.xi_values");
  }
  if (cfg.tau_grid.size() < 3) {
    throw ValidationError("diagnostics needs an experiment.tau_grid");
  }
  const ModelParams p = cfg.params();
  const InitialData data = cfg.initial();
  const QuadratureSpec spec = cfg.tolerances.quad_spec();

  const MonomerTrajectory traj =
      solve_monomer_bulk(p, data, cfg.tau_grid.back(),
                         cfg.tolerances.trajectory_rel_tol);

  bool all_pass = true;
  json rate_checks = json::array();
  for (double xi : cfg.xi_values) {
    const LemmaRateReport rep =
        check_lemma_rates(p.n, xi, cfg.tau_grid, traj, spec);
    json checks = json::array();
    for (const auto& c : rep.checks) checks.push_back(lemma_check_to_json(c));
    rate_checks.push_back(json{{"xi", xi},
                               {"checks", std::move(checks)},
                               {"all_pass", rep.all_pass}});
    all_pass = all_pass && rep.all_pass;
  }

  // The decomposed front value must reassemble to the direct evaluation.
  double identity_max_rel = 0.0;
  for (double tau_raw : cfg.tau_grid) {
    const double tau = std::min(tau_raw, traj.tau_max());
    for (double xi : cfg.xi_values) {
      const double x = tau + xi * std::sqrt(tau);
      const double direct = phi_continuous(x, tau, p, traj, spec);
      const double pref = prefactor_P(p.n, xi, tau);
      double sum = 0.0;
      for (int k = 1; k <= 4; ++k) {
        sum += J_term(k, p.n, xi, tau, traj, spec);
      }
      identity_max_rel = std::max(identity_max_rel, rel_gap(direct, pref * sum));
    }
  }
  const bool identity_ok = identity_max_rel <= 1e-6;
  all_pass = all_pass && identity_ok;

  json scans = json::array();
  for (double xi : cfg.xi_values) {
    const FrontConstantScan scan =
        front_constant_scan(xi, cfg.tau_grid, traj, spec);
    scans.push_back(json{{"xi", scan.xi},
                         {"tau_grid", scan.tau_grid},
                         {"scaled_gap", scan.scaled_gap},
                         {"target", scan.target},
                         {"monotone_toward_target", scan.monotone_toward_target},
                         {"final_rel_deviation", scan.final_rel_deviation}});
  }

  json report{{"config_hash", cfg.config_hash_hex()},
              {"kind", "diagnostics"},
              {"n", p.n},
              {"alpha", p.alpha},
              {"tau_grid", cfg.tau_grid},
              {"rate_checks", std::move(rate_checks)},
              {"decomposition_identity",
               {{"max_rel_error", identity_max_rel},
                {"tolerance", 1e-6},
                {"pass", identity_ok}}},
              {"front_constant_scans", std::move(scans)},
              {"all_pass", all_pass}};
  fs::create_directories(out_dir);
  open_out(fs::path(out_dir) / "diagnostics.json") << report.dump(2) << '\n';
  return all_pass ? 0 : 1;
}

// ---------------------------------------------------------------------------
// oracle-check

int run_oracle_check(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const ModelParams p = cfg.params();
  const InitialData data = cfg.initial();
  const QuadratureSpec spec = cfg.tolerances.quad_spec();
  const std::int64_t J = cfg.j_grid.j_max;
  if (J > 200) {
    throw ApplicabilityError(
        "oracle check runs the brute-force reference solve; J must be <= 200");
  }
  if (J < p.n + 5) throw ValidationError("oracle check needs J >= n + 5");
  if (cfg.tau_grid.empty()) {
    throw ValidationError("oracle check needs experiment.tau_grid");
  }
  if (cfg.tau_grid.back() > 100.0) {
    throw ApplicabilityError(
        "oracle check is restricted to tau <= 100 where the reference solve "
        "is trustworthy");
  }

  const MonomerTrajectory traj = solve_monomer_bulk(
      p, data, cfg.tau_grid.back() * (1.0 + 1e-6) + 1e-6,
      cfg.tolerances.trajectory_rel_tol);

  std::vector<double> t_out;
  t_out.reserve(cfg.tau_grid.size());
  for (double tau : cfg.tau_grid) t_out.push_back(traj.t_at_tau(tau));

  const TruncatedSolution trunc =
      solve_full_truncated(p, data, J, t_out.back(),
                           cfg.tolerances.truncated_rel_tol, t_out);

  // Evaluate the other two methods at the truncated solve's own rescaled
  // times, so the comparison carries no clock-mismatch error.
  const std::vector<double> tau_eval = trunc.tau_values;
  const TriangularSolution tri =
      solve_triangular_tau(p, data, traj, J, tau_eval,
                           cfg.tolerances.trajectory_rel_tol);

  double max_three_way = 0.0;
  double max_monomer = 0.0;
  double max_mass_residual = 0.0;
  for (std::size_t i = 0; i < tau_eval.size(); ++i) {
    const double tau = tau_eval[i];
    std::vector<double> a(static_cast<std::size_t>(J - p.n + 1));
    std::vector<double> b(a.size()), c(a.size());
    double row_max = 0.0;
    for (std::int64_t j = p.n; j <= J; ++j) {
      const std::size_t k = static_cast<std::size_t>(j - p.n);
      a[k] = trunc.c(i, j);
      b[k] = tri.at(i, j);
      c[k] = c_tilde(j, tau, data, traj, spec);
      row_max = std::max({row_max, std::abs(a[k]), std::abs(b[k]),
                          std::abs(c[k])});
    }
    // Values this far below the row scale are indistinguishable from zero
    // at working precision; comparing them relatively is meaningless.
    const double floor = 1e-50 * row_max;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double hi = std::max({a[k], b[k], c[k]});
      const double lo = std::min({a[k], b[k], c[k]});
      const double scale = std::max({std::abs(a[k]), std::abs(b[k]),
                                     std::abs(c[k])});
      if (scale <= floor) continue;
      max_three_way = std::max(max_three_way, (hi - lo) / scale);
    }
    max_monomer =
        std::max(max_monomer, rel_gap(trunc.c1(i), traj.x_at_tau(tau)));
    const double res = std::abs(trunc.mass_residual(i));
    max_mass_residual = std::max(
        max_mass_residual, res / std::max(1.0, std::abs(trunc.mass(i))));
  }

  bool t0_exact = true;
  for (std::int64_t j = p.n; j <= J; ++j) {
    t0_exact = t0_exact && (c_tilde(j, 0.0, data, traj, spec) == data.c0(j));
  }

  const bool pass = max_three_way <= 1e-6 && max_monomer <= 1e-6 &&
                    max_mass_residual <= 1e-7 && t0_exact;

  json report{{"config_hash", cfg.config_hash_hex()},
              {"kind", "oracle-check"},
              {"J", J},
              {"tau_points", tau_eval},
              {"max_three_way_rel", max_three_way},
              {"max_monomer_rel", max_monomer},
              {"max_mass_residual_rel", max_mass_residual},
              {"tau_zero_roundtrip_exact", t0_exact},
              {"tolerances",
               {{"three_way", 1e-6}, {"monomer", 1e-6}, {"mass", 1e-7}}},
              {"pass", pass}};
  fs::create_directories(out_dir);
  open_out(fs::path(out_dir) / "oracle.json") << report.dump(2) << '\n';
  return pass ? 0 : 1;
}

// ---------------------------------------------------------------------------

int run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  switch (cfg.kind) {
    case ExperimentKind::profile_table: return run_profile_table(cfg, out_dir);
    case ExperimentKind::converge_xi: return run_converge_xi(cfg, out_dir);
    case ExperimentKind::diagnostics: return run_diagnostics(cfg, out_dir);
    case ExperimentKind::oracle_check: return run_oracle_check(cfg, out_dir);
  }
  throw ValidationError("unknown experiment kind");
}

}  // namespace smd
