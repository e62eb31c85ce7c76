#include "smd/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "smd/closedform.hpp"
#include "smd/errors.hpp"
#include "smd/profiles.hpp"

namespace smd {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_n_at_least_two(int n) {
  if (n < 2) {
    throw ValidationError("cluster nucleus size n must be at least 2, got " +
                          std::to_string(n));
  }
}

void check_tau_positive(double tau) {
  if (!std::isfinite(tau) || tau <= 0.0) {
    throw ValidationError("tau must be positive and finite");
  }
}

// Shared integrand machinery for the four front contributions.  All four
// integrate over w in [0, tau^{1/(2n)}] against the base weight
// exp(-xi w^n - w^{2n}/2); k selects the extra factor.
struct FrontIntegrand {
  int k;
  int n;
  double xi;
  double tau;
  double sqrt_tau;
  const MonomerTrajectory* traj;
  FnSource fn_source;
  double asymp_floor;
  const ModelParams* params;

  double operator()(double w) const {
    const double x = std::pow(w, n);  // x = w^n
    const double base = std::exp(-xi * x - 0.5 * x * x);
    double factor = 1.0;
    if (k == 2 || k == 4) {
      factor *= fn_at(x * sqrt_tau);
    }
    if (k == 3 || k == 4) {
      factor *= g_eval(x);
    }
    return base * factor;
  }

  double fn_at(double arg) const {
    if (fn_source == FnSource::asymptotic) {
      // The two-term formula only has meaning for large arguments and its
      // log(t)/t shape diverges as t -> 0 (it would make the w-integral
      // infinite), so the argument is floored.
      return fn_correction(FnSource::asymptotic, *params,
                           std::max(arg, asymp_floor));
    }
    // Interpolation rounding can push the argument a hair past the stored
    // horizon at the upper endpoint; clamp within one part in 1e12.
    const double top = traj->tau_max();
    if (arg > top && arg < top * (1.0 + 1e-12)) {
      return fn_correction(FnSource::trajectory, *params, top, traj);
    }
    return fn_correction(FnSource::trajectory, *params, arg, traj);
  }

  // g evaluated without the domain throw: at the upper integration
  // endpoint w^n can round to sqrt(tau) or a hair beyond, where the
  // correction's limit is -1 (the interior power factor collapses to 0).
  double g_eval(double x) const {
    const double u = x / sqrt_tau;
    if (u >= 1.0) return -1.0;
    const double arg = (tau + xi * sqrt_tau - n) * std::log1p(-u) +
                       x * sqrt_tau + xi * x + 0.5 * x * x;
    return std::expm1(arg);
  }
};

}  // namespace

double prefactor_P(int n, double xi, double tau) {
  check_n_at_least_two(n);
  check_tau_positive(tau);
  if (!std::isfinite(xi)) throw ValidationError("xi must be finite");
  const double a = tau + xi * std::sqrt(tau) - n + 1.0;
  if (a <= 0.0) {
    throw RangeError(
        "prefactor_P needs tau + xi sqrt(tau) - n + 1 > 0; got " +
        std::to_string(a));
  }
  const double log_p = 0.5 * std::log(kTwoPi) - tau +
                       (a - 0.5) * std::log(tau) - std::lgamma(a);
  return std::exp(log_p);
}

double g_factor(int n, double w, double tau, double xi) {
  check_n_at_least_two(n);
  check_tau_positive(tau);
  if (!std::isfinite(xi)) throw ValidationError("xi must be finite");
  if (!std::isfinite(w) || w < 0.0) {
    throw DomainError("g_factor needs w >= 0");
  }
  const double sqrt_tau = std::sqrt(tau);
  const double x = std::pow(w, n);
  if (x >= sqrt_tau) {
    throw DomainError("g_factor needs w^n < sqrt(tau): the power factor "
                      "degenerates at the right endpoint");
  }
  const double arg = (tau + xi * sqrt_tau - n) * std::log1p(-x / sqrt_tau) +
                     x * sqrt_tau + xi * x + 0.5 * x * x;
  return std::expm1(arg);
}

double x_star(int n, double xi) {
  check_n_at_least_two(n);
  if (!std::isfinite(xi)) throw ValidationError("xi must be finite");
  // Positive root of x^2/3 + xi x/2 - n = 0, i.e. x^2 + (3 xi/2) x - 3n = 0.
  const double b = 1.5 * xi;
  const double disc = std::sqrt(b * b + 12.0 * n);
  // For b > 0 the direct formula cancels; use the product form instead.
  return b > 0.0 ? 6.0 * n / (b + disc) : 0.5 * (disc - b);
}

double J_term(int k, int n, double xi, double tau,
              const MonomerTrajectory& traj, const QuadratureSpec& spec,
              FnSource fn_source, double asymp_floor) {
  if (k < 1 || k > 4) {
    throw ValidationError("J_term index k must be in 1..4");
  }
  check_n_at_least_two(n);
  check_tau_positive(tau);
  if (!std::isfinite(xi)) throw ValidationError("xi must be finite");
  spec.validate();
  const bool uses_fn = (k == 2 || k == 4);
  if (uses_fn && fn_source == FnSource::asymptotic &&
      (!std::isfinite(asymp_floor) || asymp_floor <= 0.0)) {
    throw ValidationError("asymp_floor must be positive");
  }
  if (uses_fn && fn_source == FnSource::trajectory) {
    if (traj.params().n != n) {
      throw ValidationError("J_term n disagrees with the trajectory's n");
    }
    if (tau > traj.tau_max() * (1.0 + 1e-12)) {
      throw RangeError("J_term with the trajectory backend needs tau within "
                       "the trajectory horizon");
    }
  }
  const FrontIntegrand f{k,    n,         xi,          tau,
                         std::sqrt(tau),  &traj,       fn_source,
                         asymp_floor,     &traj.params()};
  const double w_up = std::pow(tau, 1.0 / (2.0 * n));
  return quad_finite([&f](double w) { return f(w); }, 0.0, w_up, spec).value;
}

double phi_continuous(double x, double tau, const ModelParams& params,
                      const MonomerTrajectory& traj,
                      const QuadratureSpec& spec) {
  check_tau_positive(tau);
  if (params.n != traj.params().n) {
    throw ValidationError("phi_continuous n disagrees with the trajectory");
  }
  if (!std::isfinite(x) || x <= params.n - 1.0) {
    throw DomainError("phi_continuous needs cluster coordinate x > n - 1");
  }
  const double n = params.n;
  const double alpha = params.alpha;
  const double prefactor = std::sqrt(kTwoPi) / alpha *
                           std::pow(alpha / n, 1.0 / n) *
                           std::pow(tau, (n - 1.0) / (2.0 * n));
  return prefactor * gamma_kernel_weighted_integral(x - n, tau, traj, spec);
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points,
                 bool with_log) {
  if (points.size() < 3) {
    throw ValidationError("fit_rate needs at least 3 points");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& [s, v] = points[i];
    if (!std::isfinite(s) || s <= 0.0) {
      throw ValidationError("fit_rate scales must be positive and finite");
    }
    if (i > 0 && s <= points[i - 1].first) {
      throw ValidationError("fit_rate scales must be strictly increasing");
    }
    if (!std::isfinite(v) || v <= 0.0) {
      throw DomainError("fit_rate values must be positive and finite");
    }
    if (with_log && s <= 1.0) {
      throw DomainError(
          "fit_rate with a log correction needs scales greater than 1");
    }
  }

  const std::size_t m = points.size();
  std::vector<double> xs(m), ys(m);
  for (std::size_t i = 0; i < m; ++i) {
    xs[i] = std::log(points[i].first);
    const double v =
        with_log ? points[i].second / std::log(points[i].first)
                 : points[i].second;
    ys[i] = std::log(v);
  }
  double x_bar = 0.0, y_bar = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    x_bar += xs[i];
    y_bar += ys[i];
  }
  x_bar /= static_cast<double>(m);
  y_bar /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    sxx += (xs[i] - x_bar) * (xs[i] - x_bar);
    sxy += (xs[i] - x_bar) * (ys[i] - y_bar);
  }
  const double slope = sxy / sxx;
  const double intercept = y_bar - slope * x_bar;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double r = ys[i] - (intercept + slope * xs[i]);
    ss_res += r * r;
    ss_tot += (ys[i] - y_bar) * (ys[i] - y_bar);
  }
  RateFit fit;
  fit.exponent = slope;
  fit.amplitude = std::exp(intercept);
  fit.r_squared =
      ss_tot == 0.0 ? 1.0
                    : std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  fit.with_log_correction = with_log;
  fit.points_used = static_cast<int>(m);
  return fit;
}

std::vector<std::pair<double, double>> drop_smallest_decade(
    std::vector<std::pair<double, double>> points) {
  if (points.empty()) return points;
  double s_min = points.front().first;
  for (const auto& p : points) s_min = std::min(s_min, p.first);
  std::vector<std::pair<double, double>> kept;
  kept.reserve(points.size());
  for (const auto& p : points) {
    if (p.first >= 10.0 * s_min) kept.push_back(p);
  }
  if (kept.size() < 3) return points;
  return kept;
}

namespace {

// Builds one check from measured values: fit where possible, honor the
// below-floor escape hatch, and compare against the expected window.
// `open_upper` marks windows of the form (-inf, hi): pass when the fitted
// exponent is merely below hi (used where only "decays" resp. "decays
// faster than hi" is claimed).
LemmaCheck make_check(std::string name, const std::vector<double>& tau_grid,
                      std::vector<double> values, double expected,
                      double window_lo, double window_hi, double floor,
                      bool with_log, bool open_upper) {
  LemmaCheck chk;
  chk.name = std::move(name);
  chk.values = std::move(values);
  chk.expected_exponent = expected;
  chk.window_lo = window_lo;
  chk.window_hi = window_hi;

  double v_max = 0.0;
  for (double v : chk.values) v_max = std::max(v_max, std::abs(v));
  if (v_max <= floor) {
    chk.below_floor = true;
    chk.pass = true;
    return chk;
  }

  std::vector<std::pair<double, double>> pts;
  pts.reserve(tau_grid.size());
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (chk.values[i] > 0.0) pts.emplace_back(tau_grid[i], chk.values[i]);
  }
  pts = drop_smallest_decade(std::move(pts));
  if (pts.size() < 3) {
    chk.pass = false;  // nothing measurable and not uniformly tiny
    return chk;
  }
  chk.fit = fit_rate(pts, with_log);
  chk.fitted = true;
  const bool in_window =
      open_upper ? chk.fit.exponent < window_hi
                 : (chk.fit.exponent >= window_lo &&
                    chk.fit.exponent <= window_hi);
  chk.pass = chk.fit.r_squared >= 0.9 && in_window;
  return chk;
}

}  // namespace

LemmaRateReport check_lemma_rates(int n, double xi,
                                  const std::vector<double>& tau_grid,
                                  const MonomerTrajectory& traj,
                                  const QuadratureSpec& spec) {
  check_n_at_least_two(n);
  if (!std::isfinite(xi)) throw ValidationError("xi must be finite");
  if (traj.params().n != n) {
    throw ValidationError("check_lemma_rates n disagrees with the trajectory");
  }
  if (tau_grid.size() < 3) {
    throw ValidationError("check_lemma_rates needs at least 3 tau values");
  }
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (!std::isfinite(tau_grid[i]) || tau_grid[i] <= 0.0) {
      throw ValidationError("tau grid must be positive and finite");
    }
    if (i > 0 && tau_grid[i] <= tau_grid[i - 1]) {
      throw ValidationError("tau grid must be strictly increasing");
    }
  }
  if (tau_grid.back() < 1000.0 * tau_grid.front()) {
    throw ValidationError(
        "rate measurement needs a tau grid spanning at least 3 decades");
  }
  if (tau_grid.back() > traj.tau_max() * (1.0 + 1e-12)) {
    throw RangeError("tau grid exceeds the trajectory horizon");
  }
  spec.validate();

  const double alpha = traj.params().alpha;
  const double nd = n;
  const double i_profile = phi2_integral(n, xi, spec);
  const double combo_offset = traj.nu0() * std::pow(nd / alpha, (nd - 1.0) / nd);

  const std::size_t m = tau_grid.size();
  std::vector<double> p_dev(m), j1_gap(m), j3_abs(m), j4_abs(m), j2_combo(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double tau = std::min(tau_grid[i], traj.tau_max());
    p_dev[i] = std::abs(prefactor_P(n, xi, tau) * std::exp(0.5 * xi * xi) -
                        1.0);
    const double j1 = J_term(1, n, xi, tau, traj, spec);
    const double j2 = J_term(2, n, xi, tau, traj, spec);
    const double j3 = J_term(3, n, xi, tau, traj, spec);
    const double j4 = J_term(4, n, xi, tau, traj, spec);
    j1_gap[i] = std::abs(j1 - i_profile);
    j3_abs[i] = std::abs(j3);
    j4_abs[i] = std::abs(j4);
    j2_combo[i] = std::abs(nd * std::pow(tau, 1.0 / (2.0 * nd)) * j2 +
                           combo_offset);
  }

  LemmaRateReport report;
  report.n = n;
  report.xi = xi;
  report.tau_grid = tau_grid;
  // The prefactor and the pair-correction term carry one-sided (upper-bound)
  // decay claims: the sqrt(tau) coefficient of the prefactor deviation is
  // proportional to xi and vanishes at xi = 0 (decay steepens to 1/tau), and
  // the pair correction, a product of two decaying factors, falls like
  // log(tau)/tau. Both must decay at least as fast as the stated ceiling, so
  // they are checked with an open lower edge; the measured exponent is
  // always reported.
  report.checks.push_back(make_check(
      "prefactor_gaussian_deviation", tau_grid, std::move(p_dev), -0.5, -0.6,
      -0.4, 0.0, false, true));
  report.checks.push_back(make_check("source_integral_gap", tau_grid,
                                     std::move(j1_gap), -2.0, -100.0, -2.0,
                                     1e-13, false, true));
  report.checks.push_back(make_check("correction_free_decay_j3", tau_grid,
                                     std::move(j3_abs), -0.5, -0.65, -0.35,
                                     0.0, false, false));
  report.checks.push_back(make_check("correction_pair_decay_j4", tau_grid,
                                     std::move(j4_abs), -0.5, -0.65, -0.35,
                                     0.0, false, true));
  report.checks.push_back(make_check(
      "monomer_correction_combination_j2", tau_grid, std::move(j2_combo),
      -(0.5 - 0.5 / nd), -10.0, 0.0, 0.0, true, true));

  report.all_pass = true;
  for (const auto& c : report.checks) report.all_pass = report.all_pass && c.pass;
  return report;
}

FrontConstantScan front_constant_scan(double xi,
                                      const std::vector<double>& tau_grid,
                                      const MonomerTrajectory& traj,
                                      const QuadratureSpec& spec) {
  if (!std::isfinite(xi)) throw ValidationError("xi must be finite");
  if (tau_grid.size() < 2) {
    throw ValidationError("front_constant_scan needs at least 2 tau values");
  }
  for (std::size_t i = 0; i < tau_grid.size(); ++i) {
    if (!std::isfinite(tau_grid[i]) || tau_grid[i] <= 0.0) {
      throw ValidationError("tau grid must be positive and finite");
    }
    if (i > 0 && tau_grid[i] <= tau_grid[i - 1]) {
      throw ValidationError("tau grid must be strictly increasing");
    }
  }
  if (tau_grid.back() > traj.tau_max() * (1.0 + 1e-12)) {
    throw RangeError("tau grid exceeds the trajectory horizon");
  }
  spec.validate();

  const ModelParams& params = traj.params();
  const double n = params.n;
  const double alpha = params.alpha;
  const double profile = phi2(params.n, xi, spec);

  FrontConstantScan scan;
  scan.xi = xi;
  scan.tau_grid = tau_grid;
  scan.target = -std::exp(-0.5 * xi * xi) * std::pow(alpha / n, 1.0 / n) *
                traj.nu0() / alpha;
  scan.scaled_gap.reserve(tau_grid.size());
  for (double tau_raw : tau_grid) {
    const double tau = std::min(tau_raw, traj.tau_max());
    const double x = tau + xi * std::sqrt(tau);
    const double phi = phi_continuous(x, tau, params, traj, spec);
    scan.scaled_gap.push_back(std::pow(tau, 1.0 / (2.0 * n)) *
                              (phi - profile));
  }

  bool monotone = true;
  for (std::size_t i = 1; i < scan.scaled_gap.size(); ++i) {
    const double prev = std::abs(scan.scaled_gap[i - 1] - scan.target);
    const double curr = std::abs(scan.scaled_gap[i] - scan.target);
    if (curr > prev * (1.0 + 1e-9)) {
      monotone = false;
      break;
    }
  }
  scan.monotone_toward_target = monotone;
  const double last = scan.scaled_gap.back();
  scan.final_rel_deviation =
      scan.target == 0.0 ? std::abs(last)
                         : std::abs(last - scan.target) / std::abs(scan.target);
  return scan;
}

}  // namespace smd
