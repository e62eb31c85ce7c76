#include "smd/closedform.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <variant>

#include "smd/compensated.hpp"
#include "smd/errors.hpp"

namespace smd {

double delta_j(double xi, std::int64_t j, int guard_n) {
  if (j < 1) {
    throw ValidationError("delta_j requires j >= 1, got " + std::to_string(j));
  }
  if (!std::isfinite(xi)) {
    throw ValidationError("delta_j requires finite xi");
  }
  if (guard_n > 0 && xi > 0.0) {
    const double dj = static_cast<double>(j);
    const double bound = std::sqrt(dj) * (1.0 - static_cast<double>(guard_n) / dj);
    if (xi > bound) {
      throw DomainError("degenerate front geometry: xi = " + std::to_string(xi) +
                        " exceeds sqrt(j)(1 - n/j) = " + std::to_string(bound) +
                        " at j = " + std::to_string(j));
    }
  }
  const double q = xi * xi / (4.0 * static_cast<double>(j));
  const double rs = std::sqrt(1.0 + q) + std::sqrt(q);
  // sqrt(Delta) solves z^2 + (xi/sqrt(j)) z = 1: for xi <= 0 the root is
  // sqrt(1+q) + sqrt(q); for xi > 0 it is sqrt(1+q) - sqrt(q), computed as
  // 1/(sqrt(1+q) + sqrt(q)) to avoid cancellation.
  const double root = xi > 0.0 ? 1.0 / rs : rs;
  return root * root;
}

ScalingPoint::ScalingPoint(const ModelParams& params, std::int64_t j_in,
                           double xi_in)
    : j(j_in), xi(xi_in) {
  if (j < params.n) {
    throw ValidationError("scaling point requires j >= n");
  }
  delta = delta_j(xi, j, params.n);
  tau = static_cast<double>(j) * delta;
}

double j_star(std::int64_t j, double xi, int n) {
  if (j <= n) {
    throw ValidationError("j_star requires j > n");
  }
  if (!std::isfinite(xi)) {
    throw ValidationError("j_star requires finite xi");
  }
  const double m = static_cast<double>(j - n);
  return m - (1.0 + std::abs(xi)) * std::sqrt(m);
}

double poisson_weight_log(std::int64_t m, double tau) {
  if (m < 0) {
    throw ValidationError("poisson_weight_log requires m >= 0");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ValidationError("poisson_weight_log requires tau > 0");
  }
  const double md = static_cast<double>(m);
  double lw = -tau - std::lgamma(md + 1.0);
  if (m > 0) lw += md * std::log(tau);
  return lw;
}

double I1(std::int64_t j, double tau, const InitialData& data) {
  if (j < data.n()) {
    throw ValidationError("I1 requires j >= n");
  }
  if (!(tau >= 0.0) || !std::isfinite(tau)) {
    throw ValidationError("I1 requires tau >= 0");
  }
  if (tau == 0.0) return data.c0(j);  // only the k = j term survives
  if (data.is_monomer_only()) return 0.0;

  CompensatedSum sum;
  auto add_term = [&](std::int64_t k, double c0k) {
    if (c0k == 0.0) return;
    sum.add(std::exp(poisson_weight_log(j - k, tau)) * c0k);
  };
  if (data.is_power_law()) {
    const PowerLawTail& pl = data.power_law();
    const std::int64_t k_hi = std::min(j, pl.K_cut);
    for (std::int64_t k = data.n(); k <= k_hi; ++k) {
      add_term(k, pl.rho * std::pow(static_cast<double>(k), -pl.mu));
    }
    return sum.value();
  }
  for (const auto& [k, v] : std::get<ExplicitTail>(data.tail()).entries) {
    if (k > j) break;  // entries are sorted by k
    add_term(k, v);
  }
  return sum.value();
}

double gamma_kernel_weighted_integral(double m, double tau,
                                      const MonomerTrajectory& traj,
                                      const QuadratureSpec& quad) {
  if (!(m > -1.0) || !std::isfinite(m)) {
    throw ValidationError("gamma kernel requires m > -1");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw ValidationError("gamma kernel requires tau > 0");
  }
  quad.validate();
  const double sigma = std::sqrt(std::max(1.0, m));
  const double lo = std::max(0.0, m - 12.0 * sigma - 60.0);
  const double hi = std::min(tau, m + 12.0 * sigma + 60.0);
  if (!(lo < hi)) {
    // The kernel's mass inside [0, tau] is at least e^{-70}-fold below its
    // peak here; the integral is zero to double precision.
    return 0.0;
  }
  const int n = traj.params().n;
  const double lognorm = std::lgamma(m + 1.0);
  auto f = [m, n, tau, lognorm, &traj](double s) {
    const double c1 = traj.x_at_tau(std::max(0.0, tau - s));
    const double weight = c1 > 0.0 ? std::pow(c1, n - 1) : 0.0;
    if (weight == 0.0) return 0.0;
    double ex = -s - lognorm;
    if (m != 0.0) ex += m * std::log(s);
    return std::exp(ex) * weight;
  };
  return quad_finite(f, lo, hi, quad).value;
}

double I2(std::int64_t j, double tau, const MonomerTrajectory& traj,
          const QuadratureSpec& quad) {
  if (j < traj.params().n) {
    throw ValidationError("I2 requires j >= n");
  }
  if (!(tau >= 0.0) || !(tau <= traj.tau_max() * (1.0 + 1e-12)) ||
      !std::isfinite(tau)) {
    throw RangeError("I2 requires 0 <= tau <= trajectory horizon");
  }
  if (tau == 0.0) return 0.0;
  return gamma_kernel_weighted_integral(static_cast<double>(j - traj.params().n),
                                        tau, traj, quad);
}

double c_tilde(std::int64_t j, double tau, const InitialData& data,
               const MonomerTrajectory& traj, const QuadratureSpec& quad) {
  if (data.n() != traj.params().n) {
    throw ValidationError("initial data and trajectory disagree on n");
  }
  return I1(j, tau, data) + I2(j, tau, traj, quad);
}

namespace {

// Common core of S3/S4: the scaled sum over an l-range determined by the
// split index j_star.
double scaled_partial_sum(std::int64_t j, double xi, const InitialData& data,
                          const ModelParams& params, bool small_l) {
  if (!data.is_power_law()) {
    throw ApplicabilityError(
        "the scaled partial sums are defined for power-law data only");
  }
  const PowerLawTail& pl = data.power_law();
  if (pl.K_cut < j) {
    throw ApplicabilityError("power-law cutoff K_cut = " +
                             std::to_string(pl.K_cut) +
                             " does not cover j = " + std::to_string(j));
  }
  if (j <= params.n) {
    throw ValidationError("scaled partial sums require j > n");
  }
  const int n = params.n;
  const double tau = static_cast<double>(j) * delta_j(xi, j, n);
  const double js = j_star(j, xi, n);
  const double logtau = std::log(tau);
  const double logpref =
      (n - 1.0) / (2.0 * n) * logtau - tau;  // (j Delta)^{(n-1)/2n} e^{-j Delta}

  std::int64_t lo = 0;
  std::int64_t hi = j - n;
  if (small_l) {
    if (js < 0.0) return 0.0;
    hi = std::min(hi, static_cast<std::int64_t>(std::floor(js)));
  } else {
    lo = std::max<std::int64_t>(
        0, static_cast<std::int64_t>(std::floor(js)) + 1);
  }
  CompensatedSum sum;
  for (std::int64_t l = lo; l <= hi; ++l) {
    const double ld = static_cast<double>(l);
    const double ex = logpref + ld * logtau - std::lgamma(ld + 1.0) -
                      pl.mu * std::log(static_cast<double>(j - l));
    sum.add(std::exp(ex));
  }
  return sum.value();
}

}  // namespace

double S3(std::int64_t j, double xi, const InitialData& data,
          const ModelParams& params) {
  return scaled_partial_sum(j, xi, data, params, true);
}

double S4(std::int64_t j, double xi, const InitialData& data,
          const ModelParams& params) {
  return scaled_partial_sum(j, xi, data, params, false);
}

}  // namespace smd
