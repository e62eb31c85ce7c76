#include "smd/profiles.hpp"

#include <cmath>
#include <string>

#include "smd/errors.hpp"

namespace smd {

namespace {

void check_n(int n) {
  if (n < 2) {
    throw ValidationError("profile order n must be at least 2, got " +
                          std::to_string(n));
  }
}

}  // namespace

double phi1(int n, double eta) {
  check_n(n);
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw DomainError("phi1 requires eta > 0, got " + std::to_string(eta));
  }
  if (eta == 1.0) {
    throw DomainError(
        "phi1 is singular along eta = 1 (the moving front); use the front "
        "profile phi2 there");
  }
  if (eta > 1.0) return 0.0;
  const double expo = static_cast<double>(n - 1) / static_cast<double>(n);
  return std::pow(1.0 - eta, -expo);
}

double phi2_integral(int n, double xi, const QuadratureSpec& spec) {
  check_n(n);
  if (!std::isfinite(xi)) {
    throw DomainError("phi2 requires finite xi");
  }
  spec.validate();
  // Integrand in the substituted variable x = w^n: exp(-xi*x - x^2/2).
  // Its exponent peaks at x* = max(0, -xi) and, past the peak, drops by
  // (x - x*)^2 / 2.  Cutting at x_cut = x* + sqrt(160) puts the integrand a
  // factor exp(-80) ~ 2e-35 below its maximum, and the Gaussian tail beyond
  // the cutoff integrates to less than 1e-16 of the whole integral.
  const double x_peak = xi < 0.0 ? -xi : 0.0;
  const double x_cut = x_peak + std::sqrt(160.0);
  const double w_cut = std::pow(x_cut, 1.0 / static_cast<double>(n));
  const auto integrand = [n, xi](double w) {
    const double x = std::pow(w, n);
    return std::exp(-xi * x - 0.5 * x * x);
  };
  const QuadResult r = quad_finite(integrand, 0.0, w_cut, spec);
  return r.value;
}

double phi2(int n, double xi, const QuadratureSpec& spec) {
  return std::exp(-0.5 * xi * xi) * phi2_integral(n, xi, spec);
}

double scaled_observable(const ModelParams& params, std::int64_t j, double tau,
                         double c_val) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw DomainError("scaled_observable requires tau > 0");
  }
  if (!(c_val >= 0.0) || !std::isfinite(c_val)) {
    throw DomainError("scaled_observable requires c_val >= 0");
  }
  if (j < params.n) {
    throw DomainError("scaled_observable requires cluster size j >= n");
  }
  const double n = static_cast<double>(params.n);
  const double pref = std::sqrt(2.0 * M_PI) / params.alpha *
                      std::pow(params.alpha / n, 1.0 / n) *
                      std::pow(tau, (n - 1.0) / (2.0 * n));
  return pref * c_val;
}

}  // namespace smd
