#pragma once

#include <cstdint>

#include "smd/kinetics.hpp"
#include "smd/model.hpp"
#include "smd/quadrature.hpp"

namespace smd {

// Front-geometry factor: Delta_j(xi) is the unique positive solution of
// tau + xi sqrt(tau) = j written as tau = j Delta_j(xi),
//   Delta_j(xi) = (sqrt(1 + xi^2/(4j)) + sgn(-xi) sqrt(xi^2/(4j)))^2,
// with sgn(0) = 0, so Delta_j(0) = 1 and Delta_j < 1 iff xi > 0.
// Preconditions: j >= 1; xi finite.  With guard_n > 0 and xi > 0, xi must
// satisfy xi <= sqrt(j) (1 - guard_n/j), which keeps tau = j Delta_j away
// from the degenerate small-tau corner; violations raise DomainError.
// guard_n = 0 (default) disables the guard.
double delta_j(double xi, std::int64_t j, int guard_n = 0);

// A (j, xi) pair with its induced front geometry. Construction applies the
// delta_j guard with guard_n = params.n, so tau stays in the physical
// regime tau >= n.
struct ScalingPoint {
  std::int64_t j;
  double xi;
  double delta;  // Delta_j(xi)
  double tau;    // j * delta, so tau + xi sqrt(tau) = j

  ScalingPoint(const ModelParams& params, std::int64_t j_in, double xi_in);
};

// Split index between the "small l" and "large l" partial sums:
//   j_star = (j - n) - (1 + |xi|) sqrt(j - n).
// Precondition: j > n.
double j_star(std::int64_t j, double xi, int n);

// log of the Poisson weight: m log(tau) - tau - lgamma(m + 1).
// Preconditions: m >= 0, tau > 0. Always finite.
double poisson_weight_log(std::int64_t m, double tau);

// Initial-data part of the exact representation:
//   I1 = e^{-tau} sum_{k=n}^{j} tau^{j-k}/(j-k)! c_k(0),
// each term evaluated in log space, compensated summation.
// Preconditions: j >= n, tau >= 0.
double I1(std::int64_t j, double tau, const InitialData& data);

// Shared kernel behind I2 and its real-index continuation: the integral of
//   c1(tau - s)^{n-1} s^m e^{-s} / Gamma(m + 1)
// over s in the window [max(0, m - 12 sigma - 60), min(tau, m + 12 sigma + 60)],
// sigma = sqrt(max(1, m)); outside the window the gamma kernel is below
// ~1e-16 of its peak mass, so the truncation is far under the quadrature
// tolerance. m may be any real > -1; an empty window returns 0.
double gamma_kernel_weighted_integral(double m, double tau,
                                      const MonomerTrajectory& traj,
                                      const QuadratureSpec& quad = {});

// Source part of the exact representation:
//   I2 = 1/(j-n)! integral_0^tau c1(tau-s)^{n-1} s^{j-n} e^{-s} ds.
// Preconditions: j >= n; 0 <= tau <= traj.tau_max().
double I2(std::int64_t j, double tau, const MonomerTrajectory& traj,
          const QuadratureSpec& quad = {});

// Exact-representation value c~_j(tau) = I1(j, tau) + I2(j, tau).
double c_tilde(std::int64_t j, double tau, const InitialData& data,
               const MonomerTrajectory& traj, const QuadratureSpec& quad = {});

// Scaled partial sums of the initial-data contribution for power-law data
// (multiplicative constants rho and the like dropped on purpose; only
// j-dependence is meaningful):
//   (j Delta)^{(n-1)/(2n)} e^{-j Delta} sum_l (j Delta)^l / (l! (j - l)^mu)
// with l <= j_star for S3 and j_star < l <= j - n for S4.
// Preconditions: j > n; data is power-law with K_cut >= j
// (ApplicabilityError otherwise).
double S3(std::int64_t j, double xi, const InitialData& data,
          const ModelParams& params);
double S4(std::int64_t j, double xi, const InitialData& data,
          const ModelParams& params);

}  // namespace smd
