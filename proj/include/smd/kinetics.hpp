#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "smd/model.hpp"

namespace smd {

// Which backend supplies c1-dependent quantities: the interpolated numerical
// trajectory, or the two-term large-time formula.
enum class FnSource { trajectory, asymptotic };

// One dense-output node of the monomer--bulk solve. Derivatives are with
// respect to physical time t and are exact right-hand-side values at the
// node, so every segment supports cubic Hermite interpolation of x, y, and
// tau as functions of t.
struct TrajectoryNode {
  double t;     // physical time
  double tau;   // rescaled time tau(t) = integral_0^t x(s) ds
  double x;     // monomer density c_1
  double y;     // total cluster density sum_{j >= n} c_j
  double xdot;  // dx/dt at the node
  double ydot;  // dy/dt at the node
};

// Immutable dense-output trajectory of the monomer--bulk system
//   dx/dt = alpha - n x^n - x y,   dy/dt = x^n,   dtau/dt = x.
// Queries at arbitrary tau invert the monotone piecewise-cubic tau(t) on the
// bracketing segment and evaluate the cubic Hermite interpolant of x(t) or
// y(t) there.  Thread-safe for concurrent reads once constructed.
class MonomerTrajectory {
 public:
  // nodes must be ordered with strictly increasing t and tau; derivatives
  // must be finite.  y0 is the total cluster density at t = 0 and nu0 the
  // same zeroth moment kept separately for reporting (they coincide for the
  // initial data used here).  state_rel_err is the relative accuracy of the
  // node states (the solver tolerance); it controls when interpolation of x
  // falls back from the stored right-hand-side slopes to value-based slopes,
  // because at large tau the right-hand side is a near-total cancellation
  // whose noise long segments would otherwise amplify.  Zero means the
  // states are exact and the stored slopes are always used.
  MonomerTrajectory(const ModelParams& params,
                    std::vector<TrajectoryNode> nodes, double y0, double nu0,
                    double state_rel_err = 0.0);

  const ModelParams& params() const { return params_; }
  const std::vector<TrajectoryNode>& nodes() const { return nodes_; }
  double tau_max() const { return nodes_.back().tau; }
  double t_max() const { return nodes_.back().t; }
  double c1_0() const { return nodes_.front().x; }
  double y0() const { return y0_; }
  double nu0() const { return nu0_; }

  // Interpolants at rescaled time tau in [0, tau_max]; out-of-range tau
  // raises RangeError.
  double x_at_tau(double tau) const;
  double y_at_tau(double tau) const;
  double t_at_tau(double tau) const;

  // Debug export, columns t,tau,x,y (full double precision).
  void write_csv(std::ostream& os) const;

  // Trajectory with x held constant at kappa > 0 (so tau = kappa * t and
  // y = kappa^n t).  Used by tests and closed-form oracles that need a
  // prescribed constant driver.
  static MonomerTrajectory synthetic_constant(const ModelParams& params,
                                              double kappa, double tau_max);

 private:
  std::size_t segment_for_tau(double tau) const;

  ModelParams params_;
  std::vector<TrajectoryNode> nodes_;
  // Shape-preserving fallback slopes for interpolating x(t), built from
  // node values; used on segments where the right-hand-side slopes would
  // amplify state noise (see the constructor comment).
  std::vector<double> xslope_;
  double y0_ = 0.0;
  double nu0_ = 0.0;
  double state_rel_err_ = 0.0;
};

// Integrates the monomer--bulk system from the given initial data until the
// rescaled time reaches tau_target, with local error controlled at rel_tol
// by embedded adaptive steppers of order >= 4.  Integration runs in
// physical time until tau = 1 and in rescaled time afterwards, switching to
// a linearly implicit stepper for the latter leg because the rescaled
// system's decay rate grows like tau^{2/n} and defeats explicit steppers at
// large tau.
// Preconditions: tau_target > 0; rel_tol in (1e-14, 1e-3).
// Errors: HorizonError when the step budget is exhausted before tau_target;
// InstabilityError when the state leaves the finite positive regime.
MonomerTrajectory solve_monomer_bulk(const ModelParams& params,
                                     const InitialData& data,
                                     double tau_target,
                                     double rel_tol = 1e-10);

// Interpolated monomer density in rescaled time, x(t(tau)).
// Precondition: 0 <= tau <= traj.tau_max() (RangeError otherwise).
double c1_tilde(const MonomerTrajectory& traj, double tau);

// Two-term large-time approximation of the monomer density: the (n-1)-th
// root of (alpha/(n tau))^{(n-1)/n} * (1 + (n-1)(1-1/n) log(tau)/tau).
// Precondition: tau >= tau_asymp_min (DomainError otherwise; the formula is
// meaningless near tau = 0).
double c1_asymptotic(const ModelParams& params, double tau,
                     double tau_asymp_min = 100.0);

// Monomer decay correction f_n(tau) = -1 + (n tau/alpha)^{(n-1)/n} *
// c1(tau)^{n-1}.  With the asymptotic source this reduces algebraically to
// (n-1)(1-1/n) log(tau)/tau, valid for any tau > 0; with the trajectory
// source c1 is interpolated from traj (which must then be non-null and
// cover tau).
double fn_correction(FnSource source, const ModelParams& params, double tau,
                     const MonomerTrajectory* traj = nullptr);

// Result of a truncated full solve: cluster sizes 1 and n..J on a time
// grid, plus the rescaled time and the accumulated boundary flux
// integral_0^t (J+1) c_1 c_J ds needed by the mass identity
//   c_1 + sum_{j=n}^J j c_j = initial mass + alpha t - flux.
struct TruncatedSolution {
  ModelParams params{2, 1.0};
  std::int64_t J = 0;
  std::vector<double> times;
  std::vector<double> tau_values;     // tau(t) along the solve
  std::vector<double> flux_integral;  // integral_0^t (J+1) c_1 c_J ds
  // Row-major concentrations: row i holds c_1, c_n, ..., c_J at times[i].
  std::vector<std::vector<double>> rows;
  double initial_mass = 0.0;  // c_1(0) + sum_{j=n}^J j c_j(0)

  double c1(std::size_t i) const { return rows[i][0]; }
  // Concentration of cluster size j (j == 1 or n <= j <= J).
  double c(std::size_t i, std::int64_t j) const;
  // c_1 + sum j c_j at row i, compensated summation.
  double mass(std::size_t i) const;
  // mass(i) - initial_mass - alpha t + flux(i); zero for the exact flow.
  double mass_residual(std::size_t i) const;
};

// Integrates the truncated system
//   dc_1/dt = alpha - n c_1^n - c_1 sum_{j=n}^J c_j,
//   dc_n/dt = c_1^n - c_1 c_n,
//   dc_j/dt = c_1 c_{j-1} - c_1 c_j   (n < j <= J)
// to t_end.  Initial cluster data beyond J is dropped (the truncated system
// has no such states); initial_mass is computed from what the system
// tracks, so the mass identity above holds exactly for the truncated flow.
// If t_out is nonempty the solve lands exactly on those times and reports
// only them; otherwise rows are recorded on an adaptive grid.
// Tiny negative concentrations (|c| < 10 rel_tol * scale) are clamped to
// zero; larger violations raise InstabilityError.
// Preconditions: J >= n; t_end > 0; rel_tol in (1e-14, 1e-3).
TruncatedSolution solve_full_truncated(const ModelParams& params,
                                       const InitialData& data,
                                       std::int64_t J, double t_end,
                                       double rel_tol = 1e-8,
                                       std::vector<double> t_out = {});

// Result of the lower-triangular rescaled-time solve: c~_j(tau) for
// j = n..J on the requested tau grid.
struct TriangularSolution {
  int n = 2;
  std::int64_t J = 0;
  std::vector<double> tau_grid;
  // Row-major: row g holds c~_n, ..., c~_J at tau_grid[g].
  std::vector<std::vector<double>> rows;

  double at(std::size_t g, std::int64_t j) const;
};

// Solves the rescaled-time cascade
//   c~_n' = c1(tau)^{n-1} - c~_n,   c~_j' = c~_{j-1} - c~_j   (n < j <= J)
// with the driver c1(tau) supplied as a function, from the initial values
// c~_j(0) = data.c0(j), landing exactly on each tau_grid point.
// Preconditions: J >= n; tau_grid nonempty, nonnegative, strictly
// increasing.
TriangularSolution solve_triangular_tau_fn(
    const ModelParams& params, const InitialData& data,
    const std::function<double(double)>& c1_of_tau, std::int64_t J,
    std::vector<double> tau_grid, double rel_tol = 1e-10);

// Same cascade with the driver interpolated from a monomer--bulk
// trajectory; tau_grid must stay within [0, traj.tau_max()].
TriangularSolution solve_triangular_tau(const ModelParams& params,
                                        const InitialData& data,
                                        const MonomerTrajectory& traj,
                                        std::int64_t J,
                                        std::vector<double> tau_grid,
                                        double rel_tol = 1e-10);

}  // namespace smd
