#include "smd/kinetics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <string>
#include <utility>

#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation/generation_controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation/generation_runge_kutta_cash_karp54.hpp>
#include <boost/numeric/odeint/stepper/generation/make_controlled.hpp>
#include <boost/numeric/odeint/stepper/runge_kutta_cash_karp54.hpp>

#include "smd/compensated.hpp"
#include "smd/errors.hpp"

namespace smd {

namespace {

namespace ode = boost::numeric::odeint;

// Cubic Hermite basis on [0,1]: endpoint values p0, p1 and endpoint
// derivatives m0, m1 already scaled by the segment length.
double hermite(double th, double p0, double m0, double p1, double m1) {
  const double th2 = th * th;
  const double th3 = th2 * th;
  return (2 * th3 - 3 * th2 + 1) * p0 + (th3 - 2 * th2 + th) * m0 +
         (-2 * th3 + 3 * th2) * p1 + (th3 - th2) * m1;
}

double hermite_deriv(double th, double p0, double m0, double p1, double m1) {
  const double th2 = th * th;
  return (6 * th2 - 6 * th) * p0 + (3 * th2 - 4 * th + 1) * m0 +
         (-6 * th2 + 6 * th) * p1 + (3 * th2 - 2 * th) * m1;
}

// ---------------------------------------------------------------------------
// Self-contained linearly implicit (Rosenbrock) stepper of order 4 with an
// embedded order-3 error estimate, for small fixed-size autonomous systems.
// Coefficients are the classical stiffly stable set with gamma = 1/4 used
// throughout the stiff-ODE literature; the method is L-stable, so the step
// size follows the solution's accuracy instead of its fastest contraction
// rate.  Written out here because the target system has dimension 3 and a
// dense partial-pivot LU is a few lines.

struct RosCoef {
  static constexpr double gamma = 0.25;
  static constexpr double c2 = 0.386, c3 = 0.21, c4 = 0.63;
  static constexpr double a21 = 1.544;
  static constexpr double a31 = 0.9466785280815826, a32 = 0.2557011698983284;
  static constexpr double a41 = 3.314825187068521, a42 = 2.896124015972201,
                          a43 = 0.9986419139977817;
  static constexpr double a51 = 1.221224509226641, a52 = 6.019134481288629,
                          a53 = 12.53708332932087, a54 = -0.6878860361058950;
  static constexpr double c21 = -5.6688;
  static constexpr double c31 = -2.430093356833875, c32 = -0.2063599157091915;
  static constexpr double c41 = -0.1073529058151375, c42 = -9.594562251023355,
                          c43 = -20.47028614809616;
  static constexpr double c51 = 7.496443313967647, c52 = -10.24680431464352,
                          c53 = -33.99990352819905, c54 = 11.70890893206160;
  static constexpr double c61 = 8.083246795921522, c62 = -7.981132988064893,
                          c63 = -31.52159432874371, c64 = 16.31930543123136,
                          c65 = -6.058818238834054;
};

template <std::size_t N>
bool lu_factor(std::array<std::array<double, N>, N>& a,
               std::array<std::size_t, N>& piv) {
  for (std::size_t k = 0; k < N; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < N; ++i) {
      if (std::abs(a[i][k]) > std::abs(a[p][k])) p = i;
    }
    if (a[p][k] == 0.0 || !std::isfinite(a[p][k])) return false;
    piv[k] = p;
    if (p != k) std::swap(a[p], a[k]);
    for (std::size_t i = k + 1; i < N; ++i) {
      a[i][k] /= a[k][k];
      for (std::size_t j = k + 1; j < N; ++j) a[i][j] -= a[i][k] * a[k][j];
    }
  }
  return true;
}

template <std::size_t N>
void lu_solve(const std::array<std::array<double, N>, N>& a,
              const std::array<std::size_t, N>& piv,
              std::array<double, N>& b) {
  for (std::size_t k = 0; k < N; ++k) {
    std::swap(b[k], b[piv[k]]);
    for (std::size_t i = k + 1; i < N; ++i) b[i] -= a[i][k] * b[k];
  }
  for (std::size_t k = N; k-- > 0;) {
    for (std::size_t j = k + 1; j < N; ++j) b[k] -= a[k][j] * b[j];
    b[k] /= a[k][k];
  }
}

// One attempted step of the 4(3) pair.  On acceptance x and t advance and
// dt becomes the recommended next step; on rejection only dt shrinks.
// last_rejected implements the usual no-growth-after-rejection rule.
template <std::size_t N, class Sys, class Jac>
bool rosenbrock43_try_step(Sys&& sys, Jac&& jac, std::array<double, N>& x,
                           double& t, double& dt, double abs_tol,
                           double rel_tol, bool& last_rejected) {
  using Vec = std::array<double, N>;
  using Mat = std::array<std::array<double, N>, N>;
  const RosCoef cf;

  Vec dxdt{}, f{}, g1{}, g2{}, g3{}, g4{}, g5{}, xtmp{}, xerr{};
  Mat a{};
  std::array<std::size_t, N> piv{};

  sys(x, dxdt, t);
  jac(x, a, t);
  for (std::size_t i = 0; i < N; ++i) {
    for (std::size_t j = 0; j < N; ++j) a[i][j] = -a[i][j];
    a[i][i] += 1.0 / (cf.gamma * dt);
  }
  if (!lu_factor(a, piv)) {
    dt *= 0.5;
    last_rejected = true;
    return false;
  }

  g1 = dxdt;
  lu_solve(a, piv, g1);

  for (std::size_t i = 0; i < N; ++i) xtmp[i] = x[i] + cf.a21 * g1[i];
  sys(xtmp, f, t + cf.c2 * dt);
  for (std::size_t i = 0; i < N; ++i) g2[i] = f[i] + cf.c21 * g1[i] / dt;
  lu_solve(a, piv, g2);

  for (std::size_t i = 0; i < N; ++i) {
    xtmp[i] = x[i] + cf.a31 * g1[i] + cf.a32 * g2[i];
  }
  sys(xtmp, f, t + cf.c3 * dt);
  for (std::size_t i = 0; i < N; ++i) {
    g3[i] = f[i] + (cf.c31 * g1[i] + cf.c32 * g2[i]) / dt;
  }
  lu_solve(a, piv, g3);

  for (std::size_t i = 0; i < N; ++i) {
    xtmp[i] = x[i] + cf.a41 * g1[i] + cf.a42 * g2[i] + cf.a43 * g3[i];
  }
  sys(xtmp, f, t + cf.c4 * dt);
  for (std::size_t i = 0; i < N; ++i) {
    g4[i] = f[i] + (cf.c41 * g1[i] + cf.c42 * g2[i] + cf.c43 * g3[i]) / dt;
  }
  lu_solve(a, piv, g4);

  for (std::size_t i = 0; i < N; ++i) {
    xtmp[i] = x[i] + cf.a51 * g1[i] + cf.a52 * g2[i] + cf.a53 * g3[i] +
              cf.a54 * g4[i];
  }
  sys(xtmp, f, t + dt);
  for (std::size_t i = 0; i < N; ++i) {
    g5[i] = f[i] + (cf.c51 * g1[i] + cf.c52 * g2[i] + cf.c53 * g3[i] +
                    cf.c54 * g4[i]) /
                       dt;
  }
  lu_solve(a, piv, g5);

  for (std::size_t i = 0; i < N; ++i) xtmp[i] += g5[i];
  sys(xtmp, f, t + dt);
  for (std::size_t i = 0; i < N; ++i) {
    xerr[i] = f[i] + (cf.c61 * g1[i] + cf.c62 * g2[i] + cf.c63 * g3[i] +
                      cf.c64 * g4[i] + cf.c65 * g5[i]) /
                         dt;
  }
  lu_solve(a, piv, xerr);

  Vec xout{};
  for (std::size_t i = 0; i < N; ++i) xout[i] = xtmp[i] + xerr[i];

  double err = 0.0;
  for (std::size_t i = 0; i < N; ++i) {
    const double sk =
        abs_tol + rel_tol * std::max(std::abs(x[i]), std::abs(xout[i]));
    err += (xerr[i] / sk) * (xerr[i] / sk);
  }
  err = std::sqrt(err / static_cast<double>(N));
  if (!std::isfinite(err)) {
    dt *= 0.5;
    last_rejected = true;
    return false;
  }

  const double fac =
      std::clamp(std::pow(err, 0.25) / 0.9, 1.0 / 6.0, 5.0);
  const double dt_new = dt / fac;
  if (err <= 1.0) {
    t += dt;
    x = xout;
    dt = last_rejected ? std::min(dt_new, dt) : dt_new;
    last_rejected = false;
    return true;
  }
  last_rejected = true;
  dt = dt_new;
  return false;
}

// Solves tau(theta) = tau_q on one segment, where tau(theta) is the cubic
// Hermite interpolant of the monotone tau(t).  Newton iteration with a
// bisection safeguard; the endpoints always bracket the root.
double invert_tau_on_segment(const TrajectoryNode& a, const TrajectoryNode& b,
                             double tau_q) {
  if (tau_q <= a.tau) return 0.0;
  if (tau_q >= b.tau) return 1.0;
  const double h = b.t - a.t;
  const double m0 = h * a.x;  // d(tau)/d(theta) at the ends
  const double m1 = h * b.x;
  double lo = 0.0, hi = 1.0;
  double th = (tau_q - a.tau) / (b.tau - a.tau);
  for (int it = 0; it < 100; ++it) {
    const double f = hermite(th, a.tau, m0, b.tau, m1) - tau_q;
    if (f > 0.0) {
      hi = th;
    } else if (f < 0.0) {
      lo = th;
    } else {
      break;
    }
    if (hi - lo < 4e-16) break;
    const double d = hermite_deriv(th, a.tau, m0, b.tau, m1);
    double next = d > 0.0 ? th - f / d : -1.0;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - th) < 1e-17) {
      th = next;
      break;
    }
    th = next;
  }
  return th;
}

}  // namespace

MonomerTrajectory::MonomerTrajectory(const ModelParams& params,
                                     std::vector<TrajectoryNode> nodes,
                                     double y0, double nu0,
                                     double state_rel_err)
    : params_(params),
      nodes_(std::move(nodes)),
      y0_(y0),
      nu0_(nu0),
      state_rel_err_(state_rel_err) {
  if (nodes_.size() < 2) {
    throw ValidationError("trajectory needs at least two nodes");
  }
  if (nodes_.front().t != 0.0 || nodes_.front().tau != 0.0) {
    throw ValidationError("trajectory must start at t = 0, tau = 0");
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const TrajectoryNode& nd = nodes_[i];
    if (!std::isfinite(nd.t) || !std::isfinite(nd.tau) ||
        !std::isfinite(nd.x) || !std::isfinite(nd.y) ||
        !std::isfinite(nd.xdot) || !std::isfinite(nd.ydot)) {
      throw ValidationError("trajectory node is not finite");
    }
    if (i > 0 && !(nodes_[i - 1].t < nd.t && nodes_[i - 1].tau < nd.tau)) {
      throw ValidationError("trajectory nodes must increase in t and tau");
    }
  }
  if (!std::isfinite(y0_) || y0_ < 0.0 || !std::isfinite(nu0_) || nu0_ < 0.0) {
    throw ValidationError("initial bulk density must be finite and >= 0");
  }

  // Fallback interpolation slopes for x(t), from node values only
  // (Steffen's shape-preserving scheme).  The stored xdot is the exact
  // right-hand side, but at large tau that is a near-total cancellation of
  // O(alpha) terms, so the small absolute error inherited from the node
  // states is large relative to the slope itself, and cubic Hermite
  // interpolation across the long late-time segments would amplify it into
  // relative errors in x orders of magnitude above the solver tolerance.
  // Value differences do not suffer from the cancellation, and the limiter
  // keeps the interpolant inside the node range (x stays nonnegative).
  // x_at_tau picks between the two slope sources per segment.
  const std::size_t m = nodes_.size();
  xslope_.assign(m, 0.0);
  if (m == 2) {
    const double s = (nodes_[1].x - nodes_[0].x) / (nodes_[1].t - nodes_[0].t);
    xslope_[0] = xslope_[1] = s;
    return;
  }
  std::vector<double> h(m - 1), s(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) {
    h[i] = nodes_[i + 1].t - nodes_[i].t;
    s[i] = (nodes_[i + 1].x - nodes_[i].x) / h[i];
  }
  for (std::size_t i = 1; i + 1 < m; ++i) {
    if (s[i - 1] * s[i] <= 0.0) {
      xslope_[i] = 0.0;
    } else {
      const double p =
          (s[i - 1] * h[i] + s[i] * h[i - 1]) / (h[i - 1] + h[i]);
      const double lim =
          2.0 * std::min(std::abs(s[i - 1]), std::abs(s[i]));
      xslope_[i] = std::copysign(std::min(std::abs(p), lim), s[i]);
    }
  }
  const auto one_sided = [](double s0, double s1, double h0, double h1) {
    const double p = s0 * (1.0 + h0 / (h0 + h1)) - s1 * h0 / (h0 + h1);
    if (p * s0 <= 0.0) return 0.0;
    if (std::abs(p) > 2.0 * std::abs(s0)) return 2.0 * s0;
    return p;
  };
  xslope_.front() = one_sided(s[0], s[1], h[0], h[1]);
  xslope_.back() = one_sided(s[m - 2], s[m - 3], h[m - 2], h[m - 3]);
}

std::size_t MonomerTrajectory::segment_for_tau(double tau) const {
  const double tmax = tau_max();
  if (!(tau >= 0.0) || !(tau <= tmax * (1.0 + 1e-12))) {
    throw RangeError("tau = " + std::to_string(tau) +
                     " outside trajectory range [0, " + std::to_string(tmax) +
                     "]");
  }
  // First node with node.tau > tau, then step back to the segment start.
  const auto it =
      std::upper_bound(nodes_.begin(), nodes_.end(), tau,
                       [](double v, const TrajectoryNode& nd) { return v < nd.tau; });
  std::size_t idx = static_cast<std::size_t>(it - nodes_.begin());
  if (idx == 0) return 0;              // tau == 0
  if (idx >= nodes_.size()) return nodes_.size() - 2;  // tau == tau_max
  return idx - 1;
}

double MonomerTrajectory::x_at_tau(double tau) const {
  const std::size_t i = segment_for_tau(tau);
  const TrajectoryNode& a = nodes_[i];
  const TrajectoryNode& b = nodes_[i + 1];
  if (tau <= a.tau) return a.x;
  if (tau >= b.tau) return b.x;
  const double th = invert_tau_on_segment(a, b, tau);
  const double h = b.t - a.t;

  // The exact right-hand-side slopes interpolate at full order, but their
  // absolute noise is the node-state error times the magnitude of the
  // canceling terms.  Hermite interpolation turns slope noise delta_m into a
  // value artifact of at most ~0.16 h delta_m, so when that bound is not
  // negligible against x itself the value-based Steffen slopes take over
  // (that regime is the slow late-time decay, where x is so smooth that
  // second-order slopes are ample).
  const auto term_scale = [this](const TrajectoryNode& nd) {
    return params_.alpha + params_.n * std::pow(nd.x, params_.n) +
           nd.x * nd.y;
  };
  const double artifact = 0.5 * h * state_rel_err_ *
                          std::max(term_scale(a), term_scale(b));
  if (artifact <= 1e-9 * std::max(a.x, b.x)) {
    return hermite(th, a.x, h * a.xdot, b.x, h * b.xdot);
  }
  return hermite(th, a.x, h * xslope_[i], b.x, h * xslope_[i + 1]);
}

double MonomerTrajectory::y_at_tau(double tau) const {
  const std::size_t i = segment_for_tau(tau);
  const TrajectoryNode& a = nodes_[i];
  const TrajectoryNode& b = nodes_[i + 1];
  if (tau <= a.tau) return a.y;
  if (tau >= b.tau) return b.y;
  const double th = invert_tau_on_segment(a, b, tau);
  const double h = b.t - a.t;
  return hermite(th, a.y, h * a.ydot, b.y, h * b.ydot);
}

double MonomerTrajectory::t_at_tau(double tau) const {
  const std::size_t i = segment_for_tau(tau);
  const TrajectoryNode& a = nodes_[i];
  const TrajectoryNode& b = nodes_[i + 1];
  if (tau <= a.tau) return a.t;
  if (tau >= b.tau) return b.t;
  const double th = invert_tau_on_segment(a, b, tau);
  return a.t + th * (b.t - a.t);
}

void MonomerTrajectory::write_csv(std::ostream& os) const {
  os << "t,tau,x,y\n";
  char buf[200];
  for (const TrajectoryNode& nd : nodes_) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g\n", nd.t, nd.tau,
                  nd.x, nd.y);
    os << buf;
  }
}

MonomerTrajectory MonomerTrajectory::synthetic_constant(
    const ModelParams& params, double kappa, double tau_max) {
  if (!(kappa > 0.0) || !std::isfinite(kappa)) {
    throw ValidationError("synthetic trajectory requires kappa > 0");
  }
  if (!(tau_max > 0.0) || !std::isfinite(tau_max)) {
    throw ValidationError("synthetic trajectory requires tau_max > 0");
  }
  const double yrate = std::pow(kappa, params.n);
  std::vector<TrajectoryNode> nodes;
  const int kNodes = 9;
  for (int k = 0; k < kNodes; ++k) {
    const double tau = tau_max * static_cast<double>(k) / (kNodes - 1);
    const double t = tau / kappa;
    nodes.push_back({t, tau, kappa, yrate * t, 0.0, yrate});
  }
  return MonomerTrajectory(params, std::move(nodes), 0.0, 0.0);
}

MonomerTrajectory solve_monomer_bulk(const ModelParams& params,
                                     const InitialData& data,
                                     double tau_target, double rel_tol) {
  if (!(tau_target > 0.0) || !std::isfinite(tau_target)) {
    throw ValidationError("tau_target must be positive and finite");
  }
  if (!(rel_tol > 1e-14 && rel_tol < 1e-3)) {
    throw ValidationError("rel_tol must lie in (1e-14, 1e-3)");
  }
  if (data.n() != params.n) {
    throw ValidationError("initial data and parameters disagree on n");
  }
  const int n = params.n;
  const double alpha = params.alpha;
  const double y_init = nu0(data);
  const double x_init = data.c1_0();

  std::vector<TrajectoryNode> nodes;
  nodes.reserve(4096);
  auto push_node = [&](double t, double tau, double x, double y) {
    const double xn = std::pow(x, n);
    nodes.push_back({t, tau, x, y, alpha - n * xn - x * y, xn});
  };
  push_node(0.0, 0.0, x_init, y_init);

  long long budget = 8'000'000;
  auto budget_tick = [&](double tau_reached) {
    if (--budget < 0) {
      throw HorizonError("step budget exhausted at tau = " +
                         std::to_string(tau_reached) +
                         " before reaching tau_target = " +
                         std::to_string(tau_target));
    }
  };
  auto check_state = [&](double x, double y, double where) {
    if (!std::isfinite(x) || !std::isfinite(y) || x <= 0.0) {
      throw InstabilityError(
          "monomer density left the finite positive regime near tau = " +
          std::to_string(where));
    }
  };

  // Leg 1: physical time, from rest, until tau reaches min(1, tau_target).
  // The system is nonstiff here and the rescaled form is singular at x = 0.
  using State1 = std::array<double, 3>;  // x, y, tau
  State1 u{x_init, y_init, 0.0};
  double t = 0.0;
  const double tau_switch = std::min(1.0, tau_target);
  auto sys1 = [n, alpha](const State1& s, State1& d, double) {
    const double xn = std::pow(s[0], n);
    d[0] = alpha - n * xn - s[0] * s[1];
    d[1] = xn;
    d[2] = s[0];
  };
  auto ctrl1 =
      ode::make_controlled<ode::runge_kutta_cash_karp54<State1>>(1e-14, rel_tol);
  double dt = 1e-4;
  while (u[2] < tau_switch) {
    budget_tick(u[2]);
    dt = std::min(dt, 0.25);
    if (ctrl1.try_step(sys1, u, t, dt) == ode::success) {
      check_state(u[0], u[1], u[2]);
      push_node(t, u[2], u[0], u[1]);
    }
  }

  // Leg 2: rescaled time tau as the independent variable,
  //   dt/dtau = 1/x, dx/dtau = alpha/x - n x^{n-1} - y, dy/dtau = x^{n-1}.
  // The linearization contracts at rate ~ alpha/x^2, which grows like
  // tau^{2/n}; a linearly implicit (L-stable) stepper keeps the step size
  // proportional to tau instead of 1/tau^{2/n}.
  if (u[2] < tau_target) {
    using Vec3 = std::array<double, 3>;
    using Mat3 = std::array<std::array<double, 3>, 3>;
    Vec3 v{t, u[0], u[1]};
    double tau = u[2];
    auto sys2 = [n, alpha](const Vec3& s, Vec3& d, double) {
      const double x = s[1];
      const double y = s[2];
      d[0] = 1.0 / x;
      d[1] = alpha / x - n * std::pow(x, n - 1) - y;
      d[2] = std::pow(x, n - 1);
    };
    auto jac2 = [n, alpha](const Vec3& s, Mat3& jac, double) {
      const double x = s[1];
      jac[0][0] = 0.0;
      jac[0][1] = -1.0 / (x * x);
      jac[0][2] = 0.0;
      jac[1][0] = 0.0;
      jac[1][1] = -alpha / (x * x) - n * (n - 1) * std::pow(x, n - 2);
      jac[1][2] = -1.0;
      jac[2][0] = 0.0;
      jac[2][1] = (n - 1) * std::pow(x, n - 2);
      jac[2][2] = 0.0;
    };
    double dtau = std::min(1e-3, tau_target - tau);
    bool last_rejected = false;
    while (tau < tau_target) {
      budget_tick(tau);
      // Node-spacing cap keeps the dense output fine enough for cubic
      // interpolation between nodes (relative spacing ~2%).
      const double cap = 0.02 * std::max(tau, 1.0);
      dtau = std::min({dtau, cap, tau_target - tau});
      if (rosenbrock43_try_step(sys2, jac2, v, tau, dtau, 1e-14, rel_tol,
                                last_rejected)) {
        check_state(v[1], v[2], tau);
        push_node(v[0], tau, v[1], v[2]);
      }
    }
  }

  return MonomerTrajectory(params, std::move(nodes), y_init, y_init, rel_tol);
}

double c1_tilde(const MonomerTrajectory& traj, double tau) {
  return traj.x_at_tau(tau);
}

double c1_asymptotic(const ModelParams& params, double tau,
                     double tau_asymp_min) {
  if (!(tau_asymp_min > 0.0) || !std::isfinite(tau_asymp_min)) {
    throw ValidationError("tau_asymp_min must be positive");
  }
  if (!(tau >= tau_asymp_min) || !std::isfinite(tau)) {
    throw DomainError("the large-time formula requires tau >= " +
                      std::to_string(tau_asymp_min) + ", got tau = " +
                      std::to_string(tau));
  }
  const double n = params.n;
  const double base = std::pow(params.alpha / (n * tau), (n - 1.0) / n);
  const double corr = 1.0 + (n - 1.0) * (1.0 - 1.0 / n) * std::log(tau) / tau;
  return std::pow(base * corr, 1.0 / (n - 1.0));
}

double fn_correction(FnSource source, const ModelParams& params, double tau,
                     const MonomerTrajectory* traj) {
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    throw DomainError("fn_correction requires tau > 0");
  }
  const double n = params.n;
  if (source == FnSource::asymptotic) {
    // -1 + (n tau/alpha)^{(n-1)/n} c1^{n-1} with the two-term c1 formula
    // cancels algebraically to the explicit correction term.
    return (n - 1.0) * (1.0 - 1.0 / n) * std::log(tau) / tau;
  }
  if (traj == nullptr) {
    throw ValidationError("trajectory-backed fn_correction needs a trajectory");
  }
  if (traj->params().n != params.n || traj->params().alpha != params.alpha) {
    throw ValidationError("trajectory was built for different parameters");
  }
  const double c1 = c1_tilde(*traj, tau);
  return -1.0 + std::pow(n * tau / params.alpha, (n - 1.0) / n) *
                    std::pow(c1, params.n - 1);
}

double TruncatedSolution::c(std::size_t i, std::int64_t j) const {
  if (j == 1) return rows[i][0];
  if (j < params.n || j > J) {
    throw ValidationError("cluster size " + std::to_string(j) +
                          " not tracked by this truncated solve");
  }
  return rows[i][static_cast<std::size_t>(1 + j - params.n)];
}

double TruncatedSolution::mass(std::size_t i) const {
  CompensatedSum m;
  m.add(rows[i][0]);
  for (std::int64_t j = params.n; j <= J; ++j) {
    m.add(static_cast<double>(j) *
          rows[i][static_cast<std::size_t>(1 + j - params.n)]);
  }
  return m.value();
}

double TruncatedSolution::mass_residual(std::size_t i) const {
  return mass(i) - initial_mass - params.alpha * times[i] + flux_integral[i];
}

TruncatedSolution solve_full_truncated(const ModelParams& params,
                                       const InitialData& data, std::int64_t J,
                                       double t_end, double rel_tol,
                                       std::vector<double> t_out) {
  if (J < params.n) {
    throw ValidationError("truncation size J must be >= n");
  }
  if (J > 200000) {
    throw ValidationError("truncated solve is meant for validation scale");
  }
  if (!(t_end > 0.0) || !std::isfinite(t_end)) {
    throw ValidationError("t_end must be positive and finite");
  }
  if (!(rel_tol > 1e-14 && rel_tol < 1e-3)) {
    throw ValidationError("rel_tol must lie in (1e-14, 1e-3)");
  }
  if (data.n() != params.n) {
    throw ValidationError("initial data and parameters disagree on n");
  }
  for (double tv : t_out) {
    if (!(tv >= 0.0) || !(tv <= t_end) || !std::isfinite(tv)) {
      throw ValidationError("output times must lie in [0, t_end]");
    }
  }
  std::sort(t_out.begin(), t_out.end());
  t_out.erase(std::unique(t_out.begin(), t_out.end()), t_out.end());

  const int n = params.n;
  const double alpha = params.alpha;
  const std::size_t K = static_cast<std::size_t>(J - n + 1);
  // State layout: [c_1, c_n..c_J, tau, flux].
  using State = std::vector<double>;
  State u(1 + K + 2, 0.0);
  u[0] = data.c1_0();
  for (std::size_t i = 0; i < K; ++i) {
    u[1 + i] = data.c0(n + static_cast<std::int64_t>(i));
  }

  TruncatedSolution out;
  out.params = params;
  out.J = J;
  {
    CompensatedSum m;
    m.add(u[0]);
    for (std::size_t i = 0; i < K; ++i) {
      m.add(static_cast<double>(n + static_cast<std::int64_t>(i)) * u[1 + i]);
    }
    out.initial_mass = m.value();
  }

  auto rhs = [n, alpha, K, J](const State& s, State& d, double) {
    const double x = s[0];
    double y = 0.0;
    for (std::size_t i = 0; i < K; ++i) y += s[1 + i];
    const double xn = std::pow(x, n);
    d[0] = alpha - n * xn - x * y;
    d[1] = xn - x * s[1];
    for (std::size_t i = 1; i < K; ++i) d[1 + i] = x * (s[i] - s[1 + i]);
    d[1 + K] = x;
    d[2 + K] = static_cast<double>(J + 1) * x * s[K];
  };

  auto record = [&](double tv) {
    out.times.push_back(tv);
    out.tau_values.push_back(u[1 + K]);
    out.flux_integral.push_back(u[2 + K]);
    out.rows.emplace_back(u.begin(), u.begin() + static_cast<std::ptrdiff_t>(1 + K));
  };
  auto clamp_positivity = [&](double where) {
    double scale = 0.0;
    for (std::size_t i = 0; i <= K; ++i) scale = std::max(scale, std::abs(u[i]));
    for (std::size_t i = 0; i <= K; ++i) {
      if (u[i] < 0.0) {
        if (-u[i] < 10.0 * rel_tol * scale) {
          u[i] = 0.0;
        } else {
          throw InstabilityError(
              "concentration went negative beyond tolerance at t = " +
              std::to_string(where));
        }
      }
    }
  };

  // The absolute tolerance floor is far below any concentration of
  // interest, so step control is effectively relative per component; deep
  // cascade components keep meaningful relative accuracy instead of being
  // silently absorbed into an absolute floor.
  auto ctrl = ode::make_controlled<ode::runge_kutta_cash_karp54<State>>(
      1e-60, rel_tol);
  double t = 0.0;
  double dt = 1e-6;
  long long budget = 20'000'000;
  auto budget_tick = [&]() {
    if (--budget < 0) {
      throw HorizonError("truncated solve exhausted its step budget at t = " +
                         std::to_string(t));
    }
  };

  const bool explicit_out = !t_out.empty();
  const double record_spacing = t_end / 4096.0;
  double last_recorded = -1.0;
  std::size_t next_out = 0;
  if (explicit_out) {
    while (next_out < t_out.size() && t_out[next_out] <= 0.0) {
      record(0.0);
      ++next_out;
    }
  } else {
    record(0.0);
    last_recorded = 0.0;
  }

  while (t < t_end) {
    budget_tick();
    const double target =
        explicit_out
            ? (next_out < t_out.size() ? t_out[next_out] : t_end)
            : t_end;
    dt = std::min(dt, std::max(target - t, 1e-300));
    if (ctrl.try_step(rhs, u, t, dt) == ode::success) {
      if (!std::isfinite(u[0])) {
        throw InstabilityError("truncated solve became non-finite at t = " +
                               std::to_string(t));
      }
      clamp_positivity(t);
      if (explicit_out) {
        while (next_out < t_out.size() && t >= t_out[next_out] * (1.0 - 1e-14)) {
          record(t_out[next_out]);
          ++next_out;
        }
      } else if (t - last_recorded >= record_spacing || t >= t_end) {
        record(t);
        last_recorded = t;
      }
    }
  }
  if (!explicit_out && out.times.back() < t) {
    record(t);
  }
  return out;
}

double TriangularSolution::at(std::size_t g, std::int64_t j) const {
  if (j < n || j > J) {
    throw ValidationError("cluster size " + std::to_string(j) +
                          " not tracked by this cascade solve");
  }
  return rows[g][static_cast<std::size_t>(j - n)];
}

TriangularSolution solve_triangular_tau_fn(
    const ModelParams& params, const InitialData& data,
    const std::function<double(double)>& c1_of_tau, std::int64_t J,
    std::vector<double> tau_grid, double rel_tol) {
  if (J < params.n) {
    throw ValidationError("cascade size J must be >= n");
  }
  if (tau_grid.empty()) {
    throw ValidationError("tau_grid must be nonempty");
  }
  for (std::size_t g = 0; g < tau_grid.size(); ++g) {
    if (!(tau_grid[g] >= 0.0) || !std::isfinite(tau_grid[g])) {
      throw ValidationError("tau_grid entries must be finite and >= 0");
    }
    if (g > 0 && !(tau_grid[g] > tau_grid[g - 1])) {
      throw ValidationError("tau_grid must be strictly increasing");
    }
  }
  if (!(rel_tol > 1e-14 && rel_tol < 1e-3)) {
    throw ValidationError("rel_tol must lie in (1e-14, 1e-3)");
  }
  if (data.n() != params.n) {
    throw ValidationError("initial data and parameters disagree on n");
  }

  const int n = params.n;
  const std::size_t K = static_cast<std::size_t>(J - n + 1);
  using State = std::vector<double>;
  State u(K);
  for (std::size_t i = 0; i < K; ++i) {
    u[i] = data.c0(n + static_cast<std::int64_t>(i));
  }

  TriangularSolution out;
  out.n = n;
  out.J = J;
  out.tau_grid = tau_grid;

  auto rhs = [n, K, &c1_of_tau](const State& s, State& d, double tau) {
    const double c1 = c1_of_tau(tau);
    d[0] = std::pow(c1, n - 1) - s[0];
    for (std::size_t i = 1; i < K; ++i) d[i] = s[i - 1] - s[i];
  };
  auto record = [&]() {
    std::vector<double> row = u;
    double scale = 0.0;
    for (double v : row) scale = std::max(scale, std::abs(v));
    for (double& v : row) {
      if (v < 0.0 && -v < 10.0 * rel_tol * scale) v = 0.0;
    }
    out.rows.push_back(std::move(row));
  };

  auto ctrl = ode::make_controlled<ode::runge_kutta_cash_karp54<State>>(
      1e-60, rel_tol);
  double tau = 0.0;
  double dt = 1e-6;
  long long budget = 20'000'000;
  for (double target : tau_grid) {
    while (tau < target) {
      if (--budget < 0) {
        throw HorizonError("cascade solve exhausted its step budget at tau = " +
                           std::to_string(tau));
      }
      dt = std::min(dt, std::max(target - tau, 1e-300));
      if (ctrl.try_step(rhs, u, tau, dt) == ode::success) {
        for (double v : u) {
          if (!std::isfinite(v)) {
            throw InstabilityError("cascade solve became non-finite at tau = " +
                                   std::to_string(tau));
          }
        }
      }
    }
    record();
  }
  return out;
}

TriangularSolution solve_triangular_tau(const ModelParams& params,
                                        const InitialData& data,
                                        const MonomerTrajectory& traj,
                                        std::int64_t J,
                                        std::vector<double> tau_grid,
                                        double rel_tol) {
  if (!tau_grid.empty() && tau_grid.back() > traj.tau_max()) {
    throw RangeError("tau_grid extends beyond the trajectory horizon");
  }
  return solve_triangular_tau_fn(
      params, data, [&traj](double tau) { return traj.x_at_tau(tau); }, J,
      std::move(tau_grid), rel_tol);
}

}  // namespace smd
