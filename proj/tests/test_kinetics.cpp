#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "smd/errors.hpp"
#include "smd/kinetics.hpp"
#include "smd/model.hpp"

using namespace smd;

namespace {

bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}

struct OracleRow {
    double tau, t, x, y;
};

// Reference solutions of the monomer--bulk system computed with an
// independent implicit (Radau IIA) integrator at rtol 1e-11 / atol 1e-14.
const std::vector<OracleRow> kMonomerN2 = {
    {1.0, 1.989094304776e+00, 6.029408566274e-01, 5.635499552144e-01},
    {10.0, 2.936297072922e+01, 2.387848975916e-01, 3.722612849313e+00},
    {100.0, 9.167650469657e+02, 7.200308970798e-02, 1.374465622065e+01},
    {1e3, 2.963657778687e+04, 2.242675226205e-02, 4.454476165818e+01},
    {1e4, 9.419295284526e+05, 7.073965406438e-03, 1.413492805069e+02},
    {1e5, 2.981043705301e+07, 2.236185311347e-03, 4.471856576029e+02},
    {1e6, 9.427937688900e+08, 7.071113054762e-04, 1.414203099629e+03},
};

const std::vector<OracleRow> kMonomerN3 = {
    {1.0, 1.901192605305e+00, 6.446790666728e-01, 3.658997295526e-01},
    {10.0, 2.173029267533e+01, 3.625333530458e-01, 2.377685390804e+00},
    {100.0, 4.784434011290e+02, 1.535799043192e-01, 6.441052860591e+00},
    {1e3, 1.071007432236e+04, 6.963193939794e-02, 1.434670337481e+01},
    {1e4, 2.326805777064e+05, 3.220157078272e-02, 3.105127597536e+01},
    {1e5, 5.019671084742e+06, 1.493910729351e-02, 6.693773455832e+01},
    {1e6, 1.081657474220e+08, 6.933674042378e-03, 1.442235377488e+02},
};

const std::vector<OracleRow> kPowerLawN2 = {
    {1.0, 2.306439373867e+00, 4.935496024949e-01, 1.118069746436e+00},
    {10.0, 3.217646878379e+01, 2.271481624529e-01, 3.958807003461e+00},
    {100.0, 9.293461875777e+02, 7.163113852639e-02, 1.381751068447e+01},
    {1e3, 2.968027882177e+04, 2.241532973286e-02, 4.456750670598e+01},
    {1e4, 9.420713939118e+05, 7.073606365977e-03, 1.413564565166e+02},
    {1e5, 2.981088916220e+07, 2.236173967849e-03, 4.471879260978e+02},
    {1e6, 9.427952019881e+08, 7.071109468070e-04, 1.414203816958e+03},
};

void check_against_oracle(const MonomerTrajectory& traj,
                          const std::vector<OracleRow>& rows, double tol) {
    for (const auto& row : rows) {
        CAPTURE(row.tau);
        CHECK(rel_close(traj.x_at_tau(row.tau), row.x, tol));
        CHECK(rel_close(traj.y_at_tau(row.tau), row.y, tol));
        CHECK(rel_close(traj.t_at_tau(row.tau), row.t, tol));
    }
}

}  // namespace

TEST_CASE("monomer density starts linearly in physical time") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto traj = solve_monomer_bulk(p, d, 0.005);
    // x ~ alpha t and tau ~ alpha t^2/2 for small t.
    const double tau_small = 0.5 * 1e-4 * 1e-4;
    CHECK(rel_close(traj.t_at_tau(tau_small), 1e-4, 0.01));
    CHECK(rel_close(traj.x_at_tau(tau_small), 1e-4, 0.01));
}

TEST_CASE("monomer density rises toward its balance level then falls") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto traj = solve_monomer_bulk(p, d, 50.0);
    const double x_balance = std::pow(p.alpha / p.n, 1.0 / p.n);  // 0.70710...

    double x_max = 0.0;
    std::size_t peak = 0;
    const auto& nodes = traj.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].x > x_max) {
            x_max = nodes[i].x;
            peak = i;
        }
    }
    CHECK(x_max > 0.55);
    CHECK(x_max < x_balance);
    // single rise before the peak, single fall after it
    for (std::size_t i = 0; i + 1 <= peak; ++i) CHECK(nodes[i].x <= nodes[i + 1].x);
    for (std::size_t i = peak; i + 1 < nodes.size(); ++i)
        CHECK(nodes[i].x >= nodes[i + 1].x);
    CHECK(traj.x_at_tau(50.0) < 0.2);
}

TEST_CASE("cluster mass and rescaled clock increase monotonically") {
    const ModelParams p(3, 0.7);
    const InitialData d(p, MonomerOnlyTail{});
    const auto traj = solve_monomer_bulk(p, d, 200.0);
    const auto& nodes = traj.nodes();
    REQUIRE(nodes.size() > 10);
    for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
        CHECK(nodes[i].y <= nodes[i + 1].y);
        CHECK(nodes[i].tau < nodes[i + 1].tau);
        CHECK(nodes[i].t < nodes[i + 1].t);
        CHECK(nodes[i + 1].x > 0.0);
    }
    CHECK(traj.tau_max() >= 200.0);
}

TEST_CASE("monomer-bulk solution matches an independent stiff integrator, bare start") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto traj = solve_monomer_bulk(p, d, 1.0000001e6);
    check_against_oracle(traj, kMonomerN2, 1e-6);
}

TEST_CASE("monomer-bulk solution matches an independent stiff integrator, n = 3") {
    const ModelParams p(3, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto traj = solve_monomer_bulk(p, d, 1.0000001e6);
    check_against_oracle(traj, kMonomerN3, 1e-6);
}

TEST_CASE("monomer-bulk solution matches an independent stiff integrator, power-law start") {
    const ModelParams p(2, 1.0);
    const InitialData d = make_power_law(1.0, 2.0, 10000, p);
    const auto traj = solve_monomer_bulk(p, d, 1.0000001e6);
    CHECK(rel_close(traj.y0(), 0.64483407184806, 1e-12));
    CHECK(rel_close(traj.nu0(), 0.64483407184806, 1e-12));
    check_against_oracle(traj, kPowerLawN2, 1e-6);
}

TEST_CASE("interpolated monomer density hits both endpoints exactly") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{}, 0.3);
    const auto traj = solve_monomer_bulk(p, d, 20.0);
    CHECK(c1_tilde(traj, 0.0) == traj.nodes().front().x);
    CHECK(c1_tilde(traj, traj.tau_max()) == traj.nodes().back().x);
    CHECK(traj.c1_0() == 0.3);
    CHECK_THROWS_AS(c1_tilde(traj, traj.tau_max() * 1.01), RangeError);
    CHECK_THROWS_AS(c1_tilde(traj, -1e-9), RangeError);
}

TEST_CASE("interpolated monomer density approaches the predicted decay level") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto traj = solve_monomer_bulk(p, d, 1.00001e4);
    const double v = std::pow(p.n * 1e4 / p.alpha, 1.0 / p.n) * c1_tilde(traj, 1e4);
    CHECK(std::abs(v - 1.0) <= 0.05);
}

TEST_CASE("two-term decay formula evaluates its closed form") {
    const ModelParams p(2, 2.0);
    // (alpha/(n tau))^{1/2} (1 + 0.5 log(tau)/tau) at tau = 1e6:
    CHECK(rel_close(c1_asymptotic(p, 1e6), 1.000006907755279e-3, 1e-12));
    CHECK_THROWS_AS(c1_asymptotic(p, 50.0), DomainError);
    CHECK_NOTHROW(c1_asymptotic(p, 50.0, 10.0));
    // leading term dominates at very large tau
    CHECK(rel_close(c1_asymptotic(p, 1e12),
                    std::pow(p.alpha / (p.n * 1e12), 1.0 / p.n), 1e-5));
}

TEST_CASE("trajectory approaches the two-term decay formula as the clock grows") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto traj = solve_monomer_bulk(p, d, 1.00001e6);
    double prev_gap = 1.0;
    for (double tau : {1e4, 1e5, 1e6}) {
        const double gap =
            std::abs(c1_tilde(traj, tau) - c1_asymptotic(p, tau)) /
            c1_tilde(traj, tau);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap < 1e-4);
}

TEST_CASE("decay correction from the asymptotic source is the closed-form ratio") {
    const ModelParams p(2, 1.0);
    CHECK(rel_close(fn_correction(FnSource::asymptotic, p, 100.0),
                    0.0230258509299405, 1e-12));  // 0.5 log(100)/100
    const ModelParams p3(3, 2.0);
    CHECK(rel_close(fn_correction(FnSource::asymptotic, p3, 1e4),
                    2.0 * (1.0 - 1.0 / 3.0) * std::log(1e4) / 1e4, 1e-12));
}

TEST_CASE("decay correction from the trajectory shrinks and tracks the predicted ratio") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto traj = solve_monomer_bulk(p, d, 1.00001e6);

    const double f4 = fn_correction(FnSource::trajectory, p, 1e4, &traj);
    const double f5 = fn_correction(FnSource::trajectory, p, 1e5, &traj);
    const double f6 = fn_correction(FnSource::trajectory, p, 1e6, &traj);
    CHECK(std::abs(f6) < std::abs(f5));
    CHECK(std::abs(f5) < std::abs(f4));
    CHECK(std::abs(f6) <= 0.01);

    // ratio against the predicted leading term, frozen from the independent
    // stiff integrator: 0.911554 at tau = 1e5, increasing toward 1
    double prev = 0.0;
    for (double tau : {1e3, 1e4, 1e5, 1e6}) {
        const double ratio = fn_correction(FnSource::trajectory, p, tau, &traj) /
                             fn_correction(FnSource::asymptotic, p, tau);
        CHECK(ratio > prev);
        CHECK(ratio < 1.0);
        prev = ratio;
        if (tau == 1e5) CHECK(std::abs(ratio - 0.911554) <= 0.01);
    }
    CHECK_THROWS_AS(fn_correction(FnSource::trajectory, p, 10.0, nullptr),
                    ValidationError);
}

TEST_CASE("truncated solve fills cluster sizes in causal order from a bare start") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto sol = solve_full_truncated(p, d, 8, 1.0);
    REQUIRE(sol.rows.size() >= 2);
    // at t = 0 every cluster concentration vanishes
    for (std::int64_t j = 2; j <= 8; ++j) CHECK(sol.c(0, j) == 0.0);
    // at the final time the cascade is strictly ordered downward in j
    const std::size_t last = sol.rows.size() - 1;
    for (std::int64_t j = 2; j < 8; ++j)
        CHECK(sol.c(last, j) > sol.c(last, j + 1));
    for (std::int64_t j = 2; j <= 8; ++j) CHECK(sol.c(last, j) > 0.0);
}

TEST_CASE("truncated solve conserves mass up to the tracked boundary flux") {
    const ModelParams p(2, 1.0);
    SUBCASE("bare start") {
        const InitialData d(p, MonomerOnlyTail{});
        const auto sol = solve_full_truncated(p, d, 30, 20.0);
        for (std::size_t i = 0; i < sol.rows.size(); ++i) {
            const double scale = std::max(1.0, p.alpha * sol.times[i]);
            CHECK(std::abs(sol.mass_residual(i)) <= 1e-7 * scale);
        }
    }
    SUBCASE("seeded start with clusters beyond the truncation dropped") {
        const InitialData d = make_power_law(0.5, 1.5, 100, p, 0.2);
        const auto sol = solve_full_truncated(p, d, 10, 5.0);
        double expect = 0.2;
        for (std::int64_t j = 2; j <= 10; ++j)
            expect += j * 0.5 * std::pow(static_cast<double>(j), -1.5);
        CHECK(rel_close(sol.initial_mass, expect, 1e-12));
        const std::size_t last = sol.rows.size() - 1;
        CHECK(std::abs(sol.mass_residual(last)) <=
              1e-7 * std::max(1.0, p.alpha * sol.times[last]));
    }
}

TEST_CASE("truncated monomer agrees with the closed two-component solve while the boundary is empty") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto sol = solve_full_truncated(p, d, 60, 50.0, 1e-10);
    const auto traj = solve_monomer_bulk(p, d, sol.tau_values.back() * 1.000001);
    for (std::size_t i = 0; i < sol.rows.size(); ++i) {
        if (sol.c(i, 60) > 1e-12) break;  // boundary no longer negligible
        CHECK(rel_close(sol.c1(i), traj.x_at_tau(sol.tau_values[i]), 1e-6));
    }
    CHECK(sol.c(sol.rows.size() - 1, 60) < 1e-12);  // the window really was safe
}

TEST_CASE("truncated solve lands exactly on requested output times") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto sol = solve_full_truncated(p, d, 5, 3.0, 1e-8, {0.5, 1.5, 3.0});
    REQUIRE(sol.times.size() == 3);
    CHECK(sol.times[0] == 0.5);
    CHECK(sol.times[1] == 1.5);
    CHECK(sol.times[2] == 3.0);
}

TEST_CASE("truncated solve keeps concentrations nonnegative") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, ExplicitTail{{{2, 1.0}, {5, 0.1}}}, 0.4);
    const auto sol = solve_full_truncated(p, d, 12, 10.0);
    for (std::size_t i = 0; i < sol.rows.size(); ++i)
        for (double v : sol.rows[i]) CHECK(v >= 0.0);
}

TEST_CASE("truncated solve validates its arguments") {
    const ModelParams p(3, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    CHECK_THROWS_AS(solve_full_truncated(p, d, 2, 1.0), ValidationError);
    CHECK_THROWS_AS(solve_full_truncated(p, d, 10, -1.0), ValidationError);
    CHECK_THROWS_AS(solve_full_truncated(p, d, 10, 1.0, 0.5), ValidationError);
}

TEST_CASE("rescaled cascade with a constant driver matches variation of constants") {
    const ModelParams p(3, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const double kappa = 2.0;
    const auto c1 = [kappa](double) { return kappa; };
    const auto sol =
        solve_triangular_tau_fn(p, d, c1, 5, {0.25, 1.0, 3.0});
    const double k2 = kappa * kappa;  // kappa^{n-1}
    for (std::size_t g = 0; g < 3; ++g) {
        const double tau = sol.tau_grid[g];
        CHECK(rel_close(sol.at(g, 3), k2 * (1.0 - std::exp(-tau)), 1e-8));
        CHECK(rel_close(sol.at(g, 4),
                        k2 * (1.0 - std::exp(-tau) * (1.0 + tau)), 1e-8));
    }
}

TEST_CASE("rescaled cascade with no driver and no data stays identically zero") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto sol = solve_triangular_tau_fn(p, d, [](double) { return 0.0; },
                                             6, {0.5, 2.0});
    for (std::size_t g = 0; g < 2; ++g)
        for (std::int64_t j = 2; j <= 6; ++j) CHECK(sol.at(g, j) == 0.0);
}

TEST_CASE("rescaled cascade validates its grid and horizon") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto c1 = [](double) { return 1.0; };
    CHECK_THROWS_AS(solve_triangular_tau_fn(p, d, c1, 5, {}), ValidationError);
    CHECK_THROWS_AS(solve_triangular_tau_fn(p, d, c1, 5, {2.0, 1.0}),
                    ValidationError);
    CHECK_THROWS_AS(solve_triangular_tau_fn(p, d, c1, 5, {-1.0, 1.0}),
                    ValidationError);
    CHECK_THROWS_AS(solve_triangular_tau_fn(p, d, c1, 1, {1.0}),
                    ValidationError);

    const auto traj = solve_monomer_bulk(p, d, 5.0);
    CHECK_THROWS_AS(
        solve_triangular_tau(p, d, traj, 5, {1.0, traj.tau_max() * 2.0}),
        RangeError);
}

TEST_CASE("synthetic constant-driver trajectory exposes the prescribed clock") {
    const ModelParams p(2, 1.0);
    const double kappa = 0.5;
    const auto traj = MonomerTrajectory::synthetic_constant(p, kappa, 10.0);
    CHECK(traj.tau_max() >= 10.0);
    CHECK(traj.x_at_tau(0.0) == kappa);
    CHECK(rel_close(traj.x_at_tau(7.3), kappa, 1e-12));
    CHECK(rel_close(traj.t_at_tau(8.0), 8.0 / kappa, 1e-12));
}

TEST_CASE("trajectory construction rejects disordered nodes") {
    const ModelParams p(2, 1.0);
    std::vector<TrajectoryNode> nodes = {
        {0.0, 0.0, 0.1, 0.0, 1.0, 0.01},
        {1.0, 0.5, 0.2, 0.1, 0.5, 0.02},
        {0.5, 0.7, 0.3, 0.2, 0.5, 0.02},  // t goes backwards
    };
    CHECK_THROWS_AS(MonomerTrajectory(p, nodes, 0.0, 0.0), ValidationError);
}

TEST_CASE("solver rejects out-of-range targets and tolerances") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    CHECK_THROWS_AS(solve_monomer_bulk(p, d, 0.0), ValidationError);
    CHECK_THROWS_AS(solve_monomer_bulk(p, d, -2.0), ValidationError);
    CHECK_THROWS_AS(solve_monomer_bulk(p, d, 1.0, 0.5), ValidationError);
    CHECK_THROWS_AS(solve_monomer_bulk(p, d, 1.0, 1e-15), ValidationError);
}

TEST_CASE("trajectory exports a parseable table") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    const auto traj = solve_monomer_bulk(p, d, 1.0);
    std::ostringstream os;
    traj.write_csv(os);
    const std::string text = os.str();
    CHECK(text.rfind("t,tau,x,y", 0) == 0);
    const auto lines = std::count(text.begin(), text.end(), '\n');
    CHECK(static_cast<std::size_t>(lines) == traj.nodes().size() + 1);
}
