#include "doctest.h"

#include <cmath>
#include <limits>

#include "smd/errors.hpp"
#include "smd/model.hpp"

using namespace smd;

namespace {
bool rel_close(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max(std::abs(a), std::abs(b));
}
}  // namespace

TEST_CASE("model parameters reject invalid critical size and deposition rate") {
    CHECK_THROWS_AS(ModelParams(1, 1.0), ValidationError);
    CHECK_THROWS_AS(ModelParams(0, 1.0), ValidationError);
    CHECK_THROWS_AS(ModelParams(-3, 1.0), ValidationError);
    CHECK_THROWS_AS(ModelParams(2, 0.0), ValidationError);
    CHECK_THROWS_AS(ModelParams(2, -1.0), ValidationError);
    CHECK_THROWS_AS(ModelParams(2, std::numeric_limits<double>::quiet_NaN()),
                    ValidationError);
    CHECK_THROWS_AS(ModelParams(2, std::numeric_limits<double>::infinity()),
                    ValidationError);
    const ModelParams ok(2, 1.0);
    CHECK(ok.n == 2);
    CHECK(ok.alpha == 1.0);
}

TEST_CASE("initial data validates its fields") {
    const ModelParams p(2, 1.0);
    CHECK_THROWS_AS(InitialData(p, MonomerOnlyTail{}, -0.1), ValidationError);
    CHECK_THROWS_AS(InitialData(p, PowerLawTail{0.0, 2.0, 10}), ValidationError);
    CHECK_THROWS_AS(InitialData(p, PowerLawTail{-1.0, 2.0, 10}), ValidationError);
    CHECK_THROWS_AS(InitialData(p, PowerLawTail{1.0, 0.0, 10}), ValidationError);
    CHECK_THROWS_AS(InitialData(p, PowerLawTail{1.0, 2.0, 1}), ValidationError);
    CHECK_THROWS_AS(InitialData(p, ExplicitTail{{{1, 0.5}}}), ValidationError);
    CHECK_THROWS_AS(InitialData(p, ExplicitTail{{{3, -0.5}}}), ValidationError);
    CHECK_THROWS_AS(InitialData(p, ExplicitTail{{{3, 0.5}, {3, 0.2}}}),
                    ValidationError);
    CHECK_NOTHROW(InitialData(p, ExplicitTail{{{3, 0.5}}}, 0.25));
}

TEST_CASE("monomer-only data has an empty cluster tail") {
    const ModelParams p(3, 1.0);
    const InitialData d(p, MonomerOnlyTail{});
    CHECK(d.is_monomer_only());
    CHECK(d.c0(3) == 0.0);
    CHECK(d.c0(1000) == 0.0);
    CHECK(d.support_max() == 2);
    CHECK(nu0(d) == 0.0);
    CHECK_THROWS_AS(d.c0(2), DomainError);
}

TEST_CASE("power-law data evaluates rho j^-mu up to the cutoff") {
    const ModelParams p(2, 1.0);
    const InitialData d = make_power_law(1.0, 1.0, 10, p);
    CHECK(d.is_power_law());
    CHECK(d.c0(2) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(d.c0(4) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(d.c0(10) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(d.c0(11) == 0.0);
    CHECK(d.support_max() == 10);
    CHECK(d.c1_0() == 0.0);
}

TEST_CASE("power-law cutoff at the critical size leaves a single entry") {
    const ModelParams p(3, 1.0);
    const InitialData d = make_power_law(1.0, 2.0, 3, p);
    CHECK(d.c0(3) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
    CHECK(d.c0(4) == 0.0);
    CHECK(nu0(d) == doctest::Approx(1.0 / 9.0).epsilon(1e-15));
}

TEST_CASE("explicit data is sparse, order-insensitive, and bounded by its largest entry") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, ExplicitTail{{{5, 0.25}, {3, 0.5}}});
    CHECK(d.c0(3) == 0.5);
    CHECK(d.c0(4) == 0.0);
    CHECK(d.c0(5) == 0.25);
    CHECK(d.c0(6) == 0.0);
    CHECK(d.support_max() == 5);

    const InitialData empty(p, ExplicitTail{});
    CHECK(empty.support_max() == 1);
    CHECK(nu0(empty) == 0.0);
}

TEST_CASE("initial monomer value is kept alongside the tail") {
    const ModelParams p(2, 1.0);
    const InitialData d(p, MonomerOnlyTail{}, 0.7);
    CHECK(d.c1_0() == 0.7);
}

TEST_CASE("cluster count of explicit data is the plain sum and is additive") {
    const ModelParams p(2, 1.0);
    CHECK(nu0(InitialData(p, ExplicitTail{{{2, 1.0}}})) == 1.0);

    const InitialData both(p, ExplicitTail{{{2, 0.3}, {7, 0.2}}});
    const InitialData first(p, ExplicitTail{{{2, 0.3}}});
    const InitialData second(p, ExplicitTail{{{7, 0.2}}});
    CHECK(nu0(both) == nu0(first) + nu0(second));
}

TEST_CASE("power-law cluster counts match independently computed partial sums") {
    // Reference values computed with an independent arbitrary-precision
    // summation (40 significant digits), rounded to double.
    const ModelParams p2(2, 1.0);
    CHECK(rel_close(nu0(make_power_law(1.0, 2.0, 100, p2)),
                    0.634983900184893, 1e-13));
    CHECK(rel_close(nu0(make_power_law(1.0, 2.0, 10000, p2)),
                    0.64483407184806, 1e-13));
    CHECK(rel_close(nu0(make_power_law(1.0, 0.75, 16384, p2)),
                    40.8138938733426, 1e-13));
    CHECK(rel_close(nu0(make_power_law(1.0, 1.0, 16384, p2)),
                    9.28130671000845, 1e-13));

    const ModelParams p3(3, 1.0);
    CHECK(rel_close(nu0(make_power_law(0.5, 1.5, 10000, p3)),
                    0.619411229039857, 1e-13));
}

TEST_CASE("power-law cluster count approaches its infinite-tail limit as the cutoff grows") {
    // For mu = 1.5, n = 3 the infinite sum is 0.5*(zeta(3/2) - 1 - 2^{-3/2})
    // = 0.629410979046107 (independent oracle). The truncation gap scales
    // like rho*2/sqrt(K): about 1.6e-2 relative at K = 1e4 and 1.6e-3 at
    // K = 1e6.
    const double limit = 0.629410979046107;
    const ModelParams p3(3, 1.0);
    const double at_1e4 = nu0(make_power_law(0.5, 1.5, 10000, p3));
    const double at_1e6 = nu0(make_power_law(0.5, 1.5, 1000000, p3));
    CHECK(std::abs(at_1e4 - limit) / limit <= 2e-2);
    CHECK(std::abs(at_1e6 - limit) / limit <= 2e-3);
    CHECK(std::abs(at_1e6 - limit) < std::abs(at_1e4 - limit));
    CHECK(rel_close(at_1e6, 0.628410979296107, 1e-12));
}

TEST_CASE("power-law cluster count equals the partial zeta sum to near machine precision") {
    const ModelParams p(2, 1.0);
    const InitialData d = make_power_law(1.0, 2.0, 10000, p);
    long double ref = 0.0L;
    for (std::int64_t k = 10000; k >= 2; --k)
        ref += 1.0L / (static_cast<long double>(k) * static_cast<long double>(k));
    CHECK(rel_close(nu0(d), static_cast<double>(ref), 1e-14));
}
