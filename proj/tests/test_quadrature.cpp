#include "doctest.h"

#include <cmath>

#include "smd/errors.hpp"
#include "smd/quadrature.hpp"

using namespace smd;

TEST_CASE("quadrature spec validates its fields") {
    CHECK_NOTHROW(QuadratureSpec{}.validate());
    QuadratureSpec bad;
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = {};
    bad.rel_tol = 1.5;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = {};
    bad.abs_tol = -1e-3;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
    bad = {};
    bad.max_subdivisions = 0;
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("linear integrand integrates exactly") {
    const auto r = quad_finite([](double x) { return x; }, 0.0, 1.0);
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.err_est <= 1e-14);
}

TEST_CASE("polynomials up to the panel degree integrate to rounding error") {
    // A 15-point Kronrod panel is exact for polynomials of degree <= 22;
    // compare against the antiderivative b^{k+1}/(k+1) on [0, 2].
    for (int k : {5, 13, 22}) {
        const auto r = quad_finite([k](double x) { return std::pow(x, k); },
                                   0.0, 2.0);
        const double exact = std::pow(2.0, k + 1) / (k + 1);
        CHECK(std::abs(r.value - exact) <= 1e-12 * exact);
    }
}

TEST_CASE("exponential integrand meets the requested tolerance") {
    const auto r = quad_finite([](double x) { return std::exp(x); }, 0.0, 1.0);
    const double exact = std::exp(1.0) - 1.0;  // 1.718281828459045...
    CHECK(std::abs(r.value - exact) <= 1e-12 * exact);
    CHECK(r.err_est <= std::max(1e-15, 1e-10 * std::abs(r.value)));
}

TEST_CASE("adaptive subdivision resolves a sharp interior peak") {
    // Normalized Gaussian of width 1e-3 centered mid-interval: nearly all
    // mass is inside [0,1], so the integral is 1 up to a 1e-15-scale tail.
    const double sigma = 1e-3;
    const double inv_norm = 1.0 / (sigma * std::sqrt(2.0 * std::acos(-1.0)));
    auto peaked = [=](double x) {
        const double z = (x - 0.5) / sigma;
        return inv_norm * std::exp(-0.5 * z * z);
    };
    const auto r = quad_finite(peaked, 0.0, 1.0);
    CHECK(std::abs(r.value - 1.0) <= 1e-8);
}

TEST_CASE("exhausting the subdivision budget reports a failure") {
    // The peak sits on the panel's center node, so it is seen immediately,
    // but three subdivisions are far too few to resolve it.
    const double sigma = 1e-3;
    auto peaked = [=](double x) {
        const double z = (x - 0.5) / sigma;
        return std::exp(-0.5 * z * z);
    };
    QuadratureSpec tiny;
    tiny.max_subdivisions = 3;
    CHECK_THROWS_AS(quad_finite(peaked, 0.0, 1.0, tiny), AccuracyError);
}

TEST_CASE("non-finite interval endpoints are rejected") {
    const auto f = [](double x) { return x; };
    CHECK_THROWS_AS(quad_finite(f, 0.0, std::numeric_limits<double>::infinity()),
                    ValidationError);
    CHECK_THROWS_AS(
        quad_finite(f, std::numeric_limits<double>::quiet_NaN(), 1.0),
        ValidationError);
}

TEST_CASE("degenerate interval integrates to zero") {
    const auto r = quad_finite([](double x) { return std::exp(x); }, 2.0, 2.0);
    CHECK(r.value == 0.0);
}
