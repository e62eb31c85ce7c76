#pragma once

#include <functional>

#include "smd/errors.hpp"

namespace smd {

// Tolerances for the adaptive quadrature and for the semi-infinite profile
// integrals built on top of it.
struct QuadratureSpec {
    double rel_tol = 1e-10;
    double abs_tol = 1e-15;
    int max_subdivisions = 400;

    void validate() const;
};

struct QuadResult {
    double value;
    double err_est;
};

// Adaptive Gauss-Kronrod 7/15 on a finite interval. Globally adaptive:
// the worst panel is bisected until sum(err) <= max(abs_tol, rel_tol*|value|)
// or the subdivision budget runs out (AccuracyError). The Kronrod rule is
// exact for polynomials of degree <= 22 on a single panel; nodes are interior,
// so f is never evaluated at a or b.
QuadResult quad_finite(const std::function<double(double)>& f, double a, double b,
                       const QuadratureSpec& spec = {});

} // namespace smd
