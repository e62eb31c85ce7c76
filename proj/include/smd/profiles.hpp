#pragma once

#include "smd/model.hpp"
#include "smd/quadrature.hpp"

namespace smd {

// First similarity profile, in the bulk scaling variable eta = j/tau:
//   phi1(eta) = (1 - eta)^(-(n-1)/n) on 0 < eta < 1, 0 for eta > 1.
// eta = 1 is the moving front; the profile is left undefined there.
double phi1(int n, double eta);

// Second similarity profile, in the front scaling variable xi = (j-tau)/sqrt(tau):
//   phi2(xi) = exp(-xi^2/2) * I(xi),  I(xi) = int_0^inf exp(-xi w^n - w^(2n)/2) dw.
// The integral is truncated at a cutoff where the integrand is certified below
// 1e-17 of its maximum, then evaluated with quad_finite.
double phi2(int n, double xi, const QuadratureSpec& spec = {});

// The integral factor I(xi) above, without the Gaussian prefactor. Exposed
// because the front-lemma residuals compare directly against it.
double phi2_integral(int n, double xi, const QuadratureSpec& spec = {});

// Front-scale normalization applied to a cluster density value c_val for
// cluster size j:
//   F = (sqrt(2 pi)/alpha) * (alpha/n)^(1/n) * tau^((n-1)/(2n)) * c_val.
// The prefactor does not depend on j; the argument is kept so call sites
// document which cluster the value belongs to, and so the normalization can
// be made size-dependent without touching callers.
double scaled_observable(const ModelParams& params, std::int64_t j, double tau,
                         double c_val);

} // namespace smd
