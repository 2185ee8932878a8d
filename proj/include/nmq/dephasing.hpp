#pragma once

#include <vector>

#include "nmq/jc.hpp"
#include "nmq/spectral.hpp"
#include "nmq/states.hpp"
#include "nmq/time_grid.hpp"

namespace nmq {

// Sampled dephasing exponent Gamma_p(t) <= 0 and rate
// gamma_p(t) = -dGamma_p/dt / 2 of the pure-dephasing model. The generating
// model is kept so both functions can also be evaluated at off-grid times
// (interval endpoints) by the same quadrature that built the samples.
struct DephasingTrace {
  TimeGrid grid;
  std::vector<double> big_gamma_p;
  std::vector<double> gamma_p;
  SpectralDensityModel model;
  double quad_rel_tol = 1e-9;

  double big_gamma_p_at(double t) const;  // quadrature, not interpolation
  double gamma_p_at(double t) const;
};

// Gamma_p(t_k) = -int_0^inf J(w) coth(w/2T) (1 - cos w t)/w^2 dw and
// gamma_p(t_k) = int_0^inf J(w) coth(w/2T) sin(w t)/w dw / 2, by adaptive
// Gauss-Kronrod quadrature with an analytic slice below w = 1e-6 * wc and
// truncation where the exponential-cutoff tail bound falls under 1e-12.
// T = 0 replaces coth by 1. Requires an Ohmic-family or tabulated model;
// throws ConfigError for densities whose finite-temperature integral
// diverges (J(0) > 0 with T > 0).
DephasingTrace dephasing_trace(const SpectralDensityModel& model,
                               const TimeGrid& grid, double rel_tol = 1e-9,
                               std::size_t jobs = 0);

// Joint state of Eq.-(30) form at grid index k: populations 1/2 on |10>,
// |01> and inner coherence exp(Gamma_p)/2.
XState4 dephasing_joint_state(const DephasingTrace& trace, std::size_t k);

// RK4 on drho/dt = gamma_p(t) (sigma_z rho sigma_z - rho): populations stay
// put, the coherence relaxes by exp(Gamma_p(t)).
PropagationResult dephasing_propagate_master(const DephasingTrace& trace,
                                             const DensityMatrix2& rho0);

}  // namespace nmq
