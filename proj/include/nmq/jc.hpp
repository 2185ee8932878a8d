#pragma once

#include <cstdint>
#include <vector>

#include "nmq/spectral.hpp"
#include "nmq/states.hpp"
#include "nmq/time_grid.hpp"

namespace nmq {

// Default floor on |G| below which rates are flagged divergent.
inline constexpr double kDefaultGFloor = 1e-8;
// Rates are additionally flagged where |G| < kRateResolutionFactor*dt*|dG/dt|,
// i.e. within a few steps of a zero of G, where no fixed grid can resolve
// Gdot/G or its integral.
inline constexpr double kRateResolutionFactor = 16.0;
// Magnitude stored for flagged rate samples (sign kept from the data).
inline constexpr double kDivergentRateCap = 1e12;

// Sampled decoherence amplitude G(t) of the damped Jaynes-Cummings model,
// with the derived decay rate gamma(t), its integral Gamma(t), and the Lamb
// shift S(t) once derive_rates has run. big_gamma accumulates the trapezoid
// of gamma over non-divergent panels only; across a flagged window it is
// frozen, so downstream integrals of gamma remain honest lower bounds.
struct GTrace {
  TimeGrid grid;
  std::vector<complexd> g;
  std::vector<double> gamma;
  std::vector<double> big_gamma;
  std::vector<double> lamb_shift;
  std::vector<std::uint8_t> divergent;
  double g_floor = kDefaultGFloor;
  bool has_rates = false;

  std::size_t first_divergent() const;  // == grid.count when no flags
  bool any_divergent() const;
  double abs_g(std::size_t k) const;
  // Linear interpolation of |G| / big_gamma at an arbitrary grid time.
  double abs_g_at(double t) const;
  double big_gamma_at(double t) const;
};

// Solves dG/dt = -int_0^t f(t-t1) G(t1) dt1, G(0) = 1, by product-trapezoidal
// quadrature in the memory integral with the trapezoidal corrector solved
// exactly per step (the dependence on the new sample is linear). Global error
// O(dt^2). Throws PropagationError if the kernel returns a non-finite value.
GTrace solve_g(const CorrelationKernel& kernel, const TimeGrid& grid);

// Adds gamma = -2 Re(Gdot/G), S = -2 Im(Gdot/G) (centered differences,
// one-sided at the ends), Gamma = cumulative trapezoid of gamma, and the
// divergence flags. Flagged samples store +-kDivergentRateCap.
GTrace derive_rates(GTrace trace, double g_floor = kDefaultGFloor);

// Joint system-ancilla state at grid index k for the evolution that starts
// from (|10> + |01>)/sqrt(2): c1 = G/sqrt(2), c2 = 1/sqrt(2).
XState4 jc_joint_state(const GTrace& trace, std::size_t k);

struct PropagationResult {
  std::vector<DensityMatrix2> states;  // one per grid index until truncation
  bool truncated = false;
  std::size_t truncated_at = 0;  // first index not covered when truncated
};

// Classical RK4 on drho/dt = -i S(t)/2 [sigma+sigma-, rho]
//                            + gamma(t)(sigma- rho sigma+ - {sigma+sigma-, rho}/2)
// with rates interpolated linearly at half-steps. Halts at the first
// divergent flag, returning the partial trajectory with truncated = true.
PropagationResult jc_propagate_master(const GTrace& trace,
                                      const DensityMatrix2& rho0);

}  // namespace nmq
