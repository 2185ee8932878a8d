#include "nmq/jc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nmq/errors.hpp"

namespace nmq {
namespace {

double lerp_samples(const std::vector<double>& v, const TimeGrid& grid,
                    double t) {
  if (t <= 0.0) return v.front();
  if (t >= grid.t_max) return v.back();
  const double x = t / grid.dt;
  const auto k = std::min(static_cast<std::size_t>(x), grid.count - 2);
  const double w = x - static_cast<double>(k);
  return v[k] + w * (v[k + 1] - v[k]);
}

}  // namespace

std::size_t GTrace::first_divergent() const {
  for (std::size_t k = 0; k < divergent.size(); ++k) {
    if (divergent[k]) return k;
  }
  return grid.count;
}

bool GTrace::any_divergent() const { return first_divergent() < grid.count; }

double GTrace::abs_g(std::size_t k) const { return std::abs(g[k]); }

double GTrace::abs_g_at(double t) const {
  if (t <= 0.0) return std::abs(g.front());
  if (t >= grid.t_max) return std::abs(g.back());
  const double x = t / grid.dt;
  const auto k = std::min(static_cast<std::size_t>(x), grid.count - 2);
  const double w = x - static_cast<double>(k);
  return std::abs(g[k]) + w * (std::abs(g[k + 1]) - std::abs(g[k]));
}

double GTrace::big_gamma_at(double t) const {
  return lerp_samples(big_gamma, grid, t);
}

GTrace solve_g(const CorrelationKernel& kernel, const TimeGrid& grid) {
  const std::size_t n = grid.count;
  const double dt = grid.dt;

  std::vector<complexd> f(n);
  for (std::size_t j = 0; j < n; ++j) {
    f[j] = kernel(dt * static_cast<double>(j));
    if (!std::isfinite(f[j].real()) || !std::isfinite(f[j].imag())) {
      throw PropagationError(
          "correlation kernel is non-finite at tau = " +
              std::to_string(dt * static_cast<double>(j)),
          dt * static_cast<double>(j));
    }
  }

  GTrace trace;
  trace.grid = grid;
  trace.g.assign(n, complexd{0.0, 0.0});
  trace.g[0] = complexd{1.0, 0.0};

  // Memory integral I_k = int_0^{t_k} f(t_k - s) G(s) ds by trapezoid in s.
  // Step k -> k+1 with the trapezoidal rule in t; the new sample enters the
  // integral linearly, so the corrector is solved in closed form.
  complexd integral_k{0.0, 0.0};
  const complexd denom = 1.0 + 0.25 * dt * dt * f[0];
  for (std::size_t k = 0; k + 1 < n; ++k) {
    complexd partial = 0.5 * f[k + 1];  // G(0) = 1 end weight
    for (std::size_t j = 1; j <= k; ++j) {
      partial += f[k + 1 - j] * trace.g[j];
    }
    partial *= dt;
    trace.g[k + 1] = (trace.g[k] - 0.5 * dt * (integral_k + partial)) / denom;
    integral_k = partial + 0.5 * dt * f[0] * trace.g[k + 1];
  }
  return trace;
}

GTrace derive_rates(GTrace trace, double g_floor) {
  const std::size_t n = trace.grid.count;
  const double dt = trace.grid.dt;
  trace.g_floor = g_floor;
  trace.gamma.assign(n, 0.0);
  trace.lamb_shift.assign(n, 0.0);
  trace.big_gamma.assign(n, 0.0);
  trace.divergent.assign(n, 0);

  std::vector<complexd> gdot(n);
  if (n >= 3) {
    gdot[0] = (-3.0 * trace.g[0] + 4.0 * trace.g[1] - trace.g[2]) / (2.0 * dt);
    gdot[n - 1] = (3.0 * trace.g[n - 1] - 4.0 * trace.g[n - 2] + trace.g[n - 3]) /
                  (2.0 * dt);
    for (std::size_t k = 1; k + 1 < n; ++k) {
      gdot[k] = (trace.g[k + 1] - trace.g[k - 1]) / (2.0 * dt);
    }
  } else {
    gdot[0] = gdot[1] = (trace.g[1] - trace.g[0]) / dt;
  }

  for (std::size_t k = 0; k < n; ++k) {
    const double mag = std::abs(trace.g[k]);
    const double resolution_floor =
        kRateResolutionFactor * dt * std::abs(gdot[k]);
    const bool flagged = mag <= std::max(g_floor, resolution_floor);

    double raw_gamma = 0.0;
    double raw_shift = 0.0;
    if (mag > 0.0) {
      const complexd ratio = gdot[k] / trace.g[k];
      raw_gamma = -2.0 * ratio.real();
      raw_shift = -2.0 * ratio.imag();
    }
    if (flagged) {
      trace.divergent[k] = 1;
      const double sg = raw_gamma >= 0.0 ? 1.0 : -1.0;
      const double ss = raw_shift >= 0.0 ? 1.0 : -1.0;
      trace.gamma[k] = sg * kDivergentRateCap;
      trace.lamb_shift[k] = ss * kDivergentRateCap;
    } else {
      trace.gamma[k] = raw_gamma;
      trace.lamb_shift[k] = raw_shift;
    }
  }

  // Gamma by cumulative trapezoid; panels touching a flagged sample
  // contribute nothing (the integral is frozen across the unresolvable
  // window, keeping Gamma a lower envelope of the true integral).
  for (std::size_t k = 0; k + 1 < n; ++k) {
    double increment = 0.0;
    if (!trace.divergent[k] && !trace.divergent[k + 1]) {
      increment = 0.5 * dt * (trace.gamma[k] + trace.gamma[k + 1]);
    }
    trace.big_gamma[k + 1] = trace.big_gamma[k] + increment;
  }

  trace.has_rates = true;
  return trace;
}

XState4 jc_joint_state(const GTrace& trace, std::size_t k) {
  if (k >= trace.grid.count) {
    throw DomainError("jc_joint_state: grid index out of range");
  }
  const double g2 = std::norm(trace.g[k]);
  XState4 state;
  state.p11 = 0.0;
  state.p10 = 0.5 * g2;
  state.p01 = 0.5;
  state.p00 = 0.5 * (1.0 - g2);
  state.kappa = 0.5 * trace.g[k];
  return state;
}

PropagationResult jc_propagate_master(const GTrace& trace,
                                      const DensityMatrix2& rho0) {
  if (!trace.has_rates) {
    throw PropagationError("jc_propagate_master needs a trace with rates", 0.0);
  }
  rho0.require_valid(kPropagatedTol);

  const std::size_t n = trace.grid.count;
  const double dt = trace.grid.dt;
  const std::size_t stop = trace.first_divergent();

  PropagationResult out;
  out.states.reserve(std::min(stop, n));
  out.states.push_back(rho0);
  if (stop < n) {
    out.truncated = true;
    out.truncated_at = stop;
  }

  // State components (ee, gg, eg); derivative under the time-local generator.
  struct Rhs {
    double gamma, shift;
    void operator()(double ee, double gg, complexd eg, double& dee,
                    double& dgg, complexd& deg) const {
      dee = -gamma * ee;
      dgg = gamma * ee;
      deg = -(complexd{0.0, 0.5 * shift} + 0.5 * gamma) * eg;
      (void)gg;
    }
  };

  for (std::size_t k = 0; k + 1 < std::min(stop, n); ++k) {
    const Rhs r0{trace.gamma[k], trace.lamb_shift[k]};
    const Rhs r1{trace.gamma[k + 1], trace.lamb_shift[k + 1]};
    const Rhs rh{0.5 * (r0.gamma + r1.gamma), 0.5 * (r0.shift + r1.shift)};

    const DensityMatrix2& s = out.states.back();
    const double ee = s.rho_ee, gg = s.rho_gg;
    const complexd eg = s.rho_eg;

    double k1e, k1g, k2e, k2g, k3e, k3g, k4e, k4g;
    complexd k1c, k2c, k3c, k4c;
    r0(ee, gg, eg, k1e, k1g, k1c);
    rh(ee + 0.5 * dt * k1e, gg + 0.5 * dt * k1g, eg + 0.5 * dt * k1c, k2e, k2g, k2c);
    rh(ee + 0.5 * dt * k2e, gg + 0.5 * dt * k2g, eg + 0.5 * dt * k2c, k3e, k3g, k3c);
    r1(ee + dt * k3e, gg + dt * k3g, eg + dt * k3c, k4e, k4g, k4c);

    DensityMatrix2 next;
    next.rho_ee = ee + dt / 6.0 * (k1e + 2.0 * k2e + 2.0 * k3e + k4e);
    next.rho_gg = gg + dt / 6.0 * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
    next.rho_eg = eg + dt / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
    out.states.push_back(next);
  }
  return out;
}

}  // namespace nmq
