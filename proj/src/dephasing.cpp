#include "nmq/dephasing.hpp"

#include <algorithm>
#include <cmath>

#include "nmq/errors.hpp"
#include "nmq/quadrature.hpp"
#include "parallel_for.hpp"

namespace nmq {
namespace {

constexpr double kOmegaMinFactor = 1e-6;
constexpr double kTailBound = 1e-12;

double coth_stable(double x) {
  if (x < 1e-4) return 1.0 / x + x / 3.0;
  if (x > 20.0) return 1.0;
  return 1.0 / std::tanh(x);
}

// (1 - cos y)/y^2 without cancellation.
double one_minus_cos_over_sq(double y) {
  if (y == 0.0) return 0.5;
  const double s = std::sin(0.5 * y);
  return 2.0 * s * s / (y * y);
}

struct DephasingIntegrands {
  const SpectralDensityModel* model;
  double temperature;

  double thermal_weight(double w) const {
    if (temperature <= 0.0) return 1.0;
    return coth_stable(w / (2.0 * temperature));
  }
  // Integrand of -Gamma_p.
  double exponent(double w, double t) const {
    const double y = w * t;
    return spectral_eval(*model, w) * thermal_weight(w) * t * t *
           one_minus_cos_over_sq(y);
  }
  // Integrand of gamma_p.
  double rate(double w, double t) const {
    return 0.5 * spectral_eval(*model, w) * thermal_weight(w) *
           std::sin(w * t) / w;
  }
};

struct Support {
  double w_min = 0.0;        // analytic slice below this
  double w_max = 0.0;        // truncation point
  double s_exponent = 1.0;   // local power of J near w = 0
  double j_prefactor = 0.0;  // J(w) ~ j_prefactor * w^s_exponent near 0
};

Support analyze_support(const SpectralDensityModel& model) {
  Support sup{};
  if (const auto* ohm = std::get_if<OhmicDensity>(&model.shape)) {
    if (model.temperature > 0.0 && ohm->s <= 0.0) {
      throw ConfigError(
          "Ohmic exponent s = 0 with T > 0 gives a divergent dephasing integral");
    }
    sup.s_exponent = ohm->s;
    sup.j_prefactor = ohm->eta * std::pow(ohm->omega_c, 1.0 - ohm->s);
    sup.w_min = kOmegaMinFactor * ohm->omega_c;
    // Doubling search for the truncation point of the exponential tail.
    const double s = ohm->s;
    const double eta = ohm->eta;
    const double wc = ohm->omega_c;
    double w = std::max(45.0 * wc, 4.0 * std::max(0.0, s - 2.0) * wc);
    for (int iter = 0; iter < 200; ++iter) {
      const double cb = model.temperature > 0.0
                            ? coth_stable(w / (2.0 * model.temperature))
                            : 1.0;
      const double base = eta * std::pow(wc, 1.0 - s) * wc * std::exp(-w / wc);
      const double tail_exponent = 2.0 * cb * 2.0 * base * std::pow(w, s - 2.0);
      const double tail_rate = 0.5 * cb * 2.0 * base * std::pow(w, s - 1.0);
      if (std::max(tail_exponent, tail_rate) < kTailBound) break;
      w *= 1.5;
    }
    sup.w_max = w;
  } else if (const auto* tab = std::get_if<TabulatedDensity>(&model.shape)) {
    sup.w_max = std::max(tab->frequency.back(), 0.0);  // J = 0 beyond the grid
    sup.w_min = 0.0;
    double j_at_zero = 0.0;
    if (tab->frequency.front() <= 0.0 && tab->frequency.back() >= 0.0) {
      j_at_zero = spectral_eval(model, 0.0);
    }
    if (j_at_zero > 0.0 && model.temperature > 0.0) {
      throw ConfigError(
          "tabulated density with J(0) > 0 has a divergent finite-temperature "
          "dephasing integral");
    }
    if (!(sup.w_max > 0.0)) {
      throw ConfigError("tabulated density has no support at omega > 0");
    }
  } else {
    throw ConfigError(
        "dephasing requires an Ohmic-family or tabulated spectral density");
  }
  return sup;
}

// Leading-order analytic value of the [0, w_min] slice, where the numeric
// panels would have to resolve the (integrable) coth singularity.
void analytic_slice(const Support& sup, double temperature, double t,
                    double& exponent_piece, double& rate_piece) {
  exponent_piece = 0.0;
  rate_piece = 0.0;
  if (sup.w_min <= 0.0) return;
  const double s = sup.s_exponent;
  const double c = sup.j_prefactor;
  const double wm = sup.w_min;
  if (temperature <= 0.0) {
    // integrand ~ c w^s t^2/2  and  c w^s t / 2
    exponent_piece = 0.5 * c * t * t * std::pow(wm, s + 1.0) / (s + 1.0);
    rate_piece = 0.5 * c * t * std::pow(wm, s + 1.0) / (s + 1.0);
  } else {
    // coth(w/2T) ~ 2T/w + w/(6T); s > 0 guaranteed by analyze_support.
    const double lead = 2.0 * temperature * std::pow(wm, s) / s;
    const double corr = std::pow(wm, s + 2.0) / (6.0 * temperature * (s + 2.0));
    exponent_piece = 0.5 * c * t * t * (lead + corr);
    rate_piece = 0.5 * c * t * (lead + corr);
  }
}

QuadratureOptions options_for(double t, const Support& sup, double rel_tol,
                              double abs_scale) {
  QuadratureOptions opts;
  opts.rel_tol = rel_tol;
  opts.abs_tol = 1e-14 * std::max(1.0, abs_scale);
  const double oscillations = std::abs(t) * (sup.w_max - sup.w_min) / M_PI;
  opts.initial_panels = std::clamp<std::size_t>(
      static_cast<std::size_t>(oscillations) + 8, 8, 16384);
  return opts;
}

}  // namespace

double DephasingTrace::big_gamma_p_at(double t) const {
  if (t <= 0.0) return 0.0;
  const Support sup = analyze_support(model);
  DephasingIntegrands f{&model, model.temperature};
  double slice_e, slice_r;
  analytic_slice(sup, model.temperature, t, slice_e, slice_r);
  const double numeric = integrate_adaptive(
      [&](double w) { return f.exponent(w, t); }, sup.w_min, sup.w_max,
      options_for(t, sup, quad_rel_tol, 1.0));
  return -(slice_e + numeric);
}

double DephasingTrace::gamma_p_at(double t) const {
  if (t == 0.0) return 0.0;
  const Support sup = analyze_support(model);
  DephasingIntegrands f{&model, model.temperature};
  double slice_e, slice_r;
  analytic_slice(sup, model.temperature, t, slice_e, slice_r);
  const double numeric =
      integrate_adaptive([&](double w) { return f.rate(w, t); }, sup.w_min,
                         sup.w_max, options_for(t, sup, quad_rel_tol, 1.0));
  return slice_r + numeric;
}

DephasingTrace dephasing_trace(const SpectralDensityModel& model,
                               const TimeGrid& grid, double rel_tol,
                               std::size_t jobs) {
  model.validate();
  analyze_support(model);  // rejects unsupported variants up front

  DephasingTrace trace;
  trace.grid = grid;
  trace.model = model;
  trace.quad_rel_tol = rel_tol;
  trace.big_gamma_p.assign(grid.count, 0.0);
  trace.gamma_p.assign(grid.count, 0.0);

  detail::parallel_for(grid.count, jobs, [&](std::size_t k) {
    const double t = grid.time(k);
    if (t <= 0.0) return;
    trace.big_gamma_p[k] = trace.big_gamma_p_at(t);
    trace.gamma_p[k] = trace.gamma_p_at(t);
  });
  return trace;
}

XState4 dephasing_joint_state(const DephasingTrace& trace, std::size_t k) {
  if (k >= trace.grid.count) {
    throw DomainError("dephasing_joint_state: grid index out of range");
  }
  XState4 state;
  state.p11 = 0.0;
  state.p10 = 0.5;
  state.p01 = 0.5;
  state.p00 = 0.0;
  state.kappa = complexd{0.5 * std::exp(trace.big_gamma_p[k]), 0.0};
  return state;
}

PropagationResult dephasing_propagate_master(const DephasingTrace& trace,
                                             const DensityMatrix2& rho0) {
  rho0.require_valid(kPropagatedTol);
  const std::size_t n = trace.grid.count;
  const double dt = trace.grid.dt;

  PropagationResult out;
  out.states.reserve(n);
  out.states.push_back(rho0);

  for (std::size_t k = 0; k + 1 < n; ++k) {
    const double g0 = trace.gamma_p[k];
    const double g1 = trace.gamma_p[k + 1];
    const double gh = 0.5 * (g0 + g1);

    const DensityMatrix2& s = out.states.back();
    const complexd eg = s.rho_eg;
    // Only the coherence moves: deg/dt = -2 gamma_p(t) eg.
    const complexd k1 = -2.0 * g0 * eg;
    const complexd k2 = -2.0 * gh * (eg + 0.5 * dt * k1);
    const complexd k3 = -2.0 * gh * (eg + 0.5 * dt * k2);
    const complexd k4 = -2.0 * g1 * (eg + dt * k3);

    DensityMatrix2 next = s;
    next.rho_eg = eg + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.states.push_back(next);
  }
  return out;
}

}  // namespace nmq
