#include "nmq/spectral.hpp"

#include <algorithm>
#include <cmath>

#include "nmq/errors.hpp"

namespace nmq {
namespace {

// Oscillation threshold above which the tabulated kernel switches from
// per-panel Gauss-Legendre to the closed linear-times-exponential form.
constexpr double kOscillatorySwitch = 10.0;

// 4-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGl4Nodes[2] = {0.3399810435848563, 0.8611363115940526};
constexpr double kGl4Weights[2] = {0.6521451548625461, 0.34785484513745385};

double interp_tabulated(const TabulatedDensity& tab, double x) {
  const auto& f = tab.frequency;
  if (f.empty() || x < f.front() || x > f.back()) return 0.0;
  const auto it = std::upper_bound(f.begin(), f.end(), x);
  if (it == f.begin()) return tab.value.front();
  if (it == f.end()) return tab.value.back();
  const std::size_t i = static_cast<std::size_t>(it - f.begin());
  const double w = (x - f[i - 1]) / (f[i] - f[i - 1]);
  return tab.value[i - 1] + w * (tab.value[i] - tab.value[i - 1]);
}

// E0 = int_0^h e^{-i u tau} du, E1 = int_0^h u e^{-i u tau} du. Series for
// small |h*tau| where the closed forms lose digits to cancellation.
void panel_moments(double h, double tau, complexd& e0, complexd& e1) {
  const double phase = h * tau;
  if (std::abs(phase) < 0.5) {
    const complexd z{0.0, -phase};
    complexd term{1.0, 0.0};
    complexd s0 = term;          // sum z^n / (n+1)!
    complexd s1 = 0.5 * term;    // sum z^n / (n+2)! * (n+1) ... see below
    // s0 = sum_{n>=0} z^n/(n+1)!, s1 = sum_{n>=0} z^n (n+1)/(n+2)!
    complexd zn{1.0, 0.0};
    double fact = 1.0;
    for (int n = 1; n <= 14; ++n) {
      zn *= z;
      fact *= static_cast<double>(n + 1);
      s0 += zn / fact;
      s1 += zn * (static_cast<double>(n + 1) / (fact * static_cast<double>(n + 2)));
    }
    e0 = h * s0;
    e1 = h * h * s1;
  } else {
    const complexd itau{0.0, tau};
    const complexd eph = std::exp(complexd{0.0, -phase});
    e0 = (1.0 - eph) / itau;
    e1 = (e0 - h * eph) / itau;
  }
}

complexd tabulated_kernel(const TabulatedDensity& tab, double tau) {
  const auto& nu = tab.frequency;
  const auto& j = tab.value;
  if (nu.size() < 2) return complexd{0.0, 0.0};

  const double span = nu.back() - nu.front();
  complexd total{0.0, 0.0};
  if (std::abs(tau) * span <= kOscillatorySwitch) {
    // Mildly oscillatory: Gauss-Legendre per table panel, splitting any
    // panel whose phase change exceeds one radian.
    for (std::size_t i = 0; i + 1 < nu.size(); ++i) {
      const double a = nu[i], b = nu[i + 1];
      const auto nsub = static_cast<std::size_t>(std::abs(tau) * (b - a)) + 1;
      for (std::size_t m = 0; m < nsub; ++m) {
        const double sa = a + (b - a) * static_cast<double>(m) / static_cast<double>(nsub);
        const double sb = a + (b - a) * static_cast<double>(m + 1) / static_cast<double>(nsub);
        const double c = 0.5 * (sa + sb), h = 0.5 * (sb - sa);
        complexd acc{0.0, 0.0};
        for (int q = 0; q < 2; ++q) {
          const double xp = c + h * kGl4Nodes[q];
          const double xm = c - h * kGl4Nodes[q];
          acc += kGl4Weights[q] *
                 (interp_tabulated(tab, xp) * std::exp(complexd{0.0, -xp * tau}) +
                  interp_tabulated(tab, xm) * std::exp(complexd{0.0, -xm * tau}));
        }
        total += h * acc;
      }
    }
  } else {
    // Filon-type: the linear interpolant integrates exactly against
    // e^{-i nu tau} panel by panel.
    for (std::size_t i = 0; i + 1 < nu.size(); ++i) {
      const double a = nu[i], b = nu[i + 1];
      const double h = b - a;
      const double slope = (j[i + 1] - j[i]) / h;
      complexd e0, e1;
      panel_moments(h, tau, e0, e1);
      total += std::exp(complexd{0.0, -a * tau}) * (j[i] * e0 + slope * e1);
    }
  }
  return total;
}

}  // namespace

void SpectralDensityModel::validate() const {
  if (!(temperature >= 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("temperature must be finite and >= 0");
  }
  if (const auto* lor = std::get_if<LorentzianDensity>(&shape)) {
    if (!(lor->gamma0 > 0.0) || !(lor->lambda > 0.0) ||
        !std::isfinite(lor->delta)) {
      throw ConfigError("Lorentzian density requires gamma0 > 0, lambda > 0, finite delta");
    }
  } else if (const auto* ohm = std::get_if<OhmicDensity>(&shape)) {
    if (!(ohm->eta > 0.0) || !(ohm->omega_c > 0.0) || !(ohm->s >= 0.0)) {
      throw ConfigError("Ohmic density requires eta > 0, omega_c > 0, s >= 0");
    }
  } else {
    const auto& tab = std::get<TabulatedDensity>(shape);
    if (tab.frequency.size() != tab.value.size() || tab.frequency.size() < 2) {
      throw ConfigError("tabulated density needs matching grids with >= 2 points");
    }
    for (std::size_t i = 0; i < tab.frequency.size(); ++i) {
      if (i > 0 && !(tab.frequency[i] > tab.frequency[i - 1])) {
        throw ConfigError("tabulated frequency grid must be strictly increasing");
      }
      if (!(tab.value[i] >= 0.0)) {
        throw ConfigError("tabulated spectral density values must be >= 0");
      }
    }
  }
}

double spectral_eval(const SpectralDensityModel& model, double omega) {
  if (omega < 0.0) {
    throw DomainError("spectral density evaluated at omega < 0");
  }
  if (const auto* lor = std::get_if<LorentzianDensity>(&model.shape)) {
    // Evaluated at frequency relative to the atomic transition (the same
    // convention the tabulated grid uses); the peak sits at -delta so that
    // the kernel below is its Fourier transform.
    const double nu = omega;
    const double l2 = lor->lambda * lor->lambda;
    return (lor->gamma0 * lor->lambda / (2.0 * M_PI)) * lor->lambda /
           ((nu + lor->delta) * (nu + lor->delta) + l2);
  }
  if (const auto* ohm = std::get_if<OhmicDensity>(&model.shape)) {
    if (omega == 0.0) return ohm->s == 0.0 ? ohm->eta * ohm->omega_c : 0.0;
    return ohm->eta * std::pow(omega, ohm->s) *
           std::pow(ohm->omega_c, 1.0 - ohm->s) * std::exp(-omega / ohm->omega_c);
  }
  return interp_tabulated(std::get<TabulatedDensity>(model.shape), omega);
}

CorrelationKernel::CorrelationKernel(const SpectralDensityModel& model) {
  model.validate();
  if (const auto* lor = std::get_if<LorentzianDensity>(&model.shape)) {
    shape_ = *lor;
    closed_form_ = true;
  } else if (const auto* tab = std::get_if<TabulatedDensity>(&model.shape)) {
    shape_ = *tab;
    closed_form_ = false;
  } else {
    throw UnsupportedKernelError(
        "no correlation kernel for the Ohmic-family variant; use Lorentzian or tabulated");
  }
}

complexd CorrelationKernel::operator()(double tau) const {
  if (const auto* lor = std::get_if<LorentzianDensity>(&shape_)) {
    const double amp = 0.5 * lor->gamma0 * lor->lambda;
    return amp * std::exp(-lor->lambda * std::abs(tau)) *
           std::exp(complexd{0.0, lor->delta * tau});
  }
  return tabulated_kernel(std::get<TabulatedDensity>(shape_), tau);
}

complexd kernel_eval(const SpectralDensityModel& model, double tau) {
  return CorrelationKernel(model)(tau);
}

}  // namespace nmq
