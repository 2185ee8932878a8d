#pragma once

#include <complex>
#include <variant>
#include <vector>

#include "nmq/states.hpp"

namespace nmq {

// Lorentzian reservoir spectrum. gamma0 is the Markovian-limit decay rate,
// lambda the spectral width, delta the detuning of the atomic frequency from
// the spectrum peak. All rates share one inverse-time unit.
struct LorentzianDensity {
  double gamma0 = 1.0;
  double lambda = 1.0;
  double delta = 0.0;
};

// Ohmic-family spectrum J(w) = eta * w^s * wc^(1-s) * exp(-w/wc).
struct OhmicDensity {
  double eta = 1.0;
  double omega_c = 1.0;
  double s = 1.0;
};

// Piecewise-linear tabulated spectrum; zero outside the grid. For the
// correlation kernel the grid is read as frequencies relative to the atomic
// transition, so negative entries are allowed there.
struct TabulatedDensity {
  std::vector<double> frequency;  // strictly increasing
  std::vector<double> value;      // nonnegative
};

struct SpectralDensityModel {
  std::variant<LorentzianDensity, OhmicDensity, TabulatedDensity> shape;
  double temperature = 0.0;  // k_B = 1

  void validate() const;  // throws ConfigError
};

// J(omega) for omega >= 0; throws DomainError for omega < 0.
double spectral_eval(const SpectralDensityModel& model, double omega);

// Two-point reservoir correlation function f(tau), the Fourier transform of
// the spectral density taken relative to the atomic frequency. Defined for
// the Lorentzian variant (closed form (gamma0*lambda/2) e^{-lambda|tau|}
// e^{i*delta*tau}) and the Tabulated variant (exact panel-wise integration of
// the linear interpolant against e^{-i*nu*tau}); the Ohmic-family kernel is
// out of scope and throws UnsupportedKernelError.
class CorrelationKernel {
 public:
  explicit CorrelationKernel(const SpectralDensityModel& model);

  complexd operator()(double tau) const;
  bool closed_form() const { return closed_form_; }

 private:
  std::variant<LorentzianDensity, TabulatedDensity> shape_;
  bool closed_form_ = false;
};

// Convenience wrapper constructing the kernel and evaluating once.
complexd kernel_eval(const SpectralDensityModel& model, double tau);

}  // namespace nmq
