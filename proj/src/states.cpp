#include "nmq/states.hpp"

#include <cmath>

#include "nmq/errors.hpp"

namespace nmq {

DensityMatrix2 DensityMatrix2::from_matrix(const std::array<complexd, 4>& m,
                                           double herm_tol) {
  const double herm_defect =
      std::max({std::abs(m[1] - std::conj(m[2])), std::abs(m[0].imag()),
                std::abs(m[3].imag())});
  if (!(herm_defect <= herm_tol)) {
    throw InvalidStateError("density matrix is not Hermitian within tolerance");
  }
  return DensityMatrix2{m[0].real(), m[3].real(),
                        0.5 * (m[1] + std::conj(m[2]))};
}

bool DensityMatrix2::is_valid(double tol) const {
  if (!std::isfinite(rho_ee) || !std::isfinite(rho_gg) ||
      !std::isfinite(rho_eg.real()) || !std::isfinite(rho_eg.imag())) {
    return false;
  }
  if (std::abs(trace() - 1.0) > tol) return false;
  if (rho_ee < -kPsdTol || rho_gg < -kPsdTol) return false;
  if (det() < -kPsdTol) return false;
  return true;
}

void DensityMatrix2::require_valid(double tol) const {
  if (!is_valid(tol)) {
    throw InvalidStateError("density matrix violates trace/positivity invariants");
  }
}

bool XState4::is_valid(double tol) const {
  const double populations[] = {p11, p10, p01, p00};
  double sum = 0.0;
  for (double p : populations) {
    if (!std::isfinite(p) || p < -kPsdTol) return false;
    sum += p;
  }
  if (std::abs(sum - 1.0) > tol) return false;
  if (std::norm(kappa) > p10 * p01 + kPsdTol) return false;
  return true;
}

void XState4::require_valid(double tol) const {
  if (!is_valid(tol)) {
    throw InvalidStateError("X state violates population/coherence invariants");
  }
}

bool PairParams::is_degenerate(double tol) const {
  return std::abs(a) <= tol && std::abs(b) <= tol;
}

double trace_distance(const DensityMatrix2& rho1, const DensityMatrix2& rho2) {
  rho1.require_valid(kPropagatedTol);
  rho2.require_valid(kPropagatedTol);
  const double delta = rho1.rho_ee - rho2.rho_ee;
  const complexd beta = rho1.rho_eg - rho2.rho_eg;
  return std::sqrt(delta * delta + std::norm(beta));
}

double concurrence_x(const XState4& rho) {
  rho.require_valid(kPropagatedTol);
  const double value =
      2.0 * (std::abs(rho.kappa) - std::sqrt(std::max(0.0, rho.p00 * rho.p11)));
  return std::max(0.0, value);
}

DensityMatrix2 bloch_to_density(const BlochVector& r) {
  const double norm2 = r.x * r.x + r.y * r.y + r.z * r.z;
  if (norm2 > 1.0 + kBlochTol) {
    throw InvalidBlochError("Bloch vector lies outside the unit ball");
  }
  return DensityMatrix2{0.5 * (1.0 + r.z), 0.5 * (1.0 - r.z),
                        complexd{0.5 * r.x, -0.5 * r.y}};
}

PairParams pair_to_ab(const DensityMatrix2& rho1, const DensityMatrix2& rho2) {
  return PairParams{rho1.rho_ee - rho2.rho_ee, rho1.rho_eg - rho2.rho_eg};
}

}  // namespace nmq
